// Seed splitting: every trial or restart gets its own generator derived from
// (root seed, stream tag, counter), so any single run can be replayed alone.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mdiqkd {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(root);
  for (auto p : path) s = splitmix64(s ^ splitmix64(p));
  return s;
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  return std::mt19937_64(derive_seed(root, path));
}

}  // namespace mdiqkd
