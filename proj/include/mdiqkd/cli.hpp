// Command-line front end: loss sweeps, crossover search, certification runs
// and single-point analysis, all emitting CSV.

#pragma once

#include "mdiqkd/eve_oracle.hpp"
#include "mdiqkd/security.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mdiqkd {

struct SweepSpec {
  double loss_db_start = 0;
  double loss_db_end = 40;
  double loss_db_step = 1;
  double dark = 1e-5;
  std::vector<int> dims{2, 3};
  Mode mode = Mode::uncharacterized;
  OptimizerConfig optimizer;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
  std::vector<double> losses() const;
};

struct SweepRow {
  double loss_db = 0;
  double eta = 0;
  Mode mode = Mode::uncharacterized;
  KeyRateReport report;
  std::uint64_t optimizer_seed = 0;
};

SweepRow evaluate_point(double loss_db, double dark, int dim, Mode mode, const OptimizerConfig& optimizer);

/// Rows in ascending (loss_db, dim) order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

void write_sweep_header(std::ostream& out);
void write_sweep_row(std::ostream& out, const SweepRow& row);

enum class Quantity { r_sifted, r_total };
std::string to_string(Quantity q);
Quantity parse_quantity(const std::string& text);

struct CrossoverResult {
  Quantity quantity = Quantity::r_sifted;
  bool found = false;
  double loss_db = 0;
  std::pair<double, double> bracket{0, 0};
  std::string diagnostic;
};

/// First loss at which rate(dim 3) - rate(dim 2) turns non-positive: a scan
/// at the sweep step, then bisection to 0.05 dB.
CrossoverResult find_crossover(const SweepSpec& spec, Quantity quantity, double resolution_db = 0.05);

void write_crossover(std::ostream& out, const CrossoverResult& r);

void write_certify_header(std::ostream& out);
void write_certify_row(std::ostream& out, const CertRow& row);

struct CertifySummary {
  std::int64_t rows = 0;
  std::vector<CertRow> failures;
};

/// Streams n trials per dimension; returns the rows that violate any check.
CertifySummary run_certify(std::ostream& out, std::int64_t n, std::uint64_t seed, const std::vector<int>& dims,
                           const OptimizerConfig& optimizer, unsigned threads = 0);

void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, Mode mode, const KeyRateReport& r, std::uint64_t seed);

/// Exit codes: 0 success, 1 certification violation, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdiqkd
