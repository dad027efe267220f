#include "mdiqkd/statistics.hpp"

#include "mdiqkd/csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mdiqkd {

std::string to_string(SettingLabel label) {
  std::string s = std::to_string(label.index);
  if (label.basis == Basis::bar) s += 'b';
  return s;
}

SettingLabel parse_setting(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty setting label");
  SettingLabel label;
  std::string digits = text;
  if (digits.back() == 'b') {
    label.basis = Basis::bar;
    digits.pop_back();
  }
  if (digits.size() != 1 || digits[0] < '0' || digits[0] > '9')
    throw std::invalid_argument("malformed setting label '" + text + "'");
  label.index = digits[0] - '0';
  return label;
}

ProbTable::ProbTable(int dim, Eigen::MatrixXd entries) : dim_(dim), entries_(std::move(entries)) {
  check_dim(dim);
  if (entries_.rows() != 2 * dim || entries_.cols() != 2 * dim)
    throw std::invalid_argument("ProbTable: expected a " + std::to_string(2 * dim) + "x" + std::to_string(2 * dim) +
                                " table");
  for (Eigen::Index i = 0; i < entries_.size(); ++i) {
    double& p = entries_.data()[i];
    if (!std::isfinite(p) || p < -1e-12 || p > 1 + 1e-12)
      throw std::invalid_argument("ProbTable: entry outside [0,1]");
    p = std::clamp(p, 0.0, 1.0);
  }
}

std::vector<SettingLabel> ProbTable::settings() const {
  std::vector<SettingLabel> out;
  for (Basis b : {Basis::ordinary, Basis::bar})
    for (int i = 0; i < dim_; ++i) out.push_back({b, i});
  return out;
}

ProbTable ProbTable::normalized() const {
  const double mass = matched_ordinary_sum();
  if (!(mass > 0)) throw std::domain_error("ProbTable::normalized: no matched-ordinary success events");
  // Entries may exceed 1 after rescaling, so bypass the probability check.
  ProbTable out(dim_, Eigen::MatrixXd::Zero(2 * dim_, 2 * dim_));
  out.entries_ = entries_ / mass;
  return out;
}

void ChannelParams::validate() const {
  if (!(eta >= 0 && eta <= 1)) throw std::invalid_argument("ChannelParams: eta outside [0,1]");
  if (!(dark >= 0 && dark < 1)) throw std::invalid_argument("ChannelParams: dark outside [0,1)");
}

double eta_from_loss_db(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

ChannelParams ChannelParams::from_loss_db(double loss_db, double dark) {
  ChannelParams p{eta_from_loss_db(loss_db), dark};
  p.validate();
  return p;
}

std::vector<StateVector> ideal_sources(int dim) {
  check_dim(dim);
  std::vector<StateVector> states;
  for (int i = 0; i < dim; ++i) states.push_back(computational_state(dim, i));
  for (auto& s : mub_bar_basis(dim)) states.push_back(std::move(s));
  return states;
}

ProbTable table_from_sources(std::span<const StateVector> alice, std::span<const StateVector> bob,
                             const StateVector& target) {
  const auto n = static_cast<Eigen::Index>(alice.size());
  if (n != static_cast<Eigen::Index>(bob.size()) || (n != 4 && n != 6))
    throw std::invalid_argument("table_from_sources: need 2*dim states per party");
  const int dim = static_cast<int>(n / 2);
  if (target.size() != dim * dim) throw std::invalid_argument("table_from_sources: target dimension mismatch");
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    if (alice[x].size() != dim || bob[x].size() != dim)
      throw std::invalid_argument("table_from_sources: source dimension mismatch");
    for (Eigen::Index y = 0; y < n; ++y) p(x, y) = projection_prob(tensor(alice[x], bob[y]), target);
  }
  return ProbTable(dim, std::move(p));
}

ProbTable ideal_table(int dim) {
  const auto sources = ideal_sources(dim);
  return table_from_sources(sources, sources, me_state(dim, 0, 0));
}

ChannelWeights channel_weights(const ChannelParams& params, int dim) {
  check_dim(dim);
  params.validate();
  const double eta = params.eta;
  const double d = params.dark;
  // Six detectors for the qutrit BSM (four idle), four for the qubit BSM (two idle).
  const double idle = dim == 3 ? std::pow(1 - d, 4) : std::pow(1 - d, 2);
  const double double_dark = dim == 3 ? 3.0 : 2.0;
  return {eta * eta * idle, 2 * eta * (1 - eta) * d * idle + double_dark * (1 - eta) * (1 - eta) * d * d * idle};
}

ProbTable channel_table(const ChannelParams& params, int dim) {
  const auto w = channel_weights(params, dim);
  Eigen::MatrixXd p = w.signal * ideal_table(dim).entries();
  p.array() += w.noise;
  return ProbTable(dim, std::move(p));
}

void write_csv(std::ostream& out, const ProbTable& table) {
  const auto settings = table.settings();
  out << "setting";
  for (const auto& s : settings) out << ',' << to_string(s);
  out << '\n';
  for (const auto& a : settings) {
    out << to_string(a);
    for (const auto& b : settings) out << ',' << format_real(table(a, b));
    out << '\n';
  }
}

ProbTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("ProbTable CSV: empty input");
  const auto header = split_csv_line(line);
  const auto n = static_cast<Eigen::Index>(header.size()) - 1;
  if (n != 4 && n != 6) throw std::invalid_argument("ProbTable CSV: expected 4 or 6 setting columns");
  const int dim = static_cast<int>(n / 2);
  std::vector<int> col_slot(n);
  auto slot_of = [dim](const std::string& text) {
    const auto s = parse_setting(text);
    if (s.index >= dim) throw std::invalid_argument("ProbTable CSV: setting '" + text + "' out of range");
    return ProbTable::slot(dim, s);
  };
  for (Eigen::Index c = 0; c < n; ++c) col_slot[c] = slot_of(header[c + 1]);

  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(n, n, std::nan(""));
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<Eigen::Index>(cells.size()) != n + 1) throw std::invalid_argument("ProbTable CSV: ragged row");
    const int r = slot_of(cells[0]);
    for (Eigen::Index c = 0; c < n; ++c) p(r, col_slot[c]) = std::stod(cells[c + 1]);
    ++rows;
  }
  if (rows != n || p.hasNaN()) throw std::invalid_argument("ProbTable CSV: incomplete table");
  return ProbTable(dim, std::move(p));
}

}  // namespace mdiqkd
