// Bell-measurement success statistics p(x, y) for ideal sources, arbitrary
// source states, and the loss/dark-count channel.

#pragma once

#include "mdiqkd/qudit.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mdiqkd {

/// One of the 2*dim preparation settings of a party.
struct SettingLabel {
  Basis basis = Basis::ordinary;
  int index = 0;

  friend bool operator==(const SettingLabel&, const SettingLabel&) = default;
};

/// "0", "1", "2" for ordinary settings, "0b", "1b", "2b" for conjugate ones.
std::string to_string(SettingLabel label);
SettingLabel parse_setting(const std::string& text);

/// Success probabilities indexed by (Alice setting, Bob setting). Slots are
/// ordinary 0..dim-1 followed by conjugate 0..dim-1.
class ProbTable {
 public:
  ProbTable(int dim, Eigen::MatrixXd entries);

  int dim() const { return dim_; }
  const Eigen::MatrixXd& entries() const { return entries_; }

  static int slot(int dim, SettingLabel s) { return s.basis == Basis::ordinary ? s.index : dim + s.index; }
  std::vector<SettingLabel> settings() const;

  double operator()(SettingLabel alice, SettingLabel bob) const {
    return entries_(slot(dim_, alice), slot(dim_, bob));
  }
  /// p(i, j), both ordinary.
  double ordinary(int i, int j) const { return entries_(i, j); }
  /// p(jbar, i): Alice conjugate j, Bob ordinary i.
  double bar_ordinary(int j, int i) const { return entries_(dim_ + j, i); }
  /// p(i, kbar): Alice ordinary i, Bob conjugate k.
  double ordinary_bar(int i, int k) const { return entries_(i, dim_ + k); }
  double bar_bar(int x, int y) const { return entries_(dim_ + x, dim_ + y); }

  double matched_ordinary_sum() const { return entries_.topLeftCorner(dim_, dim_).sum(); }

  /// Every entry divided by matched_ordinary_sum(). Error rates and the
  /// phase-error bound are invariant under this rescaling.
  ProbTable normalized() const;

 private:
  int dim_;
  Eigen::MatrixXd entries_;
};

struct ChannelParams {
  double eta = 1.0;   // combined two-arm transmittance
  double dark = 0.0;  // dark-count probability per detector per pulse

  void validate() const;
  static ChannelParams from_loss_db(double loss_db, double dark);
};

/// eta = 10^(-loss_db / 10).
double eta_from_loss_db(double loss_db);

/// Ordinary states followed by conjugate states, 2*dim in total.
std::vector<StateVector> ideal_sources(int dim);

ProbTable table_from_sources(std::span<const StateVector> alice, std::span<const StateVector> bob,
                             const StateVector& target);

ProbTable ideal_table(int dim);

/// Detector-count weights of the unified channel model:
/// p(x, y) = signal * Pi(x, y) + noise, with Pi the ideal-source table.
struct ChannelWeights {
  double signal;
  double noise;
};
ChannelWeights channel_weights(const ChannelParams& params, int dim);

ProbTable channel_table(const ChannelParams& params, int dim);

void write_csv(std::ostream& out, const ProbTable& table);
ProbTable read_csv(std::istream& in);

}  // namespace mdiqkd
