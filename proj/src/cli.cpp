#include "mdiqkd/cli.hpp"

#include "mdiqkd/csv.hpp"
#include "mdiqkd/parallel.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mdiqkd {

void SweepSpec::validate() const {
  if (!std::isfinite(loss_db_start) || !std::isfinite(loss_db_end) || loss_db_start > loss_db_end)
    throw std::invalid_argument("sweep: need loss-db-start <= loss-db-end");
  if (!(loss_db_step > 0)) throw std::invalid_argument("sweep: loss-db-step must be positive");
  if (loss_db_start < 0) throw std::invalid_argument("sweep: loss must be non-negative");
  ChannelParams{1.0, dark}.validate();
  if (dims.empty()) throw std::invalid_argument("sweep: no dimensions selected");
  for (int d : dims) check_dim(d);
  optimizer.validate();
}

std::vector<double> SweepSpec::losses() const {
  const auto n = static_cast<std::size_t>(std::floor((loss_db_end - loss_db_start) / loss_db_step + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(loss_db_start + static_cast<double>(i) * loss_db_step);
  return out;
}

SweepRow evaluate_point(double loss_db, double dark, int dim, Mode mode, const OptimizerConfig& optimizer) {
  const auto channel = ChannelParams::from_loss_db(loss_db, dark);
  SweepRow row;
  row.loss_db = loss_db;
  row.eta = channel.eta;
  row.mode = mode;
  row.optimizer_seed = optimizer.seed;
  row.report = analyze(channel_table(channel, dim), dim, optimizer, mode);
  return row;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<int> dims = spec.dims;
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  const auto losses = spec.losses();
  const std::size_t n = losses.size() * dims.size();
  return parallel_map<SweepRow>(
      n,
      [&](std::size_t i) {
        return evaluate_point(losses[i / dims.size()], spec.dark, dims[i % dims.size()], spec.mode, spec.optimizer);
      },
      spec.threads ? spec.threads : default_threads());
}

void write_sweep_header(std::ostream& out) {
  out << "loss_db,eta,dim,mode,qs,epsilon,qp_bound,r_sifted,r_total,feasible_found,optimizer_seed\n";
}

void write_sweep_row(std::ostream& out, const SweepRow& row) {
  const auto& r = row.report;
  const auto& e = r.error_report;
  out << format_real(row.loss_db) << ',' << format_real(row.eta) << ',' << r.dim << ',' << to_string(row.mode) << ','
      << format_real(e.qs) << ',' << format_real(e.epsilon) << ',' << format_real(e.qp_bound) << ','
      << format_real(r.r_sifted) << ',' << format_real(r.r_total) << ',' << format_bool(e.feasible_found) << ','
      << row.optimizer_seed << '\n';
}

std::string to_string(Quantity q) { return q == Quantity::r_sifted ? "r_sifted" : "r_total"; }

Quantity parse_quantity(const std::string& text) {
  if (text == "r_sifted") return Quantity::r_sifted;
  if (text == "r_total") return Quantity::r_total;
  throw std::invalid_argument("unknown quantity '" + text + "'");
}

CrossoverResult find_crossover(const SweepSpec& spec, Quantity quantity, double resolution_db) {
  spec.validate();
  if (!(resolution_db > 0)) throw std::invalid_argument("crossover: resolution must be positive");
  auto diff_at = [&](double loss) {
    auto rate = [&](int dim) {
      const auto r = evaluate_point(loss, spec.dark, dim, spec.mode, spec.optimizer).report;
      return quantity == Quantity::r_sifted ? r.r_sifted : r.r_total;
    };
    return rate(3) - rate(2);
  };
  CrossoverResult res;
  res.quantity = quantity;
  const auto losses = spec.losses();
  const auto diffs = parallel_map<double>(
      losses.size(), [&](std::size_t i) { return diff_at(losses[i]); }, spec.threads ? spec.threads : default_threads());
  for (std::size_t i = 1; i < losses.size(); ++i) {
    if ((diffs[i - 1] > 0) == (diffs[i] > 0)) continue;
    const bool start_positive = diffs[i - 1] > 0;
    double lo = losses[i - 1], hi = losses[i];
    while (hi - lo > resolution_db) {
      const double mid = 0.5 * (lo + hi);
      ((diff_at(mid) > 0) == start_positive ? lo : hi) = mid;
    }
    res.found = true;
    res.bracket = {lo, hi};
    res.loss_db = 0.5 * (lo + hi);
    return res;
  }
  std::ostringstream msg;
  msg << "no sign change of " << to_string(quantity) << "(dim 3) - " << to_string(quantity) << "(dim 2) in ["
      << format_real(spec.loss_db_start) << ", " << format_real(losses.back()) << "] dB";
  if (!diffs.empty()) msg << "; difference runs from " << format_real(diffs.front()) << " to " << format_real(diffs.back());
  res.diagnostic = msg.str();
  return res;
}

void write_crossover(std::ostream& out, const CrossoverResult& r) {
  out << "quantity,found,loss_db,bracket_low,bracket_high\n";
  out << to_string(r.quantity) << ',' << format_bool(r.found) << ',' << format_real(r.loss_db) << ','
      << format_real(r.bracket.first) << ',' << format_real(r.bracket.second) << '\n';
}

void write_certify_header(std::ostream& out) {
  out << "# reference coefficients use computational ordinary states; conjugate states are "
         "omega^(-kj)-phased with exact (mub) or perturbed magnitudes\n";
  out << "dim,trial,seed,strength,source_kind,qs,epsilon,feasible_found,qp_direct,qp_bound,f_true,identity_ok,"
         "constraints_ok,chain_bell_terms,chain_phase_max,chain_triangle,chain_cauchy_schwarz,chain_before_final,"
         "chain_final,theorem_ok,witness_ok,bound_ok\n";
}

void write_certify_row(std::ostream& out, const CertRow& r) {
  const auto& c = r.chain;
  out << r.dim << ',' << r.trial << ',' << r.seed << ',' << format_real(r.strength) << ',' << r.source_kind << ','
      << format_real(r.qs) << ',' << format_real(r.epsilon) << ',' << format_bool(r.feasible_found) << ','
      << format_real(r.qp_direct) << ',' << format_real(r.qp_bound) << ',' << format_real(r.f_true) << ','
      << format_bool(r.identity_ok) << ',' << format_bool(r.constraints_ok) << ',' << format_bool(c.bell_terms) << ','
      << format_bool(c.phase_max) << ',' << format_bool(c.triangle) << ',' << format_bool(c.cauchy_schwarz) << ','
      << format_bool(c.before_final) << ',' << format_bool(c.final_bound) << ',' << format_bool(c.theorem) << ','
      << format_bool(r.witness_ok) << ',' << format_bool(r.bound_ok) << '\n';
}

CertifySummary run_certify(std::ostream& out, std::int64_t n, std::uint64_t seed, const std::vector<int>& dims,
                           const OptimizerConfig& optimizer, unsigned threads) {
  if (n < 1) throw std::invalid_argument("certify: n must be >= 1");
  CertifySummary summary;
  write_certify_header(out);
  constexpr std::int64_t kBlock = 256;
  for (int dim : dims) {
    for (std::int64_t start = 0; start < n; start += kBlock) {
      const auto count = static_cast<std::size_t>(std::min(kBlock, n - start));
      const auto rows = parallel_map<CertRow>(
          count, [&](std::size_t i) { return certify_trial(dim, seed, start + static_cast<std::int64_t>(i), optimizer); },
          threads ? threads : default_threads());
      for (const auto& r : rows) {
        write_certify_row(out, r);
        ++summary.rows;
        if (!r.passed()) summary.failures.push_back(r);
      }
    }
  }
  return summary;
}

void write_report_header(std::ostream& out) {
  out << "dim,mode,qs,epsilon,qp_bound,r_sifted,r_total,sift_factor,feasible_found,optimizer_seed\n";
}

void write_report_row(std::ostream& out, Mode mode, const KeyRateReport& r, std::uint64_t seed) {
  const auto& e = r.error_report;
  out << r.dim << ',' << to_string(mode) << ',' << format_real(e.qs) << ',' << format_real(e.epsilon) << ','
      << format_real(e.qp_bound) << ',' << format_real(r.r_sifted) << ',' << format_real(r.r_total) << ','
      << format_real(r.sift_factor) << ',' << format_bool(e.feasible_found) << ',' << seed << '\n';
}

namespace {

struct CliOptions {
  double loss_db_start = 0;
  double loss_db_end = 40;
  double loss_db_step = 1;
  double loss_db = 0;
  double dark = 1e-5;
  std::string dim = "both";
  std::string mode = "uncharacterized";
  std::string quantity = "r_sifted";
  int grid_points = OptimizerConfig{}.grid_points;
  int multistarts = OptimizerConfig{}.multistarts;
  int refine_iterations = OptimizerConfig{}.refine_iterations;
  double tolerance = OptimizerConfig{}.constraint_tolerance;
  double a_max = OptimizerConfig{}.a_max;
  std::uint64_t seed = 0;
  std::int64_t n = 100;
  std::string table;
  std::string table_out;
  std::string out;
  unsigned threads = 0;
};

std::vector<int> parse_dims(const std::string& s) {
  if (s == "both") return {2, 3};
  if (s == "2") return {2};
  if (s == "3") return {3};
  throw std::invalid_argument("--dim must be 2, 3 or both");
}

OptimizerConfig optimizer_from(const CliOptions& o) {
  OptimizerConfig c;
  c.grid_points = o.grid_points;
  c.multistarts = o.multistarts;
  c.refine_iterations = o.refine_iterations;
  c.constraint_tolerance = o.tolerance;
  c.a_max = o.a_max;
  c.seed = o.seed;
  c.validate();
  return c;
}

SweepSpec spec_from(const CliOptions& o) {
  SweepSpec s;
  s.loss_db_start = o.loss_db_start;
  s.loss_db_end = o.loss_db_end;
  s.loss_db_step = o.loss_db_step;
  s.dark = o.dark;
  s.dims = parse_dims(o.dim);
  s.mode = parse_mode(o.mode);
  s.optimizer = optimizer_from(o);
  s.threads = o.threads;
  s.validate();
  return s;
}

// Input problems that should surface as exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Key-rate certification for qutrit and qubit MDI-QKD with uncharacterized sources", "mdiqkd"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  CliOptions o;
  app.add_option("--loss-db-start", o.loss_db_start, "first total channel loss in dB")->capture_default_str();
  app.add_option("--loss-db-end", o.loss_db_end, "last total channel loss in dB")->capture_default_str();
  app.add_option("--loss-db-step", o.loss_db_step, "loss step in dB")->capture_default_str();
  app.add_option("--loss-db", o.loss_db, "channel loss for analyze")->capture_default_str();
  app.add_option("--dark", o.dark, "dark-count probability per detector per pulse")->capture_default_str();
  app.add_option("--dim", o.dim, "2, 3 or both")->check(CLI::IsMember({"2", "3", "both"}))->capture_default_str();
  app.add_option("--mode", o.mode, "ideal, uncharacterized or nominal")
      ->check(CLI::IsMember({"ideal", "uncharacterized", "nominal"}))
      ->capture_default_str();
  app.add_option("--quantity", o.quantity, "crossover quantity: r_sifted or r_total")
      ->check(CLI::IsMember({"r_sifted", "r_total"}))
      ->capture_default_str();
  app.add_option("--grid-points", o.grid_points, "coefficient grid points per axis")->capture_default_str();
  app.add_option("--multistarts", o.multistarts, "local refinements per objective pair")->capture_default_str();
  app.add_option("--refine-iterations", o.refine_iterations, "objective evaluations per refinement")
      ->capture_default_str();
  app.add_option("--tolerance", o.tolerance, "constraint tolerance")->capture_default_str();
  app.add_option("--a-max", o.a_max, "upper bound on source coefficients")->capture_default_str();
  app.add_option("--seed", o.seed, "root seed")->envname("QKD_SEED")->capture_default_str();
  app.add_option("--n", o.n, "certification trials per dimension")->capture_default_str();
  app.add_option("--table", o.table, "analyze a success-probability table CSV instead of the channel model");
  app.add_option("--table-out", o.table_out, "write the analyzed table as CSV");
  app.add_option("--out", o.out, "output file (default: standard output)");
  app.add_option("--threads", o.threads, "worker threads (0: hardware concurrency)")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "rates over a range of channel losses");
  auto* crossover = app.add_subcommand("crossover", "loss at which the qutrit rate falls below the qubit rate");
  auto* certify = app.add_subcommand("certify", "random-attack certification of the phase-error bound");
  auto* analyze_cmd = app.add_subcommand("analyze", "error rates and key rate for one table");
  for (auto* s : {sweep, crossover, certify, analyze_cmd}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    std::ofstream file;
    if (!o.out.empty()) {
      file.open(o.out, std::ios::binary);
      if (!file) throw UsageError("cannot open output file '" + o.out + "'");
    }
    std::ostream& dst = o.out.empty() ? out : file;

    if (*sweep) {
      const auto rows = run_sweep(spec_from(o));
      write_sweep_header(dst);
      for (const auto& r : rows) write_sweep_row(dst, r);
    } else if (*crossover) {
      auto spec = spec_from(o);
      const auto res = find_crossover(spec, parse_quantity(o.quantity));
      write_crossover(dst, res);
      if (!res.found) err << "crossover: " << res.diagnostic << '\n';
    } else if (*certify) {
      if (o.n < 1) throw UsageError("--n must be >= 1");
      auto opt = certification_optimizer(o.seed);
      if (app.count("--grid-points")) opt.grid_points = o.grid_points;
      if (app.count("--multistarts")) opt.multistarts = o.multistarts;
      if (app.count("--refine-iterations")) opt.refine_iterations = o.refine_iterations;
      opt.validate();
      const auto summary = run_certify(dst, o.n, o.seed, parse_dims(o.dim), opt, o.threads);
      if (!summary.failures.empty()) {
        err << "certify: " << summary.failures.size() << " of " << summary.rows << " trials violated a check\n";
        for (const auto& f : summary.failures)
          err << "  dim=" << f.dim << " trial=" << f.trial << " seed=" << f.seed << '\n';
        return 1;
      }
    } else if (*analyze_cmd) {
      const Mode mode = parse_mode(o.mode);
      const auto opt = optimizer_from(o);
      std::vector<ProbTable> tables;
      if (!o.table.empty()) {
        std::ifstream in(o.table);
        if (!in) throw UsageError("cannot open table '" + o.table + "'");
        tables.push_back(read_csv(in));
        if (app.count("--dim") && parse_dims(o.dim) != std::vector<int>{tables.back().dim()})
          throw UsageError("--dim does not match the table dimension");
      } else {
        const auto channel = ChannelParams::from_loss_db(o.loss_db, o.dark);
        for (int d : parse_dims(o.dim)) tables.push_back(channel_table(channel, d));
      }
      if (!o.table_out.empty()) {
        if (tables.size() != 1) throw UsageError("--table-out needs a single dimension");
        std::ofstream tout(o.table_out, std::ios::binary);
        if (!tout) throw UsageError("cannot open '" + o.table_out + "'");
        write_csv(tout, tables.front());
      }
      write_report_header(dst);
      for (const auto& t : tables) write_report_row(dst, mode, analyze(t, t.dim(), opt, mode), opt.seed);
    }
    dst.flush();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace mdiqkd
