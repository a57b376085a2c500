// svl: generate quadratic instances, evaluate stationary-variance theory,
// run Monte-Carlo simulations, and compare the two.
//
// Exit codes: 0 ok, 2 invalid flags, 3 assembly failure, 4 instability or
// divergence, 5 output unwritable.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "svl/analytic.hpp"
#include "svl/errors.hpp"
#include "svl/problem.hpp"
#include "svl/sim.hpp"

namespace {

struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format5(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4e", v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw OutputError("cannot open output file: " + path);
  return out;
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> values;
  for (const auto& item : split_csv_list(text)) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("cannot parse ") + what + ": '" + item + "'");
    }
  }
  if (values.empty()) throw std::invalid_argument(std::string(what) + " list is empty");
  return values;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SVL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;
}

// Options shared by theory/simulate/compare/trace; a JSON config file seeds
// them and explicit flags override.
struct RunOptions {
  std::string config_path;
  std::string problem_path;
  std::string spectrum;
  std::string powers;
  int n = 0;
  std::uint64_t problem_seed = 0;
  bool regression = false;
  int reg_d = 0;
  double noise_std = 0.1;

  double gamma = 0.0;
  double alpha = 0.0;
  std::string algorithms = "sgd,sgdm,snag";
  std::string schemes = "replacement,rr,so";
  std::string noise_modes = "zero_order";
  bool approx = false;
  double delta = -1.0;

  std::size_t iterations = 400000;
  std::size_t burn_in = 50000;
  int runs = 8;
  std::size_t period = 0;
  std::size_t tail = 0;
  std::uint64_t seed = 1;
  int threads = 0;
  bool long_run = false;
  std::string output;
};

// Long-run protocol preset: 10 runs of 6e6 iterations, first 1.2e5
// discarded; shuffle-once uses 40 periods of 1.5e5 keeping the last 3e4.
void apply_long_run(const CLI::App* cmd, RunOptions& o) {
  if (!o.long_run) return;
  if (cmd->count("--iterations") == 0) o.iterations = 6000000;
  if (cmd->count("--burn-in") == 0) o.burn_in = 120000;
  if (cmd->count("--runs") == 0) o.runs = 10;
  if (cmd->count("--period") == 0) o.period = 150000;
  if (cmd->count("--tail") == 0) o.tail = 30000;
}

void add_problem_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON config file; flags override its values");
  cmd->add_option("-p,--problem", o.problem_path, "problem instance JSON file");
  cmd->add_option("--spectrum", o.spectrum, "comma-separated eigenvalues of A");
  cmd->add_option("--powers", o.powers, "comma-separated mode powers u_i' Sigma u_i");
  cmd->add_option("-n,--num-components", o.n, "number of components n");
  cmd->add_option("--problem-seed", o.problem_seed, "seed for instance synthesis");
  cmd->add_flag("--regression", o.regression, "draw a Gaussian regression instance");
  cmd->add_option("-d,--dimension", o.reg_d, "dimension d (regression instance)");
  cmd->add_option("--noise-std", o.noise_std, "label noise std (regression instance)");
}

void add_algorithm_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--gamma", o.gamma, "stepsize gamma");
  cmd->add_option("--alpha", o.alpha, "momentum weight alpha (ignored for sgd)");
  cmd->add_option("--algorithms", o.algorithms, "comma list of sgd,sgdm,snag");
  cmd->add_option("--schemes", o.schemes, "comma list of replacement,rr,so");
}

void add_trajectory_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--runs", o.runs, "number of Monte-Carlo runs");
  cmd->add_option("--iterations", o.iterations, "iterations per run");
  cmd->add_option("--burn-in", o.burn_in, "iterations discarded at the start");
  cmd->add_option("--period", o.period, "shuffle-once period length");
  cmd->add_option("--tail", o.tail, "retained tail of each shuffle-once period");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--threads", o.threads, "worker threads (default: SVL_THREADS or all)");
  cmd->add_flag("--long-run", o.long_run,
                "preset: 10 runs x 6e6 iterations, burn-in 1.2e5, periods 1.5e5/tail 3e4");
}

void merge_config(const CLI::App* cmd, RunOptions& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw std::invalid_argument("cannot read config file: " + o.config_path);
  nlohmann::json doc;
  in >> doc;
  const auto set_if_unset = [&](const char* flag, auto& target, const char* key) {
    if (doc.contains(key) && cmd->count(flag) == 0) target = doc.at(key).get<std::decay_t<decltype(target)>>();
  };
  if (doc.contains("problem") && cmd->count("--problem") == 0 &&
      cmd->count("--spectrum") == 0 && !cmd->count("--regression")) {
    const auto& p = doc.at("problem");
    if (p.contains("file")) o.problem_path = p.at("file").get<std::string>();
    if (p.contains("spectrum")) {
      const auto& s = p.at("spectrum");
      std::string lam, pow;
      for (double v : s.at("eigenvalues").get<std::vector<double>>())
        lam += (lam.empty() ? "" : ",") + std::to_string(v);
      for (double v : s.at("mode_powers").get<std::vector<double>>())
        pow += (pow.empty() ? "" : ",") + std::to_string(v);
      o.spectrum = lam;
      o.powers = pow;
      o.n = s.at("n").get<int>();
      if (s.contains("seed")) o.problem_seed = s.at("seed").get<std::uint64_t>();
    }
    if (p.contains("regression")) {
      const auto& r = p.at("regression");
      o.regression = true;
      o.n = r.at("n").get<int>();
      o.reg_d = r.at("d").get<int>();
      if (r.contains("noise_std")) o.noise_std = r.at("noise_std").get<double>();
      if (r.contains("seed")) o.problem_seed = r.at("seed").get<std::uint64_t>();
    }
  }
  set_if_unset("--gamma", o.gamma, "gamma");
  set_if_unset("--alpha", o.alpha, "alpha");
  if (doc.contains("algorithms") && cmd->count("--algorithms") == 0) {
    std::string list;
    for (const auto& a : doc.at("algorithms"))
      list += (list.empty() ? "" : ",") + a.get<std::string>();
    o.algorithms = list;
  }
  if (doc.contains("schemes") && cmd->count("--schemes") == 0) {
    std::string list;
    for (const auto& s : doc.at("schemes"))
      list += (list.empty() ? "" : ",") + s.get<std::string>();
    o.schemes = list;
  }
  if (doc.contains("noise_modes") && cmd->count("--noise") == 0) {
    std::string list;
    for (const auto& s : doc.at("noise_modes"))
      list += (list.empty() ? "" : ",") + s.get<std::string>();
    o.noise_modes = list;
  }
  set_if_unset("--approx", o.approx, "approx");
  set_if_unset("--delta", o.delta, "delta");
  if (doc.contains("trajectory")) {
    const auto& t = doc.at("trajectory");
    const auto traj = [&](const char* flag, auto& target, const char* key) {
      if (t.contains(key) && cmd->count(flag) == 0)
        target = t.at(key).get<std::decay_t<decltype(target)>>();
    };
    traj("--iterations", o.iterations, "iterations");
    traj("--burn-in", o.burn_in, "burn_in");
    traj("--runs", o.runs, "runs");
    traj("--period", o.period, "period_length");
    traj("--tail", o.tail, "tail_used");
    traj("--seed", o.seed, "seed");
    traj("--threads", o.threads, "threads");
  }
  set_if_unset("--output", o.output, "output");
}

svl::QuadraticProblem resolve_problem(const RunOptions& o) {
  const int sources = (!o.problem_path.empty()) + (!o.spectrum.empty()) + o.regression;
  if (sources != 1)
    throw std::invalid_argument(
        "specify exactly one problem source: --problem, --spectrum/--powers, or --regression");
  if (!o.problem_path.empty()) return svl::load_problem(o.problem_path);
  if (o.regression) {
    if (o.n <= 0 || o.reg_d <= 0)
      throw std::invalid_argument("--regression requires -n and -d");
    return svl::assemble(
        svl::build_regression_instance(o.n, o.reg_d, o.noise_std, o.problem_seed));
  }
  if (o.powers.empty())
    throw std::invalid_argument("--spectrum requires --powers");
  if (o.n <= 0) throw std::invalid_argument("--spectrum requires -n");
  const auto lam = parse_double_list(o.spectrum, "--spectrum");
  const auto pow = parse_double_list(o.powers, "--powers");
  if (lam.size() != pow.size())
    throw std::invalid_argument("--spectrum and --powers must have equal length");
  svl::SpectrumSpec spec;
  spec.eigenvalues = Eigen::Map<const Eigen::VectorXd>(lam.data(), lam.size());
  spec.mode_powers = Eigen::Map<const Eigen::VectorXd>(pow.data(), pow.size());
  return svl::build_spectrum_instance(spec, o.n, o.problem_seed);
}

std::vector<svl::AlgorithmSpec> resolve_algorithms(const RunOptions& o) {
  if (!(o.gamma > 0)) throw std::invalid_argument("--gamma must be given and > 0");
  std::vector<svl::AlgorithmSpec> specs;
  for (const auto& name : split_csv_list(o.algorithms)) {
    const svl::Algorithm a = svl::parse_algorithm(name);
    specs.push_back(svl::make_spec(a, o.gamma, a == svl::Algorithm::sgd ? 0.0 : o.alpha));
  }
  if (specs.empty()) throw std::invalid_argument("--algorithms list is empty");
  return specs;
}

std::vector<svl::SamplingScheme> resolve_schemes(const RunOptions& o) {
  std::vector<svl::SamplingScheme> schemes;
  for (const auto& name : split_csv_list(o.schemes)) schemes.push_back(svl::parse_scheme(name));
  if (schemes.empty()) throw std::invalid_argument("--schemes list is empty");
  return schemes;
}

svl::TrajectoryConfig resolve_trajectory(const RunOptions& o, bool shuffle_once_used) {
  svl::TrajectoryConfig cfg;
  cfg.iterations = o.iterations;
  cfg.burn_in = o.burn_in;
  cfg.runs = o.runs;
  cfg.master_seed = o.seed;
  cfg.threads = resolve_threads(o.threads);
  if (o.period > 0) {
    const std::size_t tail = o.tail > 0 ? o.tail : o.period / 5;
    cfg.so_periods = svl::SoPeriods{o.period, tail};
  } else if (shuffle_once_used) {
    throw std::invalid_argument("shuffle_once simulation requires --period (and --tail)");
  }
  cfg.validate();
  return cfg;
}

void print_instance_summary(std::ostream& out, const svl::QuadraticProblem& p) {
  out << "n = " << p.n() << ", d = " << p.d() << "\n";
  out << "eigenvalues:";
  for (int i = 0; i < p.d(); ++i) out << ' ' << format5(p.eigenvalues[i]);
  out << "\nmode powers (u_i' Sigma u_i):";
  for (int i = 0; i < p.d(); ++i) out << ' ' << format5(p.mode_powers[i]);
  out << "\n";
}

// ---- gen ----------------------------------------------------------------

int run_gen(const RunOptions& o, const std::string& output) {
  if (output.empty()) throw std::invalid_argument("gen requires -o/--output");
  const svl::QuadraticProblem problem = resolve_problem(o);
  try {
    svl::save_problem(problem, output);
  } catch (const svl::Error& e) {
    throw OutputError(e.what());
  }
  print_instance_summary(std::cout, problem);
  std::cout << "wrote " << output << "\n";
  return 0;
}

// ---- theory -------------------------------------------------------------

int run_theory(const RunOptions& o, bool as_json) {
  const svl::QuadraticProblem problem = resolve_problem(o);
  const auto specs = resolve_algorithms(o);
  const auto schemes = resolve_schemes(o);
  std::optional<double> delta;
  if (o.delta > 0) delta = o.delta;

  std::vector<svl::VarianceReport> reports;
  for (const auto& spec : specs)
    for (const auto scheme : schemes) {
      reports.push_back(svl::variance_exact(problem, spec, scheme));
      if (o.approx) reports.push_back(svl::variance_approx(problem, spec, scheme, delta));
    }

  std::printf("%-6s %-18s %-7s %-12s %s\n", "algo", "scheme", "method", "total", "path");
  for (const auto& r : reports) {
    std::string paths;
    for (const auto& m : r.per_mode) {
      const std::string p = svl::to_string(m.path);
      if (paths.find(p) == std::string::npos) paths += (paths.empty() ? "" : "+") + p;
    }
    std::printf("%-6s %-18s %-7s %-12s %s\n", svl::to_string(r.algorithm.algorithm).c_str(),
                svl::to_string(r.scheme).c_str(), svl::to_string(r.method).c_str(),
                format5(r.total).c_str(), paths.c_str());
  }

  if (!o.output.empty()) {
    auto out = open_output(o.output);
    if (as_json) {
      out << "[\n";
      for (std::size_t i = 0; i < reports.size(); ++i)
        out << svl::report_to_json(reports[i]) << (i + 1 < reports.size() ? ",\n" : "\n");
      out << "]\n";
    } else {
      svl::write_reports_csv_header(out, problem.d());
      for (const auto& r : reports) svl::write_report_csv_row(out, r);
    }
    if (!out) throw OutputError("write failed: " + o.output);
  }
  return 0;
}

// ---- simulate / compare -------------------------------------------------

struct SimRow {
  svl::AlgorithmSpec spec;
  svl::SamplingScheme scheme;
  svl::NoiseMode mode;
  svl::MseEstimate estimate;
};

std::vector<SimRow> run_simulations(const svl::QuadraticProblem& problem,
                                    const RunOptions& o) {
  const auto specs = resolve_algorithms(o);
  const auto schemes = resolve_schemes(o);
  std::vector<svl::NoiseMode> modes;
  for (const auto& m : split_csv_list(o.noise_modes)) modes.push_back(svl::parse_noise_mode(m));
  if (modes.empty()) throw std::invalid_argument("--noise list is empty");

  const bool uses_so = std::find(schemes.begin(), schemes.end(),
                                 svl::SamplingScheme::shuffle_once) != schemes.end();
  const svl::TrajectoryConfig base_cfg = resolve_trajectory(o, uses_so);

  std::vector<SimRow> rows;
  for (const auto& spec : specs)
    for (const auto scheme : schemes)
      for (const auto mode : modes) {
        svl::TrajectoryConfig cfg = base_cfg;
        if (scheme != svl::SamplingScheme::shuffle_once) cfg.so_periods.reset();
        rows.push_back({spec, scheme, mode,
                        svl::run_mse_estimate(problem, spec, scheme, mode, cfg)});
      }
  return rows;
}

int run_simulate(const RunOptions& o) {
  const svl::QuadraticProblem problem = resolve_problem(o);
  const auto rows = run_simulations(problem, o);

  std::printf("%-6s %-18s %-11s %-12s %-12s\n", "algo", "scheme", "noise", "mc_mean", "mc_std");
  for (const auto& r : rows)
    std::printf("%-6s %-18s %-11s %-12s %-12s\n", svl::to_string(r.spec.algorithm).c_str(),
                svl::to_string(r.scheme).c_str(), svl::to_string(r.mode).c_str(),
                format5(r.estimate.mean).c_str(), format5(r.estimate.std).c_str());

  if (!o.output.empty()) {
    auto out = open_output(o.output);
    out.precision(17);
    out << "algorithm,gamma,alpha,scheme,noise_mode,mc_mean,mc_std,runs,iterations\n";
    for (const auto& r : rows)
      out << svl::to_string(r.spec.algorithm) << ',' << r.spec.stepsize << ','
          << r.spec.momentum << ',' << svl::to_string(r.scheme) << ','
          << svl::to_string(r.mode) << ',' << r.estimate.mean << ',' << r.estimate.std << ','
          << o.runs << ',' << o.iterations << '\n';
    if (!out) throw OutputError("write failed: " + o.output);
  }
  return 0;
}

int run_compare(const RunOptions& o) {
  const svl::QuadraticProblem problem = resolve_problem(o);
  const auto rows = run_simulations(problem, o);
  std::optional<double> delta;
  if (o.delta > 0) delta = o.delta;

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!o.output.empty()) {
    file = open_output(o.output);
    out = &file;
  }
  out->precision(17);
  *out << "algorithm,scheme,noise_mode,theory_exact,theory_approx,mc_mean,mc_std,n_sigma,verdict\n";
  bool all_ok = true;
  for (const auto& r : rows) {
    const svl::VarianceReport exact = svl::variance_exact(problem, r.spec, r.scheme);
    std::string approx_field;
    if (o.approx) {
      const auto approx = svl::variance_approx(problem, r.spec, r.scheme, delta);
      std::ostringstream ss;
      ss.precision(17);
      ss << approx.total;
      approx_field = ss.str();
    }
    const double diff = std::abs(r.estimate.mean - exact.total);
    const double n_sigma = r.estimate.std > 0 ? diff / r.estimate.std
                           : (diff == 0 ? 0.0 : std::numeric_limits<double>::infinity());
    const bool ok = n_sigma <= 4.0;
    all_ok = all_ok && ok;
    *out << svl::to_string(r.spec.algorithm) << ',' << svl::to_string(r.scheme) << ','
         << svl::to_string(r.mode) << ',' << exact.total << ',' << approx_field << ','
         << r.estimate.mean << ',' << r.estimate.std << ',' << n_sigma << ','
         << (ok ? "OK" : "FLAG") << '\n';
  }
  if (!*out) throw OutputError("write failed: " + o.output);
  if (!o.output.empty()) {
    std::cout << "wrote " << o.output << (all_ok ? " (all combos within 4 std)" : " (FLAGGED combos present)")
              << "\n";
  }
  return 0;
}

// ---- trace ----------------------------------------------------------------

int run_trace(const RunOptions& o, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("--stride must be >= 1");
  const svl::QuadraticProblem problem = resolve_problem(o);
  const auto specs = resolve_algorithms(o);
  const auto schemes = resolve_schemes(o);
  const auto modes = split_csv_list(o.noise_modes);
  if (specs.size() != 1 || schemes.size() != 1 || modes.size() != 1)
    throw std::invalid_argument("trace takes exactly one algorithm, scheme and noise mode");
  if (o.output.empty()) throw std::invalid_argument("trace requires -o/--output");

  std::optional<svl::SoPeriods> periods;
  if (o.period > 0)
    periods = svl::SoPeriods{o.period, o.tail > 0 ? o.tail : o.period / 5};
  auto out = open_output(o.output);
  svl::write_trace_csv(out, problem, specs[0], schemes[0], svl::parse_noise_mode(modes[0]),
                       o.iterations, stride, o.seed, periods);
  if (!out) throw OutputError("write failed: " + o.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stationary iterate variance of SGD/SGDM/SNAG under sampling schemes"};
  app.require_subcommand(1);

  RunOptions gen_opts, theory_opts, sim_opts, cmp_opts, trace_opts;
  std::string gen_output;
  bool theory_json = false;
  std::size_t trace_stride = 0;

  auto* gen = app.add_subcommand("gen", "generate a problem instance JSON file");
  add_problem_flags(gen, gen_opts);
  gen->add_option("-o,--output", gen_output, "output instance file");

  auto* theory = app.add_subcommand("theory", "exact and approximate stationary variances");
  add_problem_flags(theory, theory_opts);
  add_algorithm_flags(theory, theory_opts);
  theory->add_flag("--approx", theory_opts.approx, "also report the leading-order formulas");
  theory->add_option("--delta", theory_opts.delta, "exponent offset for the reshuffling approximation");
  theory->add_option("-o,--output", theory_opts.output, "CSV (or JSON) output file");
  theory->add_flag("--json", theory_json, "write JSON instead of CSV");

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo stationary MSE estimates");
  add_problem_flags(simulate, sim_opts);
  add_algorithm_flags(simulate, sim_opts);
  simulate->add_option("--noise", sim_opts.noise_modes, "comma list of full,zero_order");
  add_trajectory_flags(simulate, sim_opts);
  simulate->add_option("-o,--output", sim_opts.output, "CSV output file");

  auto* compare = app.add_subcommand("compare", "join simulation against theory, flag outliers");
  add_problem_flags(compare, cmp_opts);
  add_algorithm_flags(compare, cmp_opts);
  compare->add_option("--noise", cmp_opts.noise_modes, "comma list of full,zero_order");
  compare->add_flag("--approx", cmp_opts.approx, "include the leading-order column");
  compare->add_option("--delta", cmp_opts.delta, "exponent offset for the reshuffling approximation");
  add_trajectory_flags(compare, cmp_opts);
  compare->add_option("-o,--output", cmp_opts.output, "CSV output file (default stdout)");

  auto* trace = app.add_subcommand("trace", "squared-distance series of a single run");
  add_problem_flags(trace, trace_opts);
  add_algorithm_flags(trace, trace_opts);
  trace->add_option("--noise", trace_opts.noise_modes, "noise mode (full or zero_order)");
  trace->add_option("--iterations", trace_opts.iterations, "iterations to simulate");
  trace->add_option("--stride", trace_stride, "emit one row every stride iterations");
  trace->add_option("--period", trace_opts.period, "shuffle-once period length");
  trace->add_option("--tail", trace_opts.tail, "shuffle-once period tail (informational)");
  trace->add_option("--seed", trace_opts.seed, "seed");
  trace->add_option("-o,--output", trace_opts.output, "trace CSV output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      merge_config(gen, gen_opts);
      return run_gen(gen_opts, gen_output);
    }
    if (theory->parsed()) {
      merge_config(theory, theory_opts);
      return run_theory(theory_opts, theory_json);
    }
    if (simulate->parsed()) {
      apply_long_run(simulate, sim_opts);
      merge_config(simulate, sim_opts);
      return run_simulate(sim_opts);
    }
    if (compare->parsed()) {
      apply_long_run(compare, cmp_opts);
      merge_config(compare, cmp_opts);
      return run_compare(cmp_opts);
    }
    if (trace->parsed()) {
      merge_config(trace, trace_opts);
      return run_trace(trace_opts, trace_stride);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const svl::NotPositiveDefiniteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const svl::InstabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const svl::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const OutputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
