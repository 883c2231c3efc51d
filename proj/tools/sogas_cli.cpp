// Command-line front end: query-complexity sweeps, single-instance solves,
// and a small statevector Grover demonstration.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sogas/harness.hpp"
#include "sogas/qcore.hpp"

namespace {

std::size_t parse_size(const std::string& s) {
  try {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(s, &pos);
    if (pos != s.size() || v < 2) throw std::invalid_argument(s);
    return std::size_t(v);
  } catch (const std::exception&) {
    throw sogas::PreconditionError("expected an integer >= 2, got '" + s + "'");
  }
}

void print_rows(const std::vector<sogas::ExperimentRow>& rows) {
  std::printf("%-8s %-14s %14s %12s %8s\n", "method", "value", "mean_queries", "ci95", "pcs");
  for (const sogas::ExperimentRow& r : rows)
    std::printf("%-8s %-14s %14.1f %12.1f %8.3f\n", r.method.c_str(), r.sweep_value.c_str(),
                r.mean_queries, r.ci95, r.pcs);
}

int run_command(const std::string& sweep_name, const std::vector<std::string>& values,
                const std::string& family, std::size_t size, double eps, double delta, int reps,
                std::uint64_t seed, const std::string& backend, double cost_constant,
                const std::string& csv_path, const std::string& plot_path,
                const std::string& trace_path) {
  sogas::ExperimentConfig cfg;
  cfg.family = sogas::family_from_string(family);
  cfg.size = size;
  cfg.eps = eps;
  cfg.delta = delta;
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.cost_constant = cost_constant;
  cfg.backend =
      backend == "statevector-hybrid" ? sogas::BackendMode::Statevector : sogas::BackendMode::Contract;

  if (sweep_name == "size") {
    cfg.sweep = sogas::SweepKind::Size;
    if (!values.empty()) {
      cfg.sizes.clear();
      for (const std::string& v : values) cfg.sizes.push_back(parse_size(v));
    }
  } else if (sweep_name == "gap") {
    cfg.sweep = sogas::SweepKind::Gap;
    if (!values.empty()) {
      cfg.inverse_gaps.clear();
      for (const std::string& v : values) cfg.inverse_gaps.push_back(int(parse_size(v)));
    }
  } else if (sweep_name == "distribution") {
    cfg.sweep = sogas::SweepKind::Distribution;
    if (!values.empty()) {
      cfg.families.clear();
      for (const std::string& v : values) cfg.families.push_back(sogas::family_from_string(v));
    }
  } else {
    cfg.sweep = sogas::SweepKind::Single;
    if (!values.empty()) cfg.size = parse_size(values.front());
  }

  const std::vector<sogas::ExperimentRow> rows = sogas::run_sweep(cfg);
  print_rows(rows);
  if (!csv_path.empty()) {
    sogas::emit_csv(rows, csv_path);
    std::printf("wrote %s\n", csv_path.c_str());
  }
  if (!plot_path.empty()) {
    sogas::emit_plot(rows, cfg, plot_path);
    std::printf("wrote %s\n", plot_path.c_str());
  }

  if (!trace_path.empty()) {
    // one seeded run on the first sweep cell, region trajectory only
    sogas::Family f = cfg.family;
    std::size_t n = cfg.size;
    double cell_eps = cfg.eps;
    if (cfg.sweep == sogas::SweepKind::Size)
      n = cfg.sizes.front();
    else if (cfg.sweep == sogas::SweepKind::Gap)
      cell_eps = 1.0 / double(cfg.inverse_gaps.front());
    else if (cfg.sweep == sogas::SweepKind::Distribution)
      f = cfg.families.front();
    sogas::ProblemInstance inst = sogas::generate_instance(
        f, n, sogas::instance_seed(cfg.seed, sogas::family_name(f), n), cell_eps, cfg.delta,
        cfg.generator);
    std::mt19937_64 rng(sogas::replication_seed(cfg.seed, "TRACE", "0", 0));
    sogas::SubroutineBackend be;
    be.mode = cfg.backend;
    be.cost_constant = cfg.cost_constant;
    be.shots_per_round = cfg.shots_per_round;
    const sogas::RunResult res = sogas::sogas_run(inst, be, rng);
    std::ofstream out(trace_path);
    if (!out.good()) throw sogas::PreconditionError("cannot write " + trace_path);
    sogas::write_region_trace_csv(res.trace, out);
    std::printf("wrote %s\n", trace_path.c_str());
  }
  return 0;
}

int solve_command(const std::string& instance_path, double eps, double delta,
                  const std::string& method, std::uint64_t seed) {
  const std::vector<sogas::RawSolution> raw = sogas::read_instance_file(instance_path);
  const sogas::ProblemInstance inst = sogas::instantiate(raw, eps, delta);
  std::mt19937_64 rng(seed);

  sogas::RunResult res;
  if (method == "sogas") {
    sogas::SubroutineBackend backend;
    res = sogas::sogas_run(inst, backend, rng);
  } else {
    res = sogas::csogas_run(inst, sogas::ClassicalEstimatorConfig{}, rng);
  }

  std::printf("method: %s\n", method.c_str());
  if (res.selected >= 0)
    std::printf("selected: %d\n", inst.solutions[std::size_t(res.selected)].id);
  else
    std::printf("selected: none\n");
  std::printf("final region: [%.6f, %.6f]\n", res.final_region.a, res.final_region.b);
  std::printf("total queries: %llu\n", static_cast<unsigned long long>(res.ledger.total()));
  return 0;
}

int demo_command(std::uint64_t n) {
  if (n < 2 || (n & (n - 1)) != 0 || n > (1ull << 20))
    throw sogas::PreconditionError("--grover expects a power of two in [2, 2^20]");
  int width = 0;
  while ((1ull << width) < n) ++width;

  const std::uint64_t marked = n - 1;
  sogas::QubitLayout layout({{"X", width}});
  sogas::StateVector state = sogas::uniform_superposition(layout, "X");

  const int iterations =
      std::max(1, int(std::floor(M_PI / (4.0 * std::asin(1.0 / std::sqrt(double(n)))))));
  for (int i = 0; i < iterations; ++i) {
    sogas::apply_gate(state, sogas::Gate::phase_flip(
                                 [marked](std::uint64_t v) { return v == marked; }));
    sogas::grover_diffusion(state, "X");
  }
  const double prob =
      sogas::subspace_probability(state, "X", [marked](std::uint64_t v) { return v == marked; });
  std::printf("grover search: N=%llu, marked=%llu, iterations=%d\n",
              static_cast<unsigned long long>(n), static_cast<unsigned long long>(marked),
              iterations);
  std::printf("success probability: %.12f\n", prob);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete simulation optimization with amplified search"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a query-complexity sweep over both methods");
  std::string sweep = "size";
  std::vector<std::string> values;
  std::string family = "bernoulli";
  std::size_t size = 10;
  double eps = 0.1, delta = 0.05, cost_constant = 1.0;
  int reps = 30;
  std::uint64_t seed = 1;
  std::string backend = "contract";
  std::string csv_path, plot_path, trace_path;
  run->add_option("--sweep", sweep, "sweep kind")
      ->check(CLI::IsMember({"size", "gap", "distribution", "single"}));
  run->add_option("--values", values,
                  "sweep values: sizes, inverse gaps, or family names depending on --sweep");
  run->add_option("--family", family, "instance family for size/gap/single sweeps")
      ->check(CLI::IsMember({"bernoulli", "gaussian", "uniform", "exponential"}));
  run->add_option("--size", size, "instance size for gap/distribution/single sweeps");
  run->add_option("--epsilon", eps, "optimality gap tolerance");
  run->add_option("--delta", delta, "overall risk level");
  run->add_option("--reps", reps, "replications per cell");
  run->add_option("--seed", seed, "base seed");
  run->add_option("--backend", backend, "subroutine backend")
      ->check(CLI::IsMember({"contract", "statevector-hybrid"}));
  run->add_option("--cost-constant", cost_constant, "query-cost constant c");
  run->add_option("--csv", csv_path, "write aggregated rows to this CSV file");
  run->add_option("--plot", plot_path, "write an SVG chart (plus .dat companion) here");
  run->add_option("--trace", trace_path, "write one seeded run's region trajectory CSV here");

  auto* solve = app.add_subcommand("solve", "Solve a single instance file");
  std::string instance_path, method = "sogas";
  double s_eps = 0.1, s_delta = 0.05;
  std::uint64_t s_seed = 1;
  solve->add_option("--instance", instance_path, "instance file: lines `id kind p1 [p2]`")
      ->required();
  solve->add_option("--epsilon", s_eps, "optimality gap tolerance");
  solve->add_option("--delta", s_delta, "overall risk level");
  solve->add_option("--method", method, "solver")->check(CLI::IsMember({"sogas", "csogas"}));
  solve->add_option("--seed", s_seed, "seed");

  auto* demo = app.add_subcommand("demo", "Statevector search demonstration");
  std::uint64_t grover_n = 4;
  demo->add_option("--grover", grover_n, "search space size (power of two)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run)
      return run_command(sweep, values, family, size, eps, delta, reps, seed, backend,
                         cost_constant, csv_path, plot_path, trace_path);
    if (*solve) return solve_command(instance_path, s_eps, s_delta, method, s_seed);
    if (*demo) return demo_command(grover_n);
    return 1;
  } catch (const sogas::PreconditionError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const sogas::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
}
