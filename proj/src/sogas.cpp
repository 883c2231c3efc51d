#include "sogas/sogas.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace sogas {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw PreconditionError(msg);
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

int classify(double mean, const FlagParams& params) {
  if (mean >= params.upper) return 1;
  if (mean < params.lower) return 2;
  return 3;
}

// z with P(Z > z) = tail for a standard normal, by bisection on erfc.
double normal_upper_quantile(double tail) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(mid / std::sqrt(2.0)) > tail)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Binary-tree amplitude loader: places mass probs[v] on value v of the
// register starting at base, most significant bit first. Every rotation is
// additionally conditioned on ctrls.
void tree_load(StateVector& state, int base, int width, const std::vector<double>& probs,
               const std::vector<int>& ctrls) {
  const std::size_t cells = probs.size();
  for (int depth = 0; depth < width; ++depth) {
    const int bit = width - 1 - depth;
    const std::size_t prefixes = std::size_t(1) << depth;
    for (std::size_t pre = 0; pre < prefixes; ++pre) {
      double mass0 = 0.0, mass1 = 0.0;
      for (std::size_t v = 0; v < cells; ++v) {
        if ((v >> (bit + 1)) != pre) continue;
        if ((v >> bit) & 1)
          mass1 += probs[v];
        else
          mass0 += probs[v];
      }
      if (mass0 + mass1 <= 0.0) continue;
      const double theta = 2.0 * std::atan2(std::sqrt(mass1), std::sqrt(mass0));
      if (theta == 0.0) continue;
      std::vector<int> controls = ctrls;
      std::vector<int> sandwich;
      for (int d = 0; d < depth; ++d) {
        const int q = base + width - 1 - d;
        controls.push_back(q);
        if (((pre >> (depth - 1 - d)) & 1) == 0) sandwich.push_back(q);
      }
      for (int q : sandwich) apply_gate(state, Gate::x(q));
      apply_gate(state, Gate::ry(base + bit, theta).controlled(controls));
      for (int q : sandwich) apply_gate(state, Gate::x(q));
    }
  }
}

}  // namespace

std::size_t ProblemInstance::best_index() const {
  require(!solutions.empty(), "ProblemInstance: no solutions");
  std::size_t best = 0;
  for (std::size_t i = 1; i < solutions.size(); ++i)
    if (solutions[i].table.exact_mean > solutions[best].table.exact_mean) best = i;
  return best;
}

double ProblemInstance::best_mean() const { return mean(best_index()); }

int ceil_log2_snapped(double x) {
  require(x > 0.0, "ceil_log2_snapped: argument must be positive");
  const double v = std::log2(x);
  const double r = std::round(v);
  if (std::abs(v - r) < 1e-12) return int(r);
  return int(std::ceil(v));
}

int region_iteration_bound(double eps) {
  require(eps > 0.0 && eps < 1.0, "region_iteration_bound: eps must lie in (0, 1)");
  const double v = std::log(2.0 / eps) / std::log(16.0 / 11.0);
  const double r = std::round(v);
  if (std::abs(v - r) < 1e-12) return int(r);
  return int(std::ceil(v));
}

FlagParams make_flag_params(double ell, double eta, double kappa, std::size_t universe) {
  require(std::isfinite(ell), "make_flag_params: ell must be finite");
  require(eta > 0.0, "make_flag_params: eta must be positive");
  require(kappa > 0.0 && kappa < 1.0, "make_flag_params: kappa must lie in (0, 1)");
  require(universe >= 1, "make_flag_params: universe must be nonempty");

  FlagParams p;
  p.ell = ell;
  p.eta = eta;
  p.kappa = kappa;
  p.universe = universe;
  p.m = ceil_log2_snapped(1.0 / (2.0 * eta)) + 2;
  const double cell = std::ldexp(1.0, -p.m);
  if (cell < eta / 4.0 * (1.0 - 1e-9) || cell > eta / 2.0 * (1.0 + 1e-9))
    throw InternalError("make_flag_params: precision cell left the [eta/4, eta/2] window");
  const double u = double(universe);
  p.alpha = kappa * kappa / (4.0 * u * u * u);
  p.qae_eps = cell / 3.0;
  p.lower = ell + eta - 2.0 * cell;
  p.upper = ell + eta - cell;
  p.midpoint = ell + eta - 1.5 * cell;
  return p;
}

std::uint64_t coherent_flag_cost(const FlagParams& params, double c) {
  return contract_qae_cost(params.qae_eps, params.alpha, c);
}

std::size_t FlagAssignment::flagged_count() const {
  std::size_t n = 0;
  for (char f : flags)
    if (f) ++n;
  return n;
}

FlagAssignment flag_oracle(const std::vector<const DiscretizedDistribution*>& sols,
                           const FlagParams& params, const SubroutineBackend& backend,
                           QueryLedger& ledger, std::mt19937_64& rng, Phase phase) {
  require(!sols.empty(), "flag_oracle: no solutions");
  FlagAssignment fa;
  fa.flags.reserve(sols.size());
  fa.estimates.reserve(sols.size());
  fa.truth_class.reserve(sols.size());
  for (const DiscretizedDistribution* d : sols) {
    SolutionOracle oracle = build_oracle(*d);
    double est = clamp01(qae_mean(oracle, params.qae_eps, params.alpha, backend, ledger, rng, phase));
    fa.estimates.push_back(est);
    fa.flags.push_back(est >= params.midpoint ? 1 : 0);
    fa.truth_class.push_back(classify(d->exact_mean, params));
  }
  return fa;
}

FlagAssignment realize_flags_contract(const std::vector<const DiscretizedDistribution*>& sols,
                                      const FlagParams& params, std::mt19937_64& rng) {
  require(!sols.empty(), "realize_flags_contract: no solutions");
  FlagAssignment fa;
  fa.flags.reserve(sols.size());
  fa.estimates.reserve(sols.size());
  fa.truth_class.reserve(sols.size());
  for (const DiscretizedDistribution* d : sols) {
    double est = clamp01(contract_interval_draw(d->exact_mean, params.qae_eps, params.alpha, rng));
    fa.estimates.push_back(est);
    fa.flags.push_back(est >= params.midpoint ? 1 : 0);
    fa.truth_class.push_back(classify(d->exact_mean, params));
  }
  return fa;
}

RegionResult optimal_region(const ProblemInstance& inst, double eps, double delta,
                            const SubroutineBackend& backend, QueryLedger& ledger,
                            std::mt19937_64& rng) {
  require(!inst.solutions.empty(), "optimal_region: instance is empty");
  require(eps > 0.0 && eps < 1.0, "optimal_region: eps must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "optimal_region: delta must lie in (0, 1)");

  const std::size_t n = inst.size();
  const std::size_t universe = n + 1;
  const DiscretizedDistribution aux = point_mass_at_one();
  std::vector<const DiscretizedDistribution*> tables;
  tables.reserve(universe);
  for (const Solution& s : inst.solutions) tables.push_back(&s.table);
  tables.push_back(&aux);

  const int bound = region_iteration_bound(eps);
  RegionResult out;
  Region r;
  int t = 0;
  while (r.width() >= eps / 2.0) {
    if (t >= 2 * bound) throw InternalError("optimal_region: iteration guard tripped");
    const double eta = r.width() / 4.0;
    const double ell = 0.5 * (r.a + r.b);
    const double delta_t = delta / std::ldexp(1.0, t + 1);
    const FlagParams params = make_flag_params(ell, eta, 0.1 * delta_t, universe);

    double r_t = 0.0;
    std::size_t flagged = 0;
    if (backend.mode == BackendMode::Contract) {
      FlagAssignment fa = realize_flags_contract(tables, params, rng);
      fa.flags[n] = 1;  // the auxiliary point mass always clears the window
      flagged = fa.flagged_count();
      FlagProcedure proc;
      for (std::size_t i = 0; i < universe; ++i)
        if (fa.flags[i]) proc.flagged.emplace_back(int(i), 1.0 / double(universe));
      proc.p_label = double(flagged) / double(universe);
      proc.cost_per_call = coherent_flag_cost(params, backend.cost_constant);
      r_t = estimate_proportion(proc, 0.1, delta_t, backend, ledger, rng, Phase::optimal_region);
    } else {
      FlagAssignment fa = flag_oracle(tables, params, backend, ledger, rng, Phase::optimal_region);
      flagged = fa.flagged_count();
      r_t = double(flagged) / double(universe);
    }

    RegionStep step;
    step.t = t;
    step.a = r.a;
    step.b = r.b;
    step.r = r_t;
    step.flagged = flagged;
    if (r_t > 3.0 / (2.0 * double(universe))) {
      step.branch = 1;
      r.a = params.lower;
    } else {
      step.branch = 2;
      r.b = params.upper;
    }
    out.trace.push_back(step);
    ++t;
  }
  out.region = r;
  return out;
}

void write_region_trace_csv(const std::vector<RegionStep>& trace, std::ostream& os) {
  os << "t,a,b,r_t,branch\n";
  char buf[160];
  for (const RegionStep& s : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%d\n", s.t, s.a, s.b, s.r, s.branch);
    os << buf;
  }
}

RunResult sogas_run(const ProblemInstance& inst, const SubroutineBackend& backend,
                    std::mt19937_64& rng) {
  require(inst.size() >= 2, "sogas_run: need at least two solutions");
  require(inst.eps > 0.0 && inst.eps < 1.0, "sogas_run: eps must lie in (0, 1)");
  require(inst.delta > 0.0 && inst.delta < 1.0, "sogas_run: delta must lie in (0, 1)");

  RunResult res;
  RegionResult rr = optimal_region(inst, inst.eps, inst.delta / 2.0, backend, res.ledger, rng);
  res.final_region = rr.region;
  res.trace = std::move(rr.trace);

  const double a = res.final_region.a;
  const double b = res.final_region.b;
  double eta = (b - a) / 4.0;
  if (eta <= 0.0) eta = inst.eps / 8.0;
  const double ell = a - 0.75 * eta;
  const FlagParams params = make_flag_params(ell, eta, 0.01 * inst.delta, inst.size());

  const std::size_t n = inst.size();
  std::vector<const DiscretizedDistribution*> tables;
  tables.reserve(n);
  for (const Solution& s : inst.solutions) tables.push_back(&s.table);

  if (backend.mode == BackendMode::Contract) {
    const FlagAssignment fa = realize_flags_contract(tables, params, rng);
    const std::uint64_t flag_cost = coherent_flag_cost(params, backend.cost_constant);
    if (fa.flagged_count() == 0) {
      // Nothing carries the flag; amplification returns an arbitrary element.
      // The schedule is still sized against the guaranteed mass floor.
      const double p_floor = (1.0 - 2.0 * params.kappa) / double(n);
      res.ledger.charge(Phase::amplify, contract_amplify_cost(flag_cost, p_floor, inst.delta / 2.0,
                                                              backend.cost_constant));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      res.selected = inst.solutions[pick(rng)].id;
    } else {
      FlagProcedure proc;
      for (std::size_t i = 0; i < n; ++i)
        if (fa.flags[i]) proc.flagged.emplace_back(inst.solutions[i].id, 1.0 / double(n));
      proc.p_label = double(fa.flagged_count()) / double(n);
      proc.cost_per_call = flag_cost;
      res.selected = amplify(proc, inst.delta / 2.0, backend, res.ledger, rng, Phase::amplify);
    }
  } else {
    const FlagAssignment fa = flag_oracle(tables, params, backend, res.ledger, rng, Phase::flag_qae);
    std::vector<int> ids;
    for (std::size_t i = 0; i < n; ++i)
      if (fa.flags[i]) ids.push_back(inst.solutions[i].id);
    if (ids.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      res.selected = inst.solutions[pick(rng)].id;
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
      res.selected = ids[pick(rng)];
    }
  }

  double selected_mean = -1.0;
  for (const Solution& s : inst.solutions)
    if (s.id == res.selected) {
      selected_mean = s.table.exact_mean;
      break;
    }
  res.correct =
      selected_mean >= 0.0 && inst.best_mean() - selected_mean <= inst.eps + 1e-12;
  return res;
}

DemoResult coherent_flag_demo(const ProblemInstance& inst, const FlagParams& params) {
  const std::size_t n = inst.size();
  require(n >= 1 && n <= 4, "coherent_flag_demo: at most four solutions");
  int kmax = 1;
  for (const Solution& s : inst.solutions) {
    require(s.table.k <= 2, "coherent_flag_demo: noise registers wider than two qubits");
    kmax = std::max(kmax, s.table.k);
  }

  const int xw = (n <= 1) ? 1 : ceil_log2_snapped(double(n));
  const int pw = ceil_log2_snapped(3.0 * std::ldexp(1.0, params.m)) + 1;
  QubitLayout layout({{"X", xw},
                      {"XI", kmax},
                      {"Y", 1},
                      {"A", 1},
                      {"P", pw},
                      {"F", 1}});
  StateVector state(layout);

  const int x_base = layout.base("X");
  const int xi_base = layout.base("XI");
  const int y_qubit = layout.base("Y");
  const int a_qubit = layout.base("A");
  const int p_base = layout.base("P");
  const int f_qubit = layout.base("F");

  // uniform superposition over the first n values of X
  {
    std::vector<double> weights(std::size_t(1) << xw, 0.0);
    for (std::size_t v = 0; v < n; ++v) weights[v] = 1.0 / double(n);
    tree_load(state, x_base, xw, weights, {});
  }

  // estimator outcome distribution: normal around the exact mean, truncated
  // to [0,1], with tail mass exactly alpha outside the promised window
  const double z = normal_upper_quantile(params.alpha / 2.0);
  const double sd = params.qae_eps / z;
  const std::size_t cells = std::size_t(1) << pw;
  const double scale = double(cells);

  std::vector<int> xq;
  for (int bq = 0; bq < xw; ++bq) xq.push_back(x_base + bq);

  for (std::size_t v = 0; v < n; ++v) {
    std::vector<int> zeros;
    for (int bq = 0; bq < xw; ++bq)
      if (((v >> bq) & 1) == 0) zeros.push_back(x_base + bq);

    PerformanceDistribution model =
        PerformanceDistribution::truncated_gaussian(inst.mean(v), sd);
    std::vector<double> probs(cells, 0.0);
    double total = 0.0;
    for (std::size_t g = 0; g < cells; ++g) {
      double mass = model.mass_below(double(g + 1) / scale) - model.mass_below(double(g) / scale);
      probs[g] = std::max(0.0, mass);
      total += probs[g];
    }
    for (double& m : probs) m /= total;

    SolutionOracle oracle = build_oracle(inst.solutions[v].table);
    for (int q : zeros) apply_gate(state, Gate::x(q));
    oracle.apply_prep(state, xi_base, y_qubit, xq);
    tree_load(state, p_base, pw, probs, xq);
    for (int q : zeros) apply_gate(state, Gate::x(q));
  }

  // comparison: raise A whenever the estimate cell sits at or above the
  // window midpoint, then copy onto the flag qubit
  std::size_t gstar = cells;
  {
    const double raw = params.midpoint * scale - 0.5;
    if (raw <= 0.0)
      gstar = 0;
    else if (raw < double(cells))
      gstar = std::size_t(std::ceil(raw - 1e-9));
  }
  std::vector<int> pq;
  for (int bq = 0; bq < pw; ++bq) pq.push_back(p_base + bq);
  for (std::size_t g = gstar; g < cells; ++g) {
    std::vector<int> zeros;
    for (int bq = 0; bq < pw; ++bq)
      if (((g >> bq) & 1) == 0) zeros.push_back(p_base + bq);
    for (int q : zeros) apply_gate(state, Gate::x(q));
    apply_gate(state, Gate::x(a_qubit).controlled(pq));
    for (int q : zeros) apply_gate(state, Gate::x(q));
  }
  apply_gate(state, Gate::x(f_qubit).controlled({a_qubit}));
  state.require_normalized();

  const double p_label =
      subspace_probability(state, "F", [](std::uint64_t fv) { return fv == 1; });

  std::vector<double> joint(n, 0.0);
  const std::vector<cplx>& amps = state.amps();
  for (std::size_t idx = 0; idx < amps.size(); ++idx) {
    const double w = std::norm(amps[idx]);
    if (w == 0.0) continue;
    if (layout.register_value(idx, "F") != 1) continue;
    const std::uint64_t xv = layout.register_value(idx, "X");
    if (xv < n) joint[xv] += w;
  }

  std::vector<double> mass(n, 0.0);
  double q_label = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    mass[v] = joint[v] * double(n);
    switch (classify(inst.mean(v), params)) {
      case 1: q_label += 1.0; break;
      case 3: q_label += mass[v]; break;
      default: break;
    }
  }
  q_label /= double(n);

  const double bound = 2.0 * params.kappa / double(n);
  return DemoResult{p_label, q_label, bound, std::move(mass), std::move(state)};
}

}  // namespace sogas
