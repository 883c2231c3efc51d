#include "sogas/csogas.hpp"

#include <algorithm>
#include <cmath>

namespace sogas {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw PreconditionError(msg);
}

std::uint64_t ceil_snapped(double x) {
  const double c = std::ceil(x - 1e-9);
  return c <= 0.0 ? 0 : std::uint64_t(c);
}

// all mass on the end points 0 and 1, so batches can be drawn binomially
bool is_two_point(const DiscretizedDistribution& d) {
  if (d.points.size() < 2) return false;
  if (d.points.front() != 0.0 || d.points.back() != 1.0) return false;
  for (std::size_t i = 1; i + 1 < d.probs.size(); ++i)
    if (d.probs[i] > 0.0) return false;
  return true;
}

void validate_config(const ClassicalEstimatorConfig& cfg) {
  require(cfg.min_fraction > 0.0 && cfg.min_fraction <= 1.0,
          "classical_mean: min_fraction must lie in (0, 1]");
  require(cfg.batch_size >= 1, "classical_mean: batch_size must be positive");
  require(cfg.variance_slack > 0.0, "classical_mean: variance_slack must be positive");
}

}  // namespace

std::uint64_t hoeffding_cap(double eps, double delta) {
  require(eps > 0.0 && eps < 1.0, "hoeffding_cap: eps must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "hoeffding_cap: delta must lie in (0, 1)");
  return ceil_snapped(std::log(2.0 / delta) / (2.0 * eps * eps));
}

double classical_mean(const DiscretizedDistribution& d, double eps, double delta,
                      const ClassicalEstimatorConfig& cfg, QueryLedger& ledger,
                      std::mt19937_64& rng) {
  require(eps > 0.0 && eps < 1.0, "classical_mean: eps must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "classical_mean: delta must lie in (0, 1)");
  validate_config(cfg);

  const std::uint64_t cap = hoeffding_cap(eps, delta);
  std::uint64_t n0 = ceil_snapped(cfg.min_fraction * double(cap));
  n0 = std::max<std::uint64_t>(1, std::min(n0, cap));

  // stop once slack * sqrt(2 s^2 ln(3/delta) / n) <= eps, i.e. once
  // n >= s^2 * 2 slack^2 ln(3/delta) / eps^2
  const double need_per_var =
      2.0 * cfg.variance_slack * cfg.variance_slack * std::log(3.0 / delta) / (eps * eps);
  const std::uint64_t bsize = std::uint64_t(cfg.batch_size);

  std::uint64_t n = 0;
  double mean = 0.0;

  if (is_two_point(d)) {
    const double p = d.probs.back();
    std::uint64_t ones = 0;
    auto draw = [&](std::uint64_t count) {
      if (p >= 1.0) {
        ones += count;
      } else if (p > 0.0) {
        std::binomial_distribution<std::uint64_t> binom(count, p);
        ones += binom(rng);
      }
      n += count;
    };
    draw(n0);
    mean = double(ones) / double(n);
    double s2 = mean * (1.0 - mean);
    if (p > 0.0 && p < 1.0) {
      std::binomial_distribution<std::uint64_t> batch(bsize, p);
      while (n < cap && double(n) < s2 * need_per_var) {
        const std::uint64_t want = std::min(bsize, cap - n);
        if (want == bsize)
          ones += batch(rng);
        else {
          std::binomial_distribution<std::uint64_t> tail(want, p);
          ones += tail(rng);
        }
        n += want;
        mean = double(ones) / double(n);
        s2 = mean * (1.0 - mean);
      }
    }
  } else {
    double sum = 0.0, sumsq = 0.0;
    auto draw = [&](std::uint64_t count) {
      for (std::uint64_t i = 0; i < count; ++i) {
        const double y = sample_classical(d, rng);
        sum += y;
        sumsq += y * y;
      }
      n += count;
    };
    draw(n0);
    mean = sum / double(n);
    double s2 = std::max(0.0, sumsq / double(n) - mean * mean);
    while (n < cap && double(n) < s2 * need_per_var) {
      draw(std::min(bsize, cap - n));
      mean = sum / double(n);
      s2 = std::max(0.0, sumsq / double(n) - mean * mean);
    }
  }

  ledger.charge(Phase::classical_sampling, n);
  return mean;
}

RegionResult csogas_region(const ProblemInstance& inst, double eps, double delta,
                           const ClassicalEstimatorConfig& cfg, QueryLedger& ledger,
                           std::mt19937_64& rng) {
  require(!inst.solutions.empty(), "csogas_region: instance is empty");
  require(eps > 0.0 && eps < 1.0, "csogas_region: eps must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "csogas_region: delta must lie in (0, 1)");
  validate_config(cfg);

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
    if (t >= 2 * bound) throw InternalError("csogas_region: iteration guard tripped");
    const double eta = r.width() / 4.0;
    const double ell = 0.5 * (r.a + r.b);
    const double delta_t = delta / std::ldexp(1.0, t + 1);
    const FlagParams params = make_flag_params(ell, eta, 0.1 * delta_t, universe);

    std::size_t flagged = 0;
    for (const DiscretizedDistribution* table : tables) {
      const double est = classical_mean(*table, params.qae_eps, params.alpha, cfg, ledger, rng);
      if (est >= params.midpoint) ++flagged;
    }
    if (cfg.charge_flag_counting) ledger.charge(Phase::proportion_estimate, universe);
    const double r_t = double(flagged) / double(universe);

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

int csogas_select(const ProblemInstance& inst, const Region& region, double eps, double delta,
                  const ClassicalEstimatorConfig& cfg, QueryLedger& ledger, std::mt19937_64& rng) {
  require(!inst.solutions.empty(), "csogas_select: instance is empty");
  require(eps > 0.0 && eps < 1.0, "csogas_select: eps must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "csogas_select: delta must lie in (0, 1)");
  validate_config(cfg);

  double base_eta = region.width() / 4.0;
  if (base_eta <= 0.0) base_eta = eps / 8.0;

  for (int attempt = 0; attempt < 2; ++attempt) {
    const double eta = attempt == 0 ? base_eta : 2.0 * base_eta;
    const FlagParams params =
        make_flag_params(region.a - 0.75 * eta, eta, 0.01 * delta, inst.size());
    std::vector<int> ids;
    for (const Solution& s : inst.solutions) {
      const double est = classical_mean(s.table, params.qae_eps, params.alpha, cfg, ledger, rng);
      if (est >= params.midpoint) ids.push_back(s.id);
    }
    if (!ids.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
      return ids[pick(rng)];
    }
  }
  return -1;
}

RunResult csogas_run(const ProblemInstance& inst, const ClassicalEstimatorConfig& cfg,
                     std::mt19937_64& rng) {
  require(inst.size() >= 2, "csogas_run: need at least two solutions");
  require(inst.eps > 0.0 && inst.eps < 1.0, "csogas_run: eps must lie in (0, 1)");
  require(inst.delta > 0.0 && inst.delta < 1.0, "csogas_run: delta must lie in (0, 1)");

  RunResult res;
  RegionResult rr = csogas_region(inst, inst.eps, inst.delta / 2.0, cfg, res.ledger, rng);
  res.final_region = rr.region;
  res.trace = std::move(rr.trace);
  res.selected = csogas_select(inst, res.final_region, inst.eps, inst.delta, cfg, res.ledger, rng);

  if (res.selected >= 0) {
    double selected_mean = -1.0;
    for (const Solution& s : inst.solutions)
      if (s.id == res.selected) {
        selected_mean = s.table.exact_mean;
        break;
      }
    res.correct =
        selected_mean >= 0.0 && inst.best_mean() - selected_mean <= inst.eps + 1e-12;
  }
  return res;
}

}  // namespace sogas
