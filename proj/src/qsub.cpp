#include "sogas/qsub.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sogas {

namespace {

void require_unit_interval(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0))
    throw PreconditionError(std::string(what) + " must lie strictly inside (0, 1)");
}

std::uint64_t ceil_charge(double v) {
  if (!(v >= 0.0)) throw PreconditionError("charge formula produced a negative value");
  double r = std::round(v);
  if (std::abs(v - r) < 1e-9) return std::uint64_t(r);
  return std::uint64_t(std::ceil(v));
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Exact success probability of the flag register after j Grover iterations of
// the given circuit, via direct statevector replay.
double circuit_prob_at_power(const FlagProcedure::Circuit& c, std::uint64_t j) {
  StateVector s(c.layout);
  c.apply(s);
  const int fb = c.layout.base(c.flag_reg);
  const int fw = c.layout.width(c.flag_reg);
  const std::uint64_t fmask = (std::uint64_t{1} << fw) - 1;
  auto good = [fb, fmask](std::uint64_t idx) { return ((idx >> fb) & fmask) == 1; };
  for (std::uint64_t i = 0; i < j; ++i) {
    apply_gate(s, Gate::phase_flip(good));
    c.apply_inverse(s);
    apply_gate(s, Gate::phase_flip([](std::uint64_t idx) { return idx == 0; }));
    c.apply(s);
  }
  return subspace_probability(s, c.flag_reg, [](std::uint64_t v) { return v == 1; });
}

struct PowerSchedule {
  std::uint64_t k = 0;
  bool upper_half = true;
};

// Largest Grover power K = 4k+2 that keeps the scaled confidence interval
// inside one half-plane of the unit circle and grows by at least 2x.
PowerSchedule find_next_power(const PowerSchedule& cur, double theta_l, double theta_u) {
  const std::uint64_t k_cur = 4 * cur.k + 2;
  const double width = theta_u - theta_l;
  if (!(width > 0.0)) return cur;
  double cap = std::floor(M_PI / width);
  if (cap < 2.0 || cap > 1e17) cap = std::min(cap, 1e17);
  if (cap < 2.0) return cur;
  std::uint64_t K = std::uint64_t(cap);
  K -= (K - 2) % 4;
  while (double(K) >= 2.0 * double(k_cur)) {
    double q_l = std::fmod(double(K) * theta_l, 2.0 * M_PI);
    double q_u = std::fmod(double(K) * theta_u, 2.0 * M_PI);
    if (q_u >= q_l) {
      if (q_u <= M_PI) return {(K - 2) / 4, true};
      if (q_l >= M_PI) return {(K - 2) / 4, false};
    }
    K -= 4;
  }
  return cur;
}

}  // namespace

void QueryLedger::charge(Phase phase, std::uint64_t n) {
  counts_[std::size_t(phase)] += n;
}

std::uint64_t QueryLedger::count(Phase phase) const { return counts_[std::size_t(phase)]; }

std::uint64_t QueryLedger::total() const {
  std::uint64_t acc = 0;
  for (auto c : counts_) acc += c;
  return acc;
}

std::uint64_t contract_qae_cost(double eps, double delta, double c) {
  require_unit_interval(eps, "eps");
  require_unit_interval(delta, "delta");
  if (!(c > 0.0)) throw PreconditionError("cost constant must be positive");
  return ceil_charge(c * (1.0 / eps) * std::log(1.0 / delta));
}

std::uint64_t contract_amplify_cost(std::uint64_t flag_cost, double p_label, double delta,
                                    double c) {
  require_unit_interval(delta, "delta");
  if (!(p_label > 0.0)) throw PreconditionError("label mass must be positive");
  if (!(c > 0.0)) throw PreconditionError("cost constant must be positive");
  return ceil_charge(c * double(flag_cost) / std::sqrt(p_label) * std::log(1.0 / delta));
}

std::uint64_t contract_proportion_cost(std::uint64_t flag_cost, double rel_eps, double p_label,
                                       double delta, double c) {
  require_unit_interval(rel_eps, "rel_eps");
  require_unit_interval(delta, "delta");
  if (!(p_label > 0.0)) throw PreconditionError("label mass must be positive");
  if (!(c > 0.0)) throw PreconditionError("cost constant must be positive");
  return ceil_charge(c * double(flag_cost) / (rel_eps * std::sqrt(p_label)) *
                     std::log(1.0 / delta));
}

double contract_interval_draw(double truth, double eps, double delta, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (uni(rng) < delta) return uni(rng);
  double lo = clamp01(truth - eps);
  double hi = clamp01(truth + eps);
  return lo + (hi - lo) * uni(rng);
}

double contract_relative_draw(double truth, double rel_eps, double delta, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (uni(rng) < delta) return uni(rng);
  double lo = clamp01(truth * (1.0 - rel_eps));
  double hi = clamp01(truth * (1.0 + rel_eps));
  return lo + (hi - lo) * uni(rng);
}

IqaeOutcome iterative_amplitude_estimation(
    const std::function<double(std::uint64_t)>& prob_at_power, const IqaeOptions& opt,
    std::mt19937_64& rng) {
  const bool additive = opt.eps_additive > 0.0;
  if (additive == (opt.rel_eps > 0.0))
    throw PreconditionError("exactly one of eps_additive and rel_eps must be positive");
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0))
    throw PreconditionError("alpha must lie strictly inside (0, 1)");
  if (opt.shots_per_round <= 0) throw PreconditionError("shots_per_round must be positive");

  // Round budget entering the Chernoff union bound: the number of distinct
  // power levels needed before the interval closes.
  const double T = additive
                       ? std::max(1.0, std::ceil(std::log2(M_PI / (8.0 * opt.eps_additive))))
                       : 32.0;
  const double log_term = std::log(2.0 * T / opt.alpha);

  double theta_l = 0.0;
  double theta_u = M_PI / 2.0;
  PowerSchedule sched;
  std::uint64_t pooled_shots = 0, pooled_hits = 0;
  std::uint64_t oracle_calls = 0;
  std::map<std::uint64_t, double> prob_memo;

  const int max_rounds = 10000;
  for (int round = 0; round < max_rounds; ++round) {
    double a_l = std::sin(theta_l) * std::sin(theta_l);
    double a_u = std::sin(theta_u) * std::sin(theta_u);
    if (additive) {
      if (a_u - a_l <= 2.0 * opt.eps_additive)
        return {0.5 * (a_l + a_u), oracle_calls};
    } else {
      if (a_l > 0.0 && a_u - a_l <= 2.0 * opt.rel_eps * a_l)
        return {0.5 * (a_l + a_u), oracle_calls};
    }

    PowerSchedule next = find_next_power(sched, theta_l, theta_u);
    if (next.k != sched.k) {
      pooled_shots = 0;
      pooled_hits = 0;
      sched = next;
    }

    auto it = prob_memo.find(sched.k);
    if (it == prob_memo.end())
      it = prob_memo.emplace(sched.k, clamp01(prob_at_power(sched.k))).first;
    std::binomial_distribution<std::uint64_t> shot(std::uint64_t(opt.shots_per_round),
                                                   it->second);
    pooled_hits += shot(rng);
    pooled_shots += std::uint64_t(opt.shots_per_round);
    oracle_calls += std::uint64_t(opt.shots_per_round) * (2 * sched.k + 1);

    double a_hat = double(pooled_hits) / double(pooled_shots);
    double eps_a = std::sqrt(log_term / (2.0 * double(pooled_shots)));
    double p_min = clamp01(a_hat - eps_a);
    double p_max = clamp01(a_hat + eps_a);

    const double K = 4.0 * double(sched.k) + 2.0;
    double w_l, w_u;
    if (sched.upper_half) {
      w_l = std::acos(std::clamp(1.0 - 2.0 * p_min, -1.0, 1.0));
      w_u = std::acos(std::clamp(1.0 - 2.0 * p_max, -1.0, 1.0));
    } else {
      w_l = 2.0 * M_PI - std::acos(std::clamp(1.0 - 2.0 * p_max, -1.0, 1.0));
      w_u = 2.0 * M_PI - std::acos(std::clamp(1.0 - 2.0 * p_min, -1.0, 1.0));
    }
    double turns = std::floor(K * theta_l / (2.0 * M_PI) + 1e-12);
    double cand_l = (2.0 * M_PI * turns + w_l) / K;
    double cand_u = (2.0 * M_PI * turns + w_u) / K;
    theta_l = std::max(theta_l, cand_l);
    theta_u = std::min(theta_u, cand_u);
    if (theta_u < theta_l) std::swap(theta_l, theta_u);
  }
  throw InternalError("amplitude estimation failed to converge");
}

double qae_mean(const SolutionOracle& oracle, double eps, double delta,
                const SubroutineBackend& backend, QueryLedger& ledger, std::mt19937_64& rng,
                Phase phase) {
  require_unit_interval(eps, "eps");
  require_unit_interval(delta, "delta");

  if (backend.mode == BackendMode::Contract) {
    ledger.charge(phase, contract_qae_cost(eps, delta, backend.cost_constant));
    return contract_interval_draw(oracle.table.exact_mean, eps, delta, rng);
  }

  const int k = oracle.table.k;
  QubitLayout layout({{"XI", k}, {"Y", 1}});
  auto prob = [&oracle, &layout, k](std::uint64_t power) {
    StateVector s(layout);
    oracle.apply_prep(s, 0, k);
    auto good = [k](std::uint64_t idx) { return ((idx >> k) & 1) == 1; };
    for (std::uint64_t i = 0; i < power; ++i) {
      apply_gate(s, Gate::phase_flip(good));
      oracle.apply_prep_inverse(s, 0, k);
      apply_gate(s, Gate::phase_flip([](std::uint64_t idx) { return idx == 0; }));
      oracle.apply_prep(s, 0, k);
    }
    return subspace_probability(s, "Y", [](std::uint64_t v) { return v == 1; });
  };

  IqaeOptions opt;
  opt.eps_additive = eps;
  opt.alpha = delta;
  opt.shots_per_round = backend.shots_per_round;
  IqaeOutcome out = iterative_amplitude_estimation(prob, opt, rng);
  ledger.charge(phase, out.oracle_calls);
  return out.estimate;
}

int amplify(const FlagProcedure& proc, double delta, const SubroutineBackend& backend,
            QueryLedger& ledger, std::mt19937_64& rng, Phase phase) {
  require_unit_interval(delta, "delta");
  if (proc.flagged.empty() || !(proc.p_label > 0.0))
    throw PreconditionError("amplify requires a nonempty flagged set");

  if (backend.mode == BackendMode::Contract) {
    ledger.charge(phase, contract_amplify_cost(proc.cost_per_call, proc.p_label, delta,
                                               backend.cost_constant));
    double total = 0.0;
    for (const auto& [elem, mass] : proc.flagged) total += mass;
    std::uniform_real_distribution<double> uni(0.0, total);
    double u = uni(rng);
    double acc = 0.0;
    for (const auto& [elem, mass] : proc.flagged) {
      acc += mass;
      if (u < acc) return elem;
    }
    return proc.flagged.back().first;
  }

  if (!proc.circuit) throw PreconditionError("statevector amplify requires a circuit");
  const auto& c = *proc.circuit;
  const int max_rounds = 10000;
  double power_cap = 1.0;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int round = 0; round < max_rounds; ++round) {
    std::uint64_t max_power = std::uint64_t(std::ceil(power_cap));
    std::uint64_t j = std::uint64_t(uni(rng) * double(max_power));
    if (j >= max_power) j = max_power - 1;

    StateVector s(c.layout);
    c.apply(s);
    ledger.charge(phase, proc.cost_per_call);
    const int fb = c.layout.base(c.flag_reg);
    const int fw = c.layout.width(c.flag_reg);
    const std::uint64_t fmask = (std::uint64_t{1} << fw) - 1;
    auto good = [fb, fmask](std::uint64_t idx) { return ((idx >> fb) & fmask) == 1; };
    for (std::uint64_t i = 0; i < j; ++i) {
      apply_gate(s, Gate::phase_flip(good));
      c.apply_inverse(s);
      apply_gate(s, Gate::phase_flip([](std::uint64_t idx) { return idx == 0; }));
      c.apply(s);
    }
    ledger.charge(phase, proc.cost_per_call * 2 * j);

    if (measure_register(s, c.flag_reg, rng) == 1)
      return int(measure_register(s, c.element_reg, rng));
    power_cap *= 1.5;
  }
  throw InternalError("amplification failed to find a flagged element");
}

double estimate_proportion(const FlagProcedure& proc, double rel_eps, double delta,
                           const SubroutineBackend& backend, QueryLedger& ledger,
                           std::mt19937_64& rng, Phase phase) {
  require_unit_interval(rel_eps, "rel_eps");
  require_unit_interval(delta, "delta");
  if (!(proc.p_label > 0.0))
    throw PreconditionError("proportion estimate requires positive label mass");

  if (backend.mode == BackendMode::Contract) {
    ledger.charge(phase, contract_proportion_cost(proc.cost_per_call, rel_eps, proc.p_label,
                                                  delta, backend.cost_constant));
    return contract_relative_draw(proc.p_label, rel_eps, delta, rng);
  }

  if (!proc.circuit) throw PreconditionError("statevector estimation requires a circuit");
  const auto& c = *proc.circuit;
  auto prob = [&c](std::uint64_t power) { return circuit_prob_at_power(c, power); };
  IqaeOptions opt;
  opt.rel_eps = rel_eps;
  opt.alpha = delta;
  opt.shots_per_round = backend.shots_per_round;
  IqaeOutcome out = iterative_amplitude_estimation(prob, opt, rng);
  ledger.charge(phase, out.oracle_calls * proc.cost_per_call);
  return out.estimate;
}

}  // namespace sogas
