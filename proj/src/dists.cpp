#include "sogas/dists.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sogas {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

// Mass of the standard normal between the truncation bounds, in z units.
double gaussian_window(double center, double sd, double& z_lo, double& z_hi) {
  z_lo = (0.0 - center) / sd;
  z_hi = (1.0 - center) / sd;
  return normal_cdf(z_hi) - normal_cdf(z_lo);
}

}  // namespace

PerformanceDistribution PerformanceDistribution::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("bernoulli probability must lie in [0, 1]");
  return {DistKind::Bernoulli, p, 0.0};
}

PerformanceDistribution PerformanceDistribution::truncated_gaussian(double center, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("gaussian sd must be positive");
  return {DistKind::TruncatedGaussian, center, sd};
}

PerformanceDistribution PerformanceDistribution::uniform(double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
    throw std::invalid_argument("uniform bounds must satisfy 0 <= lo < hi <= 1");
  return {DistKind::Uniform, lo, hi};
}

PerformanceDistribution PerformanceDistribution::truncated_exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
  return {DistKind::TruncatedExponential, rate, 0.0};
}

double PerformanceDistribution::mean() const {
  switch (kind) {
    case DistKind::Bernoulli:
      return p1;
    case DistKind::TruncatedGaussian: {
      double z_lo, z_hi;
      double window = gaussian_window(p1, p2, z_lo, z_hi);
      if (!(window > 1e-300))
        throw std::invalid_argument("gaussian has no mass in [0, 1]");
      return p1 + p2 * (normal_pdf(z_lo) - normal_pdf(z_hi)) / window;
    }
    case DistKind::Uniform:
      return 0.5 * (p1 + p2);
    case DistKind::TruncatedExponential: {
      double rate = p1;
      double e = std::exp(-rate);
      return 1.0 - (1.0 / rate - e / (1.0 - e));
    }
  }
  throw std::logic_error("unreachable");
}

double PerformanceDistribution::mass_below(double y) const {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  switch (kind) {
    case DistKind::Bernoulli:
      return 1.0 - p1;
    case DistKind::TruncatedGaussian: {
      double z_lo, z_hi;
      double window = gaussian_window(p1, p2, z_lo, z_hi);
      if (!(window > 1e-300))
        throw std::invalid_argument("gaussian has no mass in [0, 1]");
      return (normal_cdf((y - p1) / p2) - normal_cdf(z_lo)) / window;
    }
    case DistKind::Uniform:
      return std::clamp((y - p1) / (p2 - p1), 0.0, 1.0);
    case DistKind::TruncatedExponential: {
      double rate = p1;
      double e = std::exp(-rate);
      return (std::exp(-rate * (1.0 - y)) - e) / (1.0 - e);
    }
  }
  throw std::logic_error("unreachable");
}

DiscretizedDistribution discretize(const PerformanceDistribution& dist, int k) {
  if (k < 1 || k > 6) throw std::invalid_argument("noise qubit count must lie in [1, 6]");
  const std::size_t n = std::size_t{1} << k;
  DiscretizedDistribution d;
  d.k = k;
  d.points.resize(n);
  d.probs.assign(n, 0.0);
  const double denom = std::ldexp(1.0, k + 1);
  for (std::size_t j = 0; j < n; ++j) d.points[j] = (2.0 * j + 1.0) / denom;

  if (dist.kind == DistKind::Bernoulli) {
    d.points[0] = 0.0;
    d.points[n - 1] = 1.0;
    d.probs[0] = 1.0 - dist.p1;
    d.probs[n - 1] += dist.p1;
  } else {
    double total = 0.0;
    double prev = dist.mass_below(0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double next = dist.mass_below(double(j + 1) / double(n));
      d.probs[j] = std::max(0.0, next - prev);
      total += d.probs[j];
      prev = next;
    }
    if (!(total > 1e-12))
      throw std::invalid_argument("distribution has no mass in [0, 1]");
    for (auto& p : d.probs) p /= total;
  }

  d.exact_mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) d.exact_mean += d.points[j] * d.probs[j];
  return d;
}

DiscretizedDistribution point_mass_at_one() {
  DiscretizedDistribution d;
  d.k = 1;
  d.points = {0.0, 1.0};
  d.probs = {0.0, 1.0};
  d.exact_mean = 1.0;
  return d;
}

double sample_classical(const DiscretizedDistribution& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double u = uni(rng);
  double acc = 0.0;
  for (std::size_t j = 0; j < d.probs.size(); ++j) {
    acc += d.probs[j];
    if (u < acc) return d.points[j];
  }
  for (std::size_t j = d.probs.size(); j-- > 0;) {
    if (d.probs[j] > 0.0) return d.points[j];
  }
  return d.points.back();
}

namespace {

Gate translate(const Gate& g, int k, int noise_base, int objective_qubit,
               const std::vector<int>& extra_controls) {
  Gate out = g;
  out.target = (g.target == k) ? objective_qubit : noise_base + g.target;
  for (auto& c : out.controls) c = (c == k) ? objective_qubit : noise_base + c;
  out.controls.insert(out.controls.end(), extra_controls.begin(), extra_controls.end());
  return out;
}

}  // namespace

void SolutionOracle::apply_prep(StateVector& state, int noise_base, int objective_qubit,
                                const std::vector<int>& extra_controls) const {
  for (const Gate& g : prep)
    apply_gate(state, translate(g, table.k, noise_base, objective_qubit, extra_controls));
}

void SolutionOracle::apply_prep_inverse(StateVector& state, int noise_base, int objective_qubit,
                                        const std::vector<int>& extra_controls) const {
  for (auto it = prep.rbegin(); it != prep.rend(); ++it)
    apply_gate(state,
               translate(it->inverse(), table.k, noise_base, objective_qubit, extra_controls));
}

SolutionOracle build_oracle(const DiscretizedDistribution& d) {
  SolutionOracle oracle;
  oracle.table = d;
  const int k = d.k;
  const std::size_t n = d.points.size();

  auto emit_controlled = [&](Gate rot, const std::vector<int>& ctrls,
                             const std::vector<int>& anti) {
    for (int q : anti) oracle.prep.push_back(Gate::x(q));
    if (!ctrls.empty()) rot = rot.controlled(ctrls);
    oracle.prep.push_back(rot);
    for (int q : anti) oracle.prep.push_back(Gate::x(q));
  };

  // Amplitude loader over the noise qubits, most significant bit first.
  for (int depth = 0; depth < k; ++depth) {
    const int bit = k - 1 - depth;
    for (std::uint64_t prefix = 0; prefix < (std::uint64_t{1} << depth); ++prefix) {
      double mass0 = 0.0, mass1 = 0.0;
      for (std::uint64_t j = 0; j < n; ++j) {
        if ((j >> (bit + 1)) != prefix) continue;
        if ((j >> bit) & 1) {
          mass1 += d.probs[j];
        } else {
          mass0 += d.probs[j];
        }
      }
      if (mass0 + mass1 <= 0.0) continue;
      double theta = 2.0 * std::atan2(std::sqrt(mass1), std::sqrt(mass0));
      if (theta == 0.0) continue;
      std::vector<int> ctrls, anti;
      for (int q = bit + 1; q < k; ++q) {
        ctrls.push_back(q);
        if (!((prefix >> (q - bit - 1)) & 1)) anti.push_back(q);
      }
      emit_controlled(Gate::ry(bit, theta), ctrls, anti);
    }
  }

  // Objective rotation per support point with nonzero mass and value.
  for (std::uint64_t j = 0; j < n; ++j) {
    if (d.probs[j] <= 0.0 || d.points[j] <= 0.0) continue;
    double y = d.points[j];
    double theta = 2.0 * std::atan2(std::sqrt(y), std::sqrt(std::max(0.0, 1.0 - y)));
    std::vector<int> ctrls, anti;
    for (int q = 0; q < k; ++q) {
      ctrls.push_back(q);
      if (!((j >> q) & 1)) anti.push_back(q);
    }
    emit_controlled(Gate::ry(k, theta), ctrls, anti);
  }

  return oracle;
}

}  // namespace sogas
