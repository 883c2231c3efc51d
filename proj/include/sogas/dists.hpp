#pragma once

#include <random>
#include <vector>

#include "sogas/qcore.hpp"

namespace sogas {

enum class DistKind { Bernoulli, TruncatedGaussian, Uniform, TruncatedExponential };

// Performance distribution with support inside [0, 1].
// The exponential family models performance as 1 - T where T is an
// Exponential(rate) variable truncated to [0, 1] and renormalized, so
// larger rates concentrate mass near 1.
struct PerformanceDistribution {
  DistKind kind = DistKind::Bernoulli;
  double p1 = 0.0;
  double p2 = 0.0;

  static PerformanceDistribution bernoulli(double p);
  static PerformanceDistribution truncated_gaussian(double center, double sd);
  static PerformanceDistribution uniform(double lo, double hi);
  static PerformanceDistribution truncated_exponential(double rate);

  double mean() const;                    // exact continuous mean after truncation
  double mass_below(double y) const;      // CDF at y, for cell integration
};

struct DiscretizedDistribution {
  int k = 1;                    // noise qubits, 2^k support points
  std::vector<double> points;   // values in [0, 1]
  std::vector<double> probs;    // nonnegative, sums to 1
  double exact_mean = 0.0;
};

// Splits [0,1] into 2^k cells with midpoint support points; Bernoulli maps
// exactly onto the two cells containing 0 and 1. k must be in [1, 6].
DiscretizedDistribution discretize(const PerformanceDistribution& dist, int k);

DiscretizedDistribution point_mass_at_one();

double sample_classical(const DiscretizedDistribution& d, std::mt19937_64& rng);

// State-preparation circuit over a canonical layout: noise qubits 0..k-1,
// objective qubit k. P(objective = 1) equals exact_mean.
struct SolutionOracle {
  DiscretizedDistribution table;
  std::vector<Gate> prep;

  void apply_prep(StateVector& state, int noise_base, int objective_qubit,
                  const std::vector<int>& extra_controls = {}) const;
  void apply_prep_inverse(StateVector& state, int noise_base, int objective_qubit,
                          const std::vector<int>& extra_controls = {}) const;
};

SolutionOracle build_oracle(const DiscretizedDistribution& d);

}  // namespace sogas
