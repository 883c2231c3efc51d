#pragma once

#include <cstdint>
#include <random>

#include "sogas/sogas.hpp"

namespace sogas {

struct ClassicalEstimatorConfig {
  double min_fraction = 0.1;    // mandatory first draw: ceil(min_fraction * N_H)
  int batch_size = 16;
  double variance_slack = 1.0;  // multiplier on the variance stopping term
  // Counting flags is free once estimates exist; this toggle charges one
  // unit per solution per counting pass for sensitivity runs.
  bool charge_flag_counting = false;
};

// Hoeffding cap ceil(ln(2/delta) / (2 eps^2)).
std::uint64_t hoeffding_cap(double eps, double delta);

// Sample-average estimator: draws ceil(min_fraction * N_H) samples, then
// batches while the empirical variance term slack*sqrt(2 s^2 ln(3/delta)/n)
// exceeds eps, hard-capped at N_H samples. Charges every draw.
double classical_mean(const DiscretizedDistribution& d, double eps, double delta,
                      const ClassicalEstimatorConfig& cfg, QueryLedger& ledger,
                      std::mt19937_64& rng);

// Region loop with classical_mean in place of the quantum estimator;
// r_t is the exact flagged fraction.
RegionResult csogas_region(const ProblemInstance& inst, double eps, double delta,
                           const ClassicalEstimatorConfig& cfg, QueryLedger& ledger,
                           std::mt19937_64& rng);

// Final selection for a given region: flags solutions classically and picks
// uniformly among the flagged. An empty flag set is retried once with eta
// doubled; a second failure returns -1.
int csogas_select(const ProblemInstance& inst, const Region& region, double eps, double delta,
                  const ClassicalEstimatorConfig& cfg, QueryLedger& ledger, std::mt19937_64& rng);

RunResult csogas_run(const ProblemInstance& inst, const ClassicalEstimatorConfig& cfg,
                     std::mt19937_64& rng);

}  // namespace sogas
