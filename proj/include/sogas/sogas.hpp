#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "sogas/qsub.hpp"

namespace sogas {

struct Solution {
  int id = 0;
  DiscretizedDistribution table;
};

struct ProblemInstance {
  std::vector<Solution> solutions;
  double eps = 0.1;
  double delta = 0.05;

  std::size_t size() const { return solutions.size(); }
  double mean(std::size_t i) const { return solutions[i].table.exact_mean; }
  std::size_t best_index() const;
  double best_mean() const;
};

// ceil(log2(x)) with results snapped to nearby integers before rounding,
// so exact powers of two are not pushed up by floating-point noise.
int ceil_log2_snapped(double x);

// Iteration bound ceil(log_{16/11}(2/eps)) for the region loop.
int region_iteration_bound(double eps);

// Comparison window for one flag pass. The estimate is compared against the
// midpoint of [ell+eta-2^{1-m}, ell+eta-2^{-m}], with m chosen so that
// eta/4 <= 2^{-m} <= eta/2.
struct FlagParams {
  double ell = 0.0;
  double eta = 0.0;
  double kappa = 0.0;
  std::size_t universe = 0;  // solution count including any auxiliary entry
  int m = 0;
  double alpha = 0.0;     // per-solution estimation risk kappa^2 / (4 universe^3)
  double qae_eps = 0.0;   // 2^{-m} / 3
  double lower = 0.0;     // ell + eta - 2^{1-m}
  double upper = 0.0;     // ell + eta - 2^{-m}
  double midpoint = 0.0;  // ell + eta - 1.5 * 2^{-m}
};

FlagParams make_flag_params(double ell, double eta, double kappa, std::size_t universe);

// Cost of one coherent flag-procedure invocation in contract mode:
// ceil(c * 3 * 2^m * ln(1/alpha)), one estimation call at precision 2^{-m}/3.
std::uint64_t coherent_flag_cost(const FlagParams& params, double c);

struct FlagAssignment {
  std::vector<char> flags;
  std::vector<double> estimates;
  std::vector<int> truth_class;  // 1: mean >= upper, 2: mean < lower, 3: in between
  std::size_t flagged_count() const;
};

// Measured-mode flagging: one qae_mean per solution at (2^{-m}/3, alpha),
// charged through the backend, then a classical threshold comparison.
FlagAssignment flag_oracle(const std::vector<const DiscretizedDistribution*>& sols,
                           const FlagParams& params, const SubroutineBackend& backend,
                           QueryLedger& ledger, std::mt19937_64& rng,
                           Phase phase = Phase::flag_qae);

// Contract-mode flag realization. Draws each solution's estimate from the
// contract model without charging; the cost of the coherent procedure is
// carried by coherent_flag_cost inside amplify/estimate charges.
FlagAssignment realize_flags_contract(const std::vector<const DiscretizedDistribution*>& sols,
                                      const FlagParams& params, std::mt19937_64& rng);

struct Region {
  double a = 0.0;
  double b = 1.0;
  double width() const { return b - a; }
};

struct RegionStep {
  int t = 0;
  double a = 0.0;
  double b = 1.0;
  double r = 0.0;
  int branch = 0;  // 1: raise lower end, 2: lower upper end
  std::size_t flagged = 0;
};

struct RegionResult {
  Region region;
  std::vector<RegionStep> trace;
};

// Shrinks [0,1] around the best mean until the width drops below eps/2.
// delta is the total failure budget of the loop.
RegionResult optimal_region(const ProblemInstance& inst, double eps, double delta,
                            const SubroutineBackend& backend, QueryLedger& ledger,
                            std::mt19937_64& rng);

void write_region_trace_csv(const std::vector<RegionStep>& trace, std::ostream& os);

struct RunResult {
  int selected = -1;  // solution id, -1 when selection failed outright
  bool correct = false;
  QueryLedger ledger;
  Region final_region;
  std::vector<RegionStep> trace;
};

RunResult sogas_run(const ProblemInstance& inst, const SubroutineBackend& backend,
                    std::mt19937_64& rng);

// Small end-to-end coherent circuit: solution register in superposition,
// per-solution data loading, estimation register, comparison flag, and a
// CNOT onto the final flag qubit. Restricted to |X| <= 4 and k <= 2.
struct DemoResult {
  double p_label = 0.0;  // flag mass measured from the prepared state
  double q_label = 0.0;  // ideal mass: S1 plus realized in-band flag mass
  double bound = 0.0;    // 2 kappa / |X|
  std::vector<double> per_solution_flag_mass;
  StateVector state;
};

DemoResult coherent_flag_demo(const ProblemInstance& inst, const FlagParams& params);

}  // namespace sogas
