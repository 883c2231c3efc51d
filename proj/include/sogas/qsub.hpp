#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sogas/dists.hpp"

namespace sogas {

// Raised when a documented precondition is violated by the caller.
struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

// Raised when an internal invariant breaks (loop guards, impossible states).
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

enum class Phase {
  optimal_region = 0,
  flag_qae,
  proportion_estimate,
  amplify,
  classical_sampling,
};

inline constexpr int kPhaseCount = 5;

class QueryLedger {
public:
  void charge(Phase phase, std::uint64_t n);
  std::uint64_t count(Phase phase) const;
  std::uint64_t total() const;

private:
  std::array<std::uint64_t, kPhaseCount> counts_{};
};

enum class BackendMode { Statevector, Contract };

struct SubroutineBackend {
  BackendMode mode = BackendMode::Contract;
  double cost_constant = 1.0;  // c in contract charge formulas
  int shots_per_round = 100;   // statevector estimation shots per refinement round
};

// Closed-form contract charges.
std::uint64_t contract_qae_cost(double eps, double delta, double c);
std::uint64_t contract_amplify_cost(std::uint64_t flag_cost, double p_label, double delta, double c);
std::uint64_t contract_proportion_cost(std::uint64_t flag_cost, double rel_eps, double p_label,
                                       double delta, double c);

// Contract draw models: with probability delta the estimate is uniform on
// [0,1]; otherwise uniform on the promised interval clipped to [0,1].
double contract_interval_draw(double truth, double eps, double delta, std::mt19937_64& rng);
double contract_relative_draw(double truth, double rel_eps, double delta, std::mt19937_64& rng);

// Estimates the objective mean of one solution oracle.
double qae_mean(const SolutionOracle& oracle, double eps, double delta,
                const SubroutineBackend& backend, QueryLedger& ledger, std::mt19937_64& rng,
                Phase phase = Phase::flag_qae);

// A procedure whose output carries a flag qubit with success mass p_label.
// Contract mode uses the flagged element list; statevector mode replays the
// circuit. cost_per_call is the ledger charge of one invocation.
struct FlagProcedure {
  struct Circuit {
    QubitLayout layout;
    std::function<void(StateVector&)> apply;          // from the all-zeros state
    std::function<void(StateVector&)> apply_inverse;
    std::string flag_reg = "F";
    std::string element_reg = "X";
  };

  std::vector<std::pair<int, double>> flagged;  // (element, probability mass)
  double p_label = 0.0;
  std::uint64_t cost_per_call = 1;
  std::shared_ptr<const Circuit> circuit;
};

int amplify(const FlagProcedure& proc, double delta, const SubroutineBackend& backend,
            QueryLedger& ledger, std::mt19937_64& rng, Phase phase = Phase::amplify);

double estimate_proportion(const FlagProcedure& proc, double rel_eps, double delta,
                           const SubroutineBackend& backend, QueryLedger& ledger,
                           std::mt19937_64& rng, Phase phase = Phase::proportion_estimate);

// Iterative amplitude estimation over Grover powers with Chernoff interval
// updates. prob_at_power(k) must return the exact success probability of
// measuring the good subspace after k Grover iterations, i.e.
// sin^2((2k+1) theta). Exactly one of eps_additive / rel_eps is positive.
struct IqaeOptions {
  double eps_additive = 0.0;
  double rel_eps = 0.0;
  double alpha = 0.05;
  int shots_per_round = 100;
};

struct IqaeOutcome {
  double estimate = 0.0;
  std::uint64_t oracle_calls = 0;  // applications of the procedure or its inverse
};

IqaeOutcome iterative_amplitude_estimation(const std::function<double(std::uint64_t)>& prob_at_power,
                                           const IqaeOptions& opt, std::mt19937_64& rng);

}  // namespace sogas
