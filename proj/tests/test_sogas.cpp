#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sogas/sogas.hpp"

using namespace sogas;

namespace {

ProblemInstance bernoulli_instance(const std::vector<double>& means, double eps = 0.1,
                                   double delta = 0.05) {
  ProblemInstance inst;
  inst.eps = eps;
  inst.delta = delta;
  for (std::size_t i = 0; i < means.size(); ++i) {
    Solution s;
    s.id = int(i);
    s.table = discretize(PerformanceDistribution::bernoulli(means[i]), 1);
    inst.solutions.push_back(std::move(s));
  }
  return inst;
}

std::vector<double> spread_means(std::size_t n, double lo, double hi) {
  std::vector<double> means(n);
  for (std::size_t i = 0; i < n; ++i)
    means[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return means;
}

double binomial_slack(int trials, double rate) {
  return rate * trials + 3.0 * std::sqrt(trials * rate * (1.0 - rate));
}

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_SUITE("sogas") {

TEST_CASE("log ceiling snaps exact powers of two") {
  CHECK(ceil_log2_snapped(1.0) == 0);
  CHECK(ceil_log2_snapped(2.0) == 1);
  CHECK(ceil_log2_snapped(4.0) == 2);
  CHECK(ceil_log2_snapped(5.0) == 3);
  CHECK(ceil_log2_snapped(8.0) == 3);
  CHECK(ceil_log2_snapped(1048576.0) == 20);
  CHECK(ceil_log2_snapped(1048576.0 * (1.0 + 1e-13)) == 20);
  CHECK(ceil_log2_snapped(12.8) == 4);
}

TEST_CASE("iteration bound matches the shrink rate") {
  // ceil(log(20) / log(16/11)) = ceil(7.99514) = 8
  CHECK(region_iteration_bound(0.1) == 8);
  CHECK(region_iteration_bound(0.5) == 4);
  CHECK(region_iteration_bound(0.05) == 10);
}

TEST_CASE("flag params freeze the comparison window") {
  FlagParams p = make_flag_params(0.5, 0.1, 0.05, 10);
  CHECK(p.m == 5);
  CHECK(p.qae_eps == doctest::Approx(0.03125 / 3.0).epsilon(1e-14));
  CHECK(p.lower == doctest::Approx(0.5375).epsilon(1e-12));
  CHECK(p.upper == doctest::Approx(0.56875).epsilon(1e-12));
  CHECK(p.midpoint == doctest::Approx(0.553125).epsilon(1e-12));
  CHECK(p.alpha == doctest::Approx(0.0025 / 4000.0).epsilon(1e-12));

  FlagParams q = make_flag_params(0.5, 0.25, 0.05, 10);
  CHECK(q.m == 3);
  CHECK(q.lower == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(q.upper == doctest::Approx(0.625).epsilon(1e-12));
}

TEST_CASE("flag params risk level at the augmented instance") {
  FlagParams p = make_flag_params(0.5, 0.25, 0.00125, 11);
  CHECK(std::abs(p.alpha / 2.9348e-10 - 1.0) < 1e-3);
}

TEST_CASE("precision window sandwich holds across eta values") {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> uni(1e-4, 0.25);
  for (int i = 0; i < 1000; ++i) {
    double eta = uni(rng);
    FlagParams p = make_flag_params(0.3, eta, 0.01, 12);
    double cell = std::ldexp(1.0, -p.m);
    CHECK(cell >= eta / 4.0 - 1e-15);
    CHECK(cell <= eta / 2.0 + 1e-15);
    CHECK(p.lower < p.upper);
    CHECK(p.midpoint > p.lower);
    CHECK(p.midpoint < p.upper);
  }
}

TEST_CASE("flag params reject bad inputs") {
  CHECK_THROWS_AS(make_flag_params(0.5, 0.0, 0.05, 10), PreconditionError);
  CHECK_THROWS_AS(make_flag_params(0.5, -0.1, 0.05, 10), PreconditionError);
  CHECK_THROWS_AS(make_flag_params(0.5, 0.1, 0.0, 10), PreconditionError);
  CHECK_THROWS_AS(make_flag_params(0.5, 0.1, 1.5, 10), PreconditionError);
  CHECK_THROWS_AS(make_flag_params(0.5, 0.1, 0.05, 0), PreconditionError);
}

TEST_CASE("coherent flag cost grows with the precision level") {
  FlagParams p = make_flag_params(0.5, 0.25, 0.05, 10);  // m=3
  // one estimation call at precision 2^{-m}/3 and risk alpha
  CHECK(coherent_flag_cost(p, 1.0) == contract_qae_cost(p.qae_eps, p.alpha, 1.0));
  FlagParams q = make_flag_params(0.5, 0.0125, 0.05, 10);  // finer eta, larger m
  CHECK(coherent_flag_cost(q, 1.0) > coherent_flag_cost(p, 1.0));
}

TEST_CASE("contract flag realization obeys the class guarantees") {
  // thresholds at ell=0.5, eta=0.1: lower 0.5375, upper 0.56875
  FlagParams p = make_flag_params(0.5, 0.1, 0.05, 10);
  auto high = discretize(PerformanceDistribution::bernoulli(0.62), 1);
  auto low = discretize(PerformanceDistribution::bernoulli(0.50), 1);
  auto band = discretize(PerformanceDistribution::bernoulli(0.55), 1);
  auto aux = point_mass_at_one();
  std::vector<const DiscretizedDistribution*> sols = {&high, &low, &band, &aux};
  std::mt19937_64 rng(606);
  for (int i = 0; i < 1000; ++i) {
    FlagAssignment fa = realize_flags_contract(sols, p, rng);
    CHECK(fa.truth_class[0] == 1);
    CHECK(fa.truth_class[1] == 2);
    CHECK(fa.truth_class[2] == 3);
    CHECK(fa.truth_class[3] == 1);
    CHECK(fa.flags[0] == 1);  // above the upper threshold
    CHECK(fa.flags[1] == 0);  // below the lower threshold
    CHECK(fa.flags[3] == 1);  // the point mass always clears the window
    CHECK(fa.estimates[0] >= 0.0);
    CHECK(fa.estimates[0] <= 1.0);
  }
}

TEST_CASE("estimates are clipped before comparison") {
  // midpoint sits above 1, so nothing can be flagged even at mean 1
  FlagParams p = make_flag_params(0.95, 0.1, 0.05, 4);
  CHECK(p.midpoint > 1.0);
  auto aux = point_mass_at_one();
  std::vector<const DiscretizedDistribution*> sols = {&aux};
  std::mt19937_64 rng(607);
  for (int i = 0; i < 200; ++i) {
    FlagAssignment fa = realize_flags_contract(sols, p, rng);
    CHECK(fa.flagged_count() == 0);
  }
}

TEST_CASE("hybrid flag pass meets the class guarantees and charges the ledger") {
  FlagParams p = make_flag_params(0.5, 0.1, 0.05, 3);
  auto high = discretize(PerformanceDistribution::bernoulli(0.70), 1);
  auto low = discretize(PerformanceDistribution::bernoulli(0.40), 1);
  auto aux = point_mass_at_one();
  std::vector<const DiscretizedDistribution*> sols = {&high, &low, &aux};
  SubroutineBackend backend;
  backend.mode = BackendMode::Statevector;
  QueryLedger ledger;
  std::mt19937_64 rng(608);
  for (int i = 0; i < 20; ++i) {
    FlagAssignment fa = flag_oracle(sols, p, backend, ledger, rng, Phase::optimal_region);
    CHECK(fa.flags[0] == 1);
    CHECK(fa.flags[1] == 0);
    CHECK(fa.flags[2] == 1);
  }
  CHECK(ledger.count(Phase::optimal_region) > 0);
  CHECK(ledger.count(Phase::flag_qae) == 0);
}

TEST_CASE("first region split from the unit interval") {
  SubroutineBackend backend;

  // every real mean at 1: branch 1 keeps the upper half [0.5, 1]
  {
    ProblemInstance inst = bernoulli_instance({1.0, 1.0});
    QueryLedger ledger;
    std::mt19937_64 rng(701);
    RegionResult rr = optimal_region(inst, 0.1, 0.025, backend, ledger, rng);
    REQUIRE(rr.trace.size() >= 2);
    CHECK(rr.trace[0].branch == 1);
    CHECK(rr.trace[1].a == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rr.trace[1].b == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rr.region.b == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rr.region.width() < 0.05);
    CHECK(int(rr.trace.size()) <= region_iteration_bound(0.1));
    CHECK(ledger.count(Phase::optimal_region) > 0);
  }

  // every real mean at 0: only the auxiliary stays flagged, branch 2 fires
  {
    ProblemInstance inst = bernoulli_instance({0.0, 0.0});
    QueryLedger ledger;
    std::mt19937_64 rng(702);
    RegionResult rr = optimal_region(inst, 0.1, 0.025, backend, ledger, rng);
    REQUIRE(rr.trace.size() >= 2);
    CHECK(rr.trace[0].branch == 2);
    CHECK(rr.trace[0].flagged == 1);
    CHECK(rr.trace[1].a == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rr.trace[1].b == doctest::Approx(0.625).epsilon(1e-15));
  }
}

TEST_CASE("region loop rejects bad parameters") {
  ProblemInstance inst = bernoulli_instance({0.3, 0.7});
  SubroutineBackend backend;
  QueryLedger ledger;
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(optimal_region(inst, 0.0, 0.025, backend, ledger, rng), PreconditionError);
  CHECK_THROWS_AS(optimal_region(inst, 0.1, 1.0, backend, ledger, rng), PreconditionError);
}

TEST_CASE("every region step shrinks by at most eleven sixteenths") {
  ProblemInstance inst = bernoulli_instance(spread_means(10, 0.78, 0.85));
  SubroutineBackend backend;
  std::mt19937_64 rng(703);
  int contained = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    QueryLedger ledger;
    RegionResult rr = optimal_region(inst, 0.1, 0.025, backend, ledger, rng);
    REQUIRE(!rr.trace.empty());
    for (std::size_t t = 0; t + 1 < rr.trace.size(); ++t) {
      double w0 = rr.trace[t].b - rr.trace[t].a;
      double w1 = rr.trace[t + 1].b - rr.trace[t + 1].a;
      CHECK(w1 <= (11.0 / 16.0) * w0 + 1e-15);
    }
    double w_last = rr.trace.back().b - rr.trace.back().a;
    CHECK(rr.region.width() <= (11.0 / 16.0) * w_last + 1e-15);
    CHECK(int(rr.trace.size()) <= region_iteration_bound(0.1));
    CHECK(rr.region.width() < 0.05);
    double best = inst.best_mean();
    if (best >= rr.region.a - 1e-12 && best <= rr.region.b + 1e-12) ++contained;
  }
  // containment risk budget is delta/2 = 0.025
  CHECK(reps - contained <= binomial_slack(reps, 0.025));
}

TEST_CASE("region trace csv lists one row per iteration") {
  ProblemInstance inst = bernoulli_instance({0.2, 0.9});
  SubroutineBackend backend;
  QueryLedger ledger;
  std::mt19937_64 rng(704);
  RegionResult rr = optimal_region(inst, 0.1, 0.025, backend, ledger, rng);
  std::ostringstream os;
  write_region_trace_csv(rr.trace, os);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "t,a,b,r_t,branch");
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int commas = 0;
    for (char ch : line)
      if (ch == ',') ++commas;
    CHECK(commas == 4);
    ++rows;
  }
  CHECK(rows == int(rr.trace.size()));
  std::istringstream first_row(os.str().substr(os.str().find('\n') + 1));
  int t;
  char comma;
  double a;
  first_row >> t >> comma >> a;
  CHECK(t == 0);
  CHECK(a == 0.0);
}

TEST_CASE("full run separates two deterministic solutions") {
  ProblemInstance inst = bernoulli_instance({1.0, 0.0});
  SubroutineBackend backend;
  std::mt19937_64 rng(705);
  const int reps = 200;
  int correct = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RunResult res = sogas_run(inst, backend, rng);
    CHECK((res.selected == 0 || res.selected == 1));
    if (res.correct) {
      CHECK(res.selected == 0);
      ++correct;
    }
    CHECK(res.ledger.count(Phase::optimal_region) > 0);
    CHECK(res.ledger.count(Phase::amplify) > 0);
    CHECK(res.final_region.width() < 0.05);
  }
  CHECK(reps - correct <= binomial_slack(reps, 0.05));
}

TEST_CASE("full run is pac on a separated instance") {
  ProblemInstance inst = bernoulli_instance({0.30, 0.45, 0.55, 0.62, 0.71, 0.86});
  SubroutineBackend backend;
  std::mt19937_64 rng(706);
  const int reps = 200;
  int correct = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RunResult res = sogas_run(inst, backend, rng);
    if (res.correct) ++correct;
  }
  CHECK(reps - correct <= binomial_slack(reps, 0.05));
}

TEST_CASE("ties make every selection acceptable") {
  ProblemInstance inst = bernoulli_instance({0.8, 0.8, 0.8, 0.8});
  SubroutineBackend backend;
  std::mt19937_64 rng(707);
  for (int rep = 0; rep < 30; ++rep) {
    RunResult res = sogas_run(inst, backend, rng);
    CHECK(res.correct);
  }
}

TEST_CASE("flagged set geometry keeps only near optimal solutions") {
  ProblemInstance inst = bernoulli_instance({0.30, 0.45, 0.55, 0.62, 0.71, 0.86});
  SubroutineBackend backend;
  std::mt19937_64 rng(708);
  const double eps = inst.eps;
  for (int rep = 0; rep < 100; ++rep) {
    RunResult res = sogas_run(inst, backend, rng);
    double a = res.final_region.a, b = res.final_region.b;
    double best = inst.best_mean();
    if (!(best >= a - 1e-12 && best <= b + 1e-12)) continue;  // containment failure branch
    if (!(b - a < eps / 2.0)) continue;
    double eta = (b - a) / 4.0;
    if (eta <= 0.0) eta = eps / 8.0;
    FlagParams p = make_flag_params(a - 0.75 * eta, eta, 0.01 * inst.delta, inst.size());
    for (std::size_t i = 0; i < inst.size(); ++i) {
      if (inst.mean(i) >= p.lower) CHECK(inst.mean(i) > best - eps);
    }
  }
}

TEST_CASE("run validates the instance") {
  SubroutineBackend backend;
  std::mt19937_64 rng(2);
  ProblemInstance tiny;
  tiny.solutions.push_back({0, point_mass_at_one()});
  CHECK_THROWS_AS(sogas_run(tiny, backend, rng), PreconditionError);
  ProblemInstance bad = bernoulli_instance({0.2, 0.6});
  bad.eps = 0.0;
  CHECK_THROWS_AS(sogas_run(bad, backend, rng), PreconditionError);
  bad.eps = 0.1;
  bad.delta = 1.0;
  CHECK_THROWS_AS(sogas_run(bad, backend, rng), PreconditionError);
}

TEST_CASE("hybrid runs select correctly on deterministic means") {
  ProblemInstance inst = bernoulli_instance({1.0, 0.0});
  SubroutineBackend backend;
  backend.mode = BackendMode::Statevector;
  std::mt19937_64 rng(709);
  int correct = 0;
  for (int rep = 0; rep < 20; ++rep) {
    RunResult res = sogas_run(inst, backend, rng);
    if (res.correct) ++correct;
    CHECK(res.ledger.count(Phase::optimal_region) > 0);
  }
  CHECK(correct >= 18);
}

TEST_CASE("hybrid query growth is near linear in the solution count") {
  SubroutineBackend backend;
  backend.mode = BackendMode::Statevector;
  std::mt19937_64 rng(710);
  std::vector<double> sizes, costs;
  for (std::size_t n : {4, 8, 16, 32}) {
    double acc = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      ProblemInstance inst = bernoulli_instance(spread_means(n, 0.78, 0.85));
      RunResult res = sogas_run(inst, backend, rng);
      acc += double(res.ledger.total());
    }
    sizes.push_back(double(n));
    costs.push_back(acc / 3.0);
  }
  double slope = fit_loglog_slope(sizes, costs);
  CHECK(slope >= 0.8);
  CHECK(slope <= 1.2);
}

TEST_CASE("coherent demo separates deterministic means") {
  ProblemInstance inst = bernoulli_instance({1.0, 0.0});
  FlagParams p = make_flag_params(0.5, 0.25, 0.05, 2);
  DemoResult demo = coherent_flag_demo(inst, p);
  CHECK(demo.bound == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(std::abs(demo.p_label - 0.5) <= demo.bound + 1e-12);
  CHECK(std::abs(demo.p_label - demo.q_label) <= demo.bound + 1e-12);
  CHECK(demo.per_solution_flag_mass[0] > 0.99);
  CHECK(demo.per_solution_flag_mass[1] < 0.01);
}

TEST_CASE("coherent demo with all means at one") {
  ProblemInstance inst = bernoulli_instance({1.0, 1.0});
  FlagParams p = make_flag_params(0.5, 0.25, 0.05, 2);
  DemoResult demo = coherent_flag_demo(inst, p);
  CHECK(std::abs(demo.p_label - 1.0) <= demo.bound + 1e-12);
  CHECK(std::abs(demo.p_label - demo.q_label) <= demo.bound + 1e-12);
}

TEST_CASE("coherent demo on four solutions") {
  ProblemInstance inst = bernoulli_instance({0.0, 0.0, 1.0, 1.0});
  FlagParams p = make_flag_params(0.5, 0.25, 0.04, 4);
  DemoResult demo = coherent_flag_demo(inst, p);
  CHECK(demo.bound == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(std::abs(demo.p_label - 0.5) <= demo.bound + 1e-12);
  CHECK(std::abs(demo.p_label - demo.q_label) <= demo.bound + 1e-12);
}

TEST_CASE("coherent demo loads a non power of two superposition") {
  ProblemInstance inst = bernoulli_instance({1.0, 0.0, 1.0});
  FlagParams p = make_flag_params(0.5, 0.25, 0.03, 3);
  DemoResult demo = coherent_flag_demo(inst, p);
  CHECK(std::abs(demo.p_label - 2.0 / 3.0) <= demo.bound + 1e-12);
  CHECK(std::abs(demo.p_label - demo.q_label) <= demo.bound + 1e-12);
}

TEST_CASE("coherent demo tracks an in band solution honestly") {
  // 0.55 sits between the thresholds 0.5375 and 0.56875
  ProblemInstance inst = bernoulli_instance({1.0, 0.55, 0.0});
  FlagParams p = make_flag_params(0.5, 0.1, 0.05, 3);
  DemoResult demo = coherent_flag_demo(inst, p);
  double in_band = demo.per_solution_flag_mass[1];
  CHECK(in_band >= 0.0);
  CHECK(in_band <= 1.0);
  double expect_q = (1.0 + in_band) / 3.0;
  CHECK(demo.q_label == doctest::Approx(expect_q).epsilon(1e-9));
  CHECK(std::abs(demo.p_label - demo.q_label) <= demo.bound + 1e-12);
}

TEST_CASE("coherent demo rejects oversized instances") {
  FlagParams p = make_flag_params(0.5, 0.25, 0.05, 5);
  ProblemInstance wide = bernoulli_instance({0.1, 0.2, 0.3, 0.4, 0.5});
  CHECK_THROWS_AS(coherent_flag_demo(wide, p), PreconditionError);
  ProblemInstance deep = bernoulli_instance({0.2, 0.8});
  deep.solutions[0].table = discretize(PerformanceDistribution::truncated_gaussian(0.5, 0.1), 3);
  FlagParams p2 = make_flag_params(0.5, 0.25, 0.05, 2);
  CHECK_THROWS_AS(coherent_flag_demo(deep, p2), PreconditionError);
}

}  // TEST_SUITE
