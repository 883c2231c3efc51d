#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sogas/harness.hpp"

using namespace sogas;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string temp_path(const std::string& name) { return "/tmp/sogas_test_" + name; }

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("family names round trip") {
  for (Family f : {Family::Bernoulli, Family::Gaussian, Family::Uniform, Family::Exponential})
    CHECK(family_from_string(family_name(f)) == f);
  CHECK_THROWS_AS(family_from_string("cauchy"), PreconditionError);
}

TEST_CASE("seed derivation separates cells and replications") {
  std::uint64_t a = replication_seed(1, "SOGAS", "10", 0);
  CHECK(a == replication_seed(1, "SOGAS", "10", 0));
  CHECK(a != replication_seed(1, "SOGAS", "10", 1));
  CHECK(a != replication_seed(1, "CSOGAS", "10", 0));
  CHECK(a != replication_seed(1, "SOGAS", "15", 0));
  CHECK(a != replication_seed(2, "SOGAS", "10", 0));
  CHECK(instance_seed(1, "bernoulli", 10) == instance_seed(1, "bernoulli", 10));
  CHECK(instance_seed(1, "bernoulli", 10) != instance_seed(1, "bernoulli", 15));
  CHECK(instance_seed(1, "bernoulli", 10) != instance_seed(1, "gaussian", 10));
}

TEST_CASE("bernoulli means stay in range with separated ties") {
  for (std::size_t size : {std::size_t(10), std::size_t(128)}) {
    auto raw = generate_raw(Family::Bernoulli, size, 42);
    REQUIRE(raw.size() == size);
    std::vector<double> means;
    for (const auto& r : raw) {
      CHECK(r.k == 1);
      CHECK(r.dist.kind == DistKind::Bernoulli);
      CHECK(r.dist.p1 >= 0.78);
      CHECK(r.dist.p1 <= 0.85);
      means.push_back(r.dist.p1);
    }
    std::sort(means.begin(), means.end());
    for (std::size_t i = 0; i + 1 < means.size(); ++i)
      CHECK(means[i + 1] - means[i] >= 1e-4 - 1e-12);
  }
  auto again = generate_raw(Family::Bernoulli, 10, 42);
  auto first = generate_raw(Family::Bernoulli, 10, 42);
  for (std::size_t i = 0; i < 10; ++i) CHECK(first[i].dist.p1 == again[i].dist.p1);
  auto other = generate_raw(Family::Bernoulli, 10, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < 10; ++i) any_diff |= other[i].dist.p1 != first[i].dist.p1;
  CHECK(any_diff);
}

TEST_CASE("gaussian instance means span the documented window") {
  ProblemInstance inst = generate_instance(Family::Gaussian, 10, 7, 0.1, 0.05);
  REQUIRE(inst.size() == 10);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    CHECK(inst.solutions[i].table.k == 3);
    CHECK(inst.mean(i) >= 0.40);
    CHECK(inst.mean(i) <= 0.86);
  }
  for (std::size_t i = 0; i + 1 < inst.size(); ++i) CHECK(inst.mean(i) < inst.mean(i + 1));
}

TEST_CASE("uniform targets are hit exactly by the continuous mean") {
  auto raw = generate_raw(Family::Uniform, 6, 7);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double target = 0.50 + (0.81 - 0.50) * double(i) / 5.0;
    CHECK(raw[i].dist.mean() == doctest::Approx(target).epsilon(1e-12));
    CHECK(raw[i].dist.p1 >= 0.0);
    CHECK(raw[i].dist.p2 <= 1.0);
    CHECK(raw[i].k == 3);
  }
}

TEST_CASE("exponential rates are inverted from the target means") {
  auto raw = generate_raw(Family::Exponential, 5, 7);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double target = 0.62 + (0.83 - 0.62) * double(i) / 4.0;
    CHECK(raw[i].dist.kind == DistKind::TruncatedExponential);
    CHECK(raw[i].dist.p1 > 0.0);
    CHECK(raw[i].dist.mean() == doctest::Approx(target).epsilon(1e-9));
  }
  ProblemInstance inst = instantiate(raw, 0.1, 0.05);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    double target = 0.62 + (0.83 - 0.62) * double(i) / 4.0;
    CHECK(std::abs(inst.mean(i) - target) <= 0.125 + 1e-9);  // discretization slack 2^-3
  }
}

TEST_CASE("instance files survive a round trip") {
  std::vector<RawSolution> raw;
  raw.push_back({0, PerformanceDistribution::bernoulli(0.8125), 1});
  raw.push_back({1, PerformanceDistribution::truncated_gaussian(0.5, 0.08), 3});
  raw.push_back({2, PerformanceDistribution::uniform(0.35, 0.65), 3});
  raw.push_back({3, PerformanceDistribution::truncated_exponential(2.5), 3});
  const std::string path = temp_path("roundtrip.txt");
  write_instance_file(raw, path);
  auto back = read_instance_file(path);
  REQUIRE(back.size() == raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(back[i].id == raw[i].id);
    CHECK(back[i].dist.kind == raw[i].dist.kind);
    CHECK(back[i].dist.p1 == raw[i].dist.p1);
    CHECK(back[i].dist.p2 == raw[i].dist.p2);
    CHECK(back[i].k == raw[i].k);
  }
  std::remove(path.c_str());
}

TEST_CASE("instance parser skips comments and rejects junk") {
  const std::string path = temp_path("parse.txt");
  {
    std::ofstream out(path);
    out << "# header comment\n\n0 bernoulli 0.8\n1 uniform 0.3 0.6  # trailing\n";
  }
  auto raw = read_instance_file(path);
  REQUIRE(raw.size() == 2);
  CHECK(raw[0].dist.kind == DistKind::Bernoulli);
  CHECK(raw[0].dist.p1 == 0.8);
  CHECK(raw[1].dist.kind == DistKind::Uniform);
  CHECK(raw[1].k == 3);
  {
    std::ofstream out(path);
    out << "0 weibull 0.8\n";
  }
  CHECK_THROWS_AS(read_instance_file(path), PreconditionError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_instance_file(temp_path("missing.txt")), PreconditionError);
}

TEST_CASE("aggregation matches an independent recomputation") {
  ProblemInstance inst = generate_instance(Family::Bernoulli, 4, 11, 0.1, 0.05);
  ExperimentConfig cfg;
  cfg.replications = 5;
  cfg.seed = 99;
  CellResult cell = run_cell(inst, "SOGAS", "4", 0.1, cfg);
  REQUIRE(cell.runs.size() == 5);
  ExperimentRow row = aggregate(cell, "SOGAS", "4");

  double sum = 0.0;
  for (const auto& r : cell.runs) sum += double(r.ledger.total());
  double mean = sum / 5.0;
  double sq = 0.0;
  for (const auto& r : cell.runs) {
    double d = double(r.ledger.total()) - mean;
    sq += d * d;
  }
  double ci = 1.96 * std::sqrt(sq / 4.0) / std::sqrt(5.0);
  CHECK(row.mean_queries == doctest::Approx(mean).epsilon(1e-9));
  CHECK(row.ci95 == doctest::Approx(ci).epsilon(1e-9));
  CHECK(row.pcs >= 0.0);
  CHECK(row.pcs <= 1.0);
  CHECK(row.method == "SOGAS");
  CHECK(row.sweep_value == "4");

  cfg.replications = 1;
  CellResult one = run_cell(inst, "SOGAS", "4", 0.1, cfg);
  CHECK(aggregate(one, "SOGAS", "4").ci95 == 0.0);
}

TEST_CASE("single sweep emits one row per method") {
  ExperimentConfig cfg;
  cfg.sweep = SweepKind::Single;
  cfg.size = 4;
  cfg.replications = 3;
  cfg.seed = 5;
  auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "SOGAS");
  CHECK(rows[1].method == "CSOGAS");
  CHECK(rows[0].sweep_value == rows[1].sweep_value);
  CHECK(rows[0].mean_queries > 0.0);
  CHECK(rows[1].mean_queries > 0.0);
  CHECK(rows[0].queries_region > 0.0);
  CHECK(rows[0].queries_amplify > 0.0);
  CHECK(rows[1].queries_classical == doctest::Approx(rows[1].mean_queries));
}

TEST_CASE("csv emission matches the schema and round trips") {
  ExperimentConfig cfg;
  cfg.sweep = SweepKind::Single;
  cfg.size = 4;
  cfg.replications = 2;
  cfg.seed = 6;
  auto rows = run_sweep(cfg);
  const std::string path = temp_path("rows.csv");
  emit_csv(rows, path);
  std::string text = slurp(path);
  REQUIRE(!text.empty());
  CHECK(text.back() == '\n');
  std::istringstream is(text);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line ==
        "method,sweep_value,mean_queries,ci95,pcs,queries_region,queries_flag,"
        "queries_estimate,queries_amplify,queries_classical");
  int data_lines = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ++data_lines;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::string method, value;
    double nums[8];
    fields >> method >> value;
    for (double& v : nums) REQUIRE((fields >> v));
    const ExperimentRow& src = data_lines == 1 ? rows[0] : rows[1];
    CHECK(nums[0] == src.mean_queries);
    CHECK(nums[1] == src.ci95);
    CHECK(nums[2] == src.pcs);
    CHECK(nums[7] == src.queries_classical);
  }
  CHECK(data_lines == 2);
  CHECK_THROWS_AS(emit_csv({}, temp_path("empty.csv")), PreconditionError);
  CHECK_THROWS_AS(emit_csv(rows, "/nonexistent-dir/x.csv"), PreconditionError);
  std::remove(path.c_str());
}

TEST_CASE("identical configs produce byte identical csv files") {
  ExperimentConfig cfg;
  cfg.sweep = SweepKind::Single;
  cfg.size = 4;
  cfg.replications = 2;
  cfg.seed = 61;
  auto rows1 = run_sweep(cfg);
  auto rows2 = run_sweep(cfg);
  const std::string p1 = temp_path("det1.csv"), p2 = temp_path("det2.csv");
  emit_csv(rows1, p1);
  emit_csv(rows2, p2);
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("plot emission writes a chart and a data companion") {
  ExperimentConfig cfg;
  cfg.sweep = SweepKind::Size;
  cfg.sizes = {4, 8};
  cfg.replications = 2;
  cfg.seed = 62;
  auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 4);
  const std::string svg = temp_path("plot.svg");
  emit_plot(rows, cfg, svg);
  std::string chart = slurp(svg);
  CHECK(chart.rfind("<svg", 0) == 0);
  CHECK(chart.find("polyline") != std::string::npos);
  CHECK(chart.find("SOGAS") != std::string::npos);
  CHECK(chart.find("CSOGAS") != std::string::npos);

  const std::string dat = temp_path("plot.dat");
  std::string data = slurp(dat);
  std::istringstream is(data);
  std::string line;
  int data_lines = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string value;
    double m1, c1, m2, c2;
    REQUIRE((fields >> value >> m1 >> c1 >> m2 >> c2));
    CHECK(m1 > 0.0);
    CHECK(m2 > m1);  // classical baseline costs more
    ++data_lines;
  }
  CHECK(data_lines == 2);
  std::remove(svg.c_str());
  std::remove(dat.c_str());
}

TEST_CASE("distribution sweep renders grouped bars") {
  ExperimentConfig cfg;
  cfg.sweep = SweepKind::Distribution;
  cfg.families = {Family::Gaussian, Family::Uniform};
  cfg.size = 3;
  cfg.replications = 2;
  cfg.seed = 63;
  auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].sweep_value == "gaussian");
  CHECK(rows[2].sweep_value == "uniform");
  const std::string svg = temp_path("bars.svg");
  emit_plot(rows, cfg, svg);
  std::string chart = slurp(svg);
  CHECK(chart.rfind("<svg", 0) == 0);
  CHECK(chart.find("<rect") != std::string::npos);
  std::remove(svg.c_str());
  std::remove(temp_path("bars.dat").c_str());
}

}  // TEST_SUITE
