#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sogas/csogas.hpp"

namespace sogas {

enum class Family { Bernoulli, Gaussian, Uniform, Exponential };

Family family_from_string(const std::string& s);
std::string family_name(Family f);

struct GeneratorConfig {
  double bernoulli_lo = 0.78;
  double bernoulli_hi = 0.85;
  double min_gap = 1e-4;  // minimum pairwise mean separation after jitter
  double gaussian_sd = 0.08;
  double gaussian_center_lo = 0.46;
  double gaussian_center_hi = 0.80;
  double uniform_mean_lo = 0.50;
  double uniform_mean_hi = 0.81;
  double uniform_halfwidth = 0.15;
  double exponential_rate = 2.5;  // default rate for hand-written instances
  double exponential_mean_lo = 0.62;
  double exponential_mean_hi = 0.83;
  int k_continuous = 3;  // Bernoulli uses exact two-point support (k = 1)
};

struct RawSolution {
  int id = 0;
  PerformanceDistribution dist;
  int k = 1;
};

std::vector<RawSolution> generate_raw(Family f, std::size_t size, std::uint64_t seed,
                                      const GeneratorConfig& cfg = {});
ProblemInstance instantiate(const std::vector<RawSolution>& raw, double eps, double delta);
ProblemInstance generate_instance(Family f, std::size_t size, std::uint64_t seed, double eps,
                                  double delta, const GeneratorConfig& cfg = {});

// Lines are "id kind p1 [p2]"; '#' starts a comment.
std::vector<RawSolution> read_instance_file(const std::string& path);
void write_instance_file(const std::vector<RawSolution>& raw, const std::string& path);

enum class SweepKind { Size, Gap, Distribution, Single };

struct ExperimentConfig {
  SweepKind sweep = SweepKind::Size;
  std::vector<std::size_t> sizes = {5, 10, 15, 20, 25};
  std::vector<int> inverse_gaps = {5, 10, 15, 20, 25};
  std::vector<Family> families = {Family::Gaussian, Family::Uniform, Family::Exponential};
  Family family = Family::Bernoulli;  // size/gap/single sweeps
  std::size_t size = 10;              // gap/distribution/single sweeps
  double eps = 0.1;
  double delta = 0.05;
  int replications = 30;
  std::uint64_t seed = 1;
  BackendMode backend = BackendMode::Contract;
  double cost_constant = 1.0;
  int shots_per_round = 100;
  GeneratorConfig generator;
  ClassicalEstimatorConfig classical;
  int max_workers = 0;  // 0: hardware concurrency
};

struct ExperimentRow {
  std::string method;       // SOGAS or CSOGAS
  std::string sweep_value;  // number or family name
  double mean_queries = 0.0;
  double ci95 = 0.0;
  double pcs = 0.0;
  double queries_region = 0.0;
  double queries_flag = 0.0;
  double queries_estimate = 0.0;
  double queries_amplify = 0.0;
  double queries_classical = 0.0;
};

std::uint64_t replication_seed(std::uint64_t base, const std::string& method,
                               const std::string& value, int rep);
std::uint64_t instance_seed(std::uint64_t base, const std::string& family, std::size_t size);

struct CellResult {
  std::vector<RunResult> runs;
};

CellResult run_cell(const ProblemInstance& inst, const std::string& method,
                    const std::string& value, double eps, const ExperimentConfig& cfg);
ExperimentRow aggregate(const CellResult& cell, const std::string& method,
                        const std::string& value);

std::vector<ExperimentRow> run_sweep(const ExperimentConfig& cfg);

void emit_csv(const std::vector<ExperimentRow>& rows, const std::string& path);

// Standalone SVG chart plus a whitespace-separated .dat companion next to it.
void emit_plot(const std::vector<ExperimentRow>& rows, const ExperimentConfig& cfg,
               const std::string& svg_path);

}  // namespace sogas
