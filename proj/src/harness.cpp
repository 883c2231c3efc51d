#include "sogas/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace sogas {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw PreconditionError(msg);
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// rate of the reflected truncated exponential whose mean hits the target
double exponential_rate_for_mean(double target) {
  require(target > 0.5 && target < 1.0,
          "exponential generator: target mean must lie in (0.5, 1)");
  double lo = 1e-6, hi = 60.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (PerformanceDistribution::truncated_exponential(mid).mean() < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::string kind_name(DistKind kind) {
  switch (kind) {
    case DistKind::Bernoulli: return "bernoulli";
    case DistKind::TruncatedGaussian: return "gaussian";
    case DistKind::Uniform: return "uniform";
    case DistKind::TruncatedExponential: return "exponential";
  }
  return "?";
}

}  // namespace

Family family_from_string(const std::string& s) {
  if (s == "bernoulli") return Family::Bernoulli;
  if (s == "gaussian") return Family::Gaussian;
  if (s == "uniform") return Family::Uniform;
  if (s == "exponential") return Family::Exponential;
  throw PreconditionError("unknown family: " + s);
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Bernoulli: return "bernoulli";
    case Family::Gaussian: return "gaussian";
    case Family::Uniform: return "uniform";
    case Family::Exponential: return "exponential";
  }
  return "?";
}

std::vector<RawSolution> generate_raw(Family f, std::size_t size, std::uint64_t seed,
                                      const GeneratorConfig& cfg) {
  require(size >= 2, "generate_raw: size must be at least 2");
  std::mt19937_64 rng(seed);
  std::vector<RawSolution> raw(size);
  for (std::size_t i = 0; i < size; ++i) raw[i].id = int(i);

  auto spaced_target = [&](double lo, double hi, std::size_t i) {
    return lo + (hi - lo) * double(i) / double(size - 1);
  };

  switch (f) {
    case Family::Bernoulli: {
      // sorted uniforms with a guaranteed pairwise gap, then shuffled so the
      // best index is not positional
      const double span = cfg.bernoulli_hi - cfg.bernoulli_lo;
      const double spread = span - double(size - 1) * cfg.min_gap;
      require(spread > 0.0, "generate_raw: range too narrow for the minimum gap");
      std::vector<double> u(size);
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      for (double& v : u) v = uni(rng);
      std::sort(u.begin(), u.end());
      std::vector<double> means(size);
      for (std::size_t i = 0; i < size; ++i)
        means[i] = cfg.bernoulli_lo + double(i) * cfg.min_gap + spread * u[i];
      std::shuffle(means.begin(), means.end(), rng);
      for (std::size_t i = 0; i < size; ++i) {
        raw[i].dist = PerformanceDistribution::bernoulli(means[i]);
        raw[i].k = 1;
      }
      break;
    }
    case Family::Gaussian:
      for (std::size_t i = 0; i < size; ++i) {
        double center = spaced_target(cfg.gaussian_center_lo, cfg.gaussian_center_hi, i);
        raw[i].dist = PerformanceDistribution::truncated_gaussian(center, cfg.gaussian_sd);
        raw[i].k = cfg.k_continuous;
      }
      break;
    case Family::Uniform:
      for (std::size_t i = 0; i < size; ++i) {
        double mean = spaced_target(cfg.uniform_mean_lo, cfg.uniform_mean_hi, i);
        raw[i].dist =
            PerformanceDistribution::uniform(mean - cfg.uniform_halfwidth, mean + cfg.uniform_halfwidth);
        raw[i].k = cfg.k_continuous;
      }
      break;
    case Family::Exponential:
      for (std::size_t i = 0; i < size; ++i) {
        double mean = spaced_target(cfg.exponential_mean_lo, cfg.exponential_mean_hi, i);
        raw[i].dist =
            PerformanceDistribution::truncated_exponential(exponential_rate_for_mean(mean));
        raw[i].k = cfg.k_continuous;
      }
      break;
  }
  return raw;
}

ProblemInstance instantiate(const std::vector<RawSolution>& raw, double eps, double delta) {
  require(!raw.empty(), "instantiate: no solutions");
  ProblemInstance inst;
  inst.eps = eps;
  inst.delta = delta;
  inst.solutions.reserve(raw.size());
  for (const RawSolution& r : raw) {
    Solution s;
    s.id = r.id;
    s.table = discretize(r.dist, r.k);
    inst.solutions.push_back(std::move(s));
  }
  return inst;
}

ProblemInstance generate_instance(Family f, std::size_t size, std::uint64_t seed, double eps,
                                  double delta, const GeneratorConfig& cfg) {
  return instantiate(generate_raw(f, size, seed, cfg), eps, delta);
}

std::vector<RawSolution> read_instance_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_instance_file: cannot open " + path);
  std::vector<RawSolution> raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    int id;
    std::string kind;
    if (!(fields >> id >> kind)) {
      std::string rest;
      std::istringstream check(line);
      if (!(check >> rest)) continue;  // blank or comment-only line
      throw PreconditionError("read_instance_file: bad line " + std::to_string(lineno));
    }
    RawSolution r;
    r.id = id;
    double p1 = 0.0, p2 = 0.0;
    if (kind == "bernoulli") {
      require(bool(fields >> p1), "read_instance_file: bernoulli needs one parameter");
      r.dist = PerformanceDistribution::bernoulli(p1);
      r.k = 1;
    } else if (kind == "gaussian") {
      require(bool(fields >> p1 >> p2), "read_instance_file: gaussian needs two parameters");
      r.dist = PerformanceDistribution::truncated_gaussian(p1, p2);
      r.k = 3;
    } else if (kind == "uniform") {
      require(bool(fields >> p1 >> p2), "read_instance_file: uniform needs two parameters");
      r.dist = PerformanceDistribution::uniform(p1, p2);
      r.k = 3;
    } else if (kind == "exponential") {
      require(bool(fields >> p1), "read_instance_file: exponential needs one parameter");
      r.dist = PerformanceDistribution::truncated_exponential(p1);
      r.k = 3;
    } else {
      throw PreconditionError("read_instance_file: unknown kind '" + kind + "' on line " +
                              std::to_string(lineno));
    }
    raw.push_back(r);
  }
  require(!raw.empty(), "read_instance_file: no solutions in " + path);
  return raw;
}

void write_instance_file(const std::vector<RawSolution>& raw, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "write_instance_file: cannot write " + path);
  out << "# id kind p1 [p2]\n";
  for (const RawSolution& r : raw) {
    out << r.id << ' ' << kind_name(r.dist.kind) << ' ' << format_double(r.dist.p1);
    if (r.dist.kind == DistKind::TruncatedGaussian || r.dist.kind == DistKind::Uniform)
      out << ' ' << format_double(r.dist.p2);
    out << '\n';
  }
  require(out.good(), "write_instance_file: write failed for " + path);
}

std::uint64_t replication_seed(std::uint64_t base, const std::string& method,
                               const std::string& value, int rep) {
  return base ^ fnv1a64(method + "|" + value + "|" + std::to_string(rep));
}

std::uint64_t instance_seed(std::uint64_t base, const std::string& family, std::size_t size) {
  return base ^ fnv1a64("instance|" + family + "|" + std::to_string(size));
}

CellResult run_cell(const ProblemInstance& inst, const std::string& method,
                    const std::string& value, double eps, const ExperimentConfig& cfg) {
  require(cfg.replications >= 1, "run_cell: replications must be at least 1");
  require(method == "SOGAS" || method == "CSOGAS", "run_cell: unknown method " + method);

  const int reps = cfg.replications;
  CellResult cell;
  cell.runs.resize(std::size_t(reps));

  int workers = cfg.max_workers > 0 ? cfg.max_workers : int(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, reps));

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      for (int rep = w; rep < reps; rep += workers) {
        std::mt19937_64 rng(replication_seed(cfg.seed, method, value, rep));
        ProblemInstance local = inst;
        local.eps = eps;
        local.delta = cfg.delta;
        if (method == "SOGAS") {
          SubroutineBackend backend;
          backend.mode = cfg.backend;
          backend.cost_constant = cfg.cost_constant;
          backend.shots_per_round = cfg.shots_per_round;
          cell.runs[std::size_t(rep)] = sogas_run(local, backend, rng);
        } else {
          cell.runs[std::size_t(rep)] = csogas_run(local, cfg.classical, rng);
        }
      }
    } catch (...) {
      errors[std::size_t(w)] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return cell;
}

ExperimentRow aggregate(const CellResult& cell, const std::string& method,
                        const std::string& value) {
  require(!cell.runs.empty(), "aggregate: empty cell");
  const double n = double(cell.runs.size());
  ExperimentRow row;
  row.method = method;
  row.sweep_value = value;

  double sum = 0.0, correct = 0.0;
  double phase_sum[kPhaseCount] = {};
  for (const RunResult& r : cell.runs) {
    sum += double(r.ledger.total());
    correct += r.correct ? 1.0 : 0.0;
    for (int p = 0; p < kPhaseCount; ++p)
      phase_sum[p] += double(r.ledger.count(Phase(p)));
  }
  row.mean_queries = sum / n;
  row.pcs = correct / n;
  row.queries_region = phase_sum[int(Phase::optimal_region)] / n;
  row.queries_flag = phase_sum[int(Phase::flag_qae)] / n;
  row.queries_estimate = phase_sum[int(Phase::proportion_estimate)] / n;
  row.queries_amplify = phase_sum[int(Phase::amplify)] / n;
  row.queries_classical = phase_sum[int(Phase::classical_sampling)] / n;

  if (cell.runs.size() >= 2) {
    double sq = 0.0;
    for (const RunResult& r : cell.runs) {
      const double d = double(r.ledger.total()) - row.mean_queries;
      sq += d * d;
    }
    row.ci95 = 1.96 * std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
  }
  return row;
}

std::vector<ExperimentRow> run_sweep(const ExperimentConfig& cfg) {
  require(cfg.replications >= 1, "run_sweep: replications must be at least 1");
  require(cfg.eps > 0.0 && cfg.eps < 1.0, "run_sweep: eps must lie in (0, 1)");
  require(cfg.delta > 0.0 && cfg.delta < 1.0, "run_sweep: delta must lie in (0, 1)");

  struct Cell {
    std::string value;
    ProblemInstance inst;
    double eps;
  };
  std::vector<Cell> cells;

  switch (cfg.sweep) {
    case SweepKind::Size: {
      require(!cfg.sizes.empty(), "run_sweep: size sweep needs values");
      for (std::size_t s : cfg.sizes) {
        const std::uint64_t seed = instance_seed(cfg.seed, family_name(cfg.family), s);
        cells.push_back({std::to_string(s),
                         generate_instance(cfg.family, s, seed, cfg.eps, cfg.delta, cfg.generator),
                         cfg.eps});
      }
      break;
    }
    case SweepKind::Gap: {
      require(!cfg.inverse_gaps.empty(), "run_sweep: gap sweep needs values");
      const std::uint64_t seed = instance_seed(cfg.seed, family_name(cfg.family), cfg.size);
      ProblemInstance inst =
          generate_instance(cfg.family, cfg.size, seed, cfg.eps, cfg.delta, cfg.generator);
      for (int g : cfg.inverse_gaps) {
        require(g >= 2, "run_sweep: inverse gap must be at least 2");
        cells.push_back({std::to_string(g), inst, 1.0 / double(g)});
      }
      break;
    }
    case SweepKind::Distribution: {
      require(!cfg.families.empty(), "run_sweep: distribution sweep needs families");
      for (Family f : cfg.families) {
        const std::uint64_t seed = instance_seed(cfg.seed, family_name(f), cfg.size);
        cells.push_back({family_name(f),
                         generate_instance(f, cfg.size, seed, cfg.eps, cfg.delta, cfg.generator),
                         cfg.eps});
      }
      break;
    }
    case SweepKind::Single: {
      const std::uint64_t seed = instance_seed(cfg.seed, family_name(cfg.family), cfg.size);
      cells.push_back({std::to_string(cfg.size),
                       generate_instance(cfg.family, cfg.size, seed, cfg.eps, cfg.delta, cfg.generator),
                       cfg.eps});
      break;
    }
  }

  std::vector<ExperimentRow> rows;
  rows.reserve(cells.size() * 2);
  for (const Cell& cell : cells)
    for (const char* method : {"SOGAS", "CSOGAS"}) {
      CellResult result = run_cell(cell.inst, method, cell.value, cell.eps, cfg);
      rows.push_back(aggregate(result, method, cell.value));
    }
  return rows;
}

void emit_csv(const std::vector<ExperimentRow>& rows, const std::string& path) {
  require(!rows.empty(), "emit_csv: no rows");
  std::ofstream out(path);
  require(out.good(), "emit_csv: cannot write " + path);
  out << "method,sweep_value,mean_queries,ci95,pcs,queries_region,queries_flag,"
         "queries_estimate,queries_amplify,queries_classical\n";
  for (const ExperimentRow& r : rows) {
    out << r.method << ',' << r.sweep_value << ',' << format_double(r.mean_queries) << ','
        << format_double(r.ci95) << ',' << format_double(r.pcs) << ','
        << format_double(r.queries_region) << ',' << format_double(r.queries_flag) << ','
        << format_double(r.queries_estimate) << ',' << format_double(r.queries_amplify) << ','
        << format_double(r.queries_classical) << '\n';
  }
  require(out.good(), "emit_csv: write failed for " + path);
}

namespace {

struct PlotPoint {
  std::string label;
  double mean[2] = {0.0, 0.0};
  double ci[2] = {0.0, 0.0};
  bool seen[2] = {false, false};
};

std::vector<PlotPoint> pair_rows(const std::vector<ExperimentRow>& rows) {
  std::vector<PlotPoint> points;
  for (const ExperimentRow& r : rows) {
    PlotPoint* pt = nullptr;
    for (PlotPoint& p : points)
      if (p.label == r.sweep_value) pt = &p;
    if (!pt) {
      points.push_back({});
      points.back().label = r.sweep_value;
      pt = &points.back();
    }
    const int m = r.method == "SOGAS" ? 0 : 1;
    pt->mean[m] = r.mean_queries;
    pt->ci[m] = r.ci95;
    pt->seen[m] = true;
  }
  return points;
}

std::string dat_companion_path(const std::string& svg_path) {
  const std::size_t dot = svg_path.rfind('.');
  if (dot == std::string::npos || svg_path.find('/', dot) != std::string::npos)
    return svg_path + ".dat";
  return svg_path.substr(0, dot) + ".dat";
}

void append_f(std::string& out, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  out += buf;
}

}  // namespace

void emit_plot(const std::vector<ExperimentRow>& rows, const ExperimentConfig& cfg,
               const std::string& svg_path) {
  require(!rows.empty(), "emit_plot: no rows");
  const std::vector<PlotPoint> points = pair_rows(rows);
  require(!points.empty(), "emit_plot: no sweep values");

  {
    std::ofstream dat(dat_companion_path(svg_path));
    require(dat.good(), "emit_plot: cannot write " + dat_companion_path(svg_path));
    dat << "# sweep_value sogas_mean sogas_ci95 csogas_mean csogas_ci95\n";
    for (const PlotPoint& p : points)
      dat << p.label << ' ' << format_double(p.mean[0]) << ' ' << format_double(p.ci[0]) << ' '
          << format_double(p.mean[1]) << ' ' << format_double(p.ci[1]) << '\n';
    require(dat.good(), "emit_plot: write failed");
  }

  const bool bars = cfg.sweep == SweepKind::Distribution || cfg.sweep == SweepKind::Single;
  const double width = 720, height = 480;
  const double ml = 84, mr = 24, mt = 48, mb = 64;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double ymax = 0.0, ymin = 1e300;
  for (const PlotPoint& p : points)
    for (int m = 0; m < 2; ++m)
      if (p.seen[m]) {
        ymax = std::max(ymax, p.mean[m] + p.ci[m]);
        ymin = std::min(ymin, std::max(1.0, p.mean[m] - p.ci[m]));
      }
  if (ymax <= 0.0) ymax = 1.0;
  ymin = std::min(ymin, ymax / 2.0);
  const double ly_lo = std::floor(std::log10(ymin));
  const double ly_hi = std::ceil(std::log10(ymax));
  const double ly_span = std::max(1e-9, ly_hi - ly_lo);

  auto ypix = [&](double v) {
    const double t = (std::log10(std::max(v, std::pow(10.0, ly_lo))) - ly_lo) / ly_span;
    return mt + ph * (1.0 - std::min(1.0, std::max(0.0, t)));
  };
  auto xpix = [&](std::size_t i) {
    if (points.size() == 1) return ml + pw / 2.0;
    return ml + pw * (double(i) + 0.5) / double(points.size());
  };

  const char* color[2] = {"#1f77b4", "#d62728"};
  const char* series_name[2] = {"SOGAS", "CSOGAS"};
  const char* xlabel = cfg.sweep == SweepKind::Size          ? "solutions"
                       : cfg.sweep == SweepKind::Gap         ? "1/eps"
                       : cfg.sweep == SweepKind::Distribution ? "distribution family"
                                                              : "instance";

  std::string svg;
  append_f(svg,
           "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
           "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\">\n",
           width, height, width, height);
  append_f(svg, "<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", width, height);
  append_f(svg,
           "<text x=\"%g\" y=\"26\" font-size=\"16\" text-anchor=\"middle\">"
           "Mean oracle queries (95%% CI)</text>\n",
           width / 2.0);

  // frame and y grid at powers of ten
  append_f(svg, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
                "stroke=\"#333\"/>\n",
           ml, mt, pw, ph);
  for (double e = ly_lo; e <= ly_hi + 1e-9; e += 1.0) {
    const double y = ypix(std::pow(10.0, e));
    append_f(svg, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#ddd\"/>\n", ml, y,
             ml + pw, y);
    append_f(svg, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">1e%d</text>\n",
             ml - 6, y + 4, int(e));
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    append_f(svg, "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
             xpix(i), mt + ph + 18, points[i].label.c_str());
  append_f(svg, "<text x=\"%g\" y=\"%g\" font-size=\"13\" text-anchor=\"middle\">%s</text>\n",
           ml + pw / 2.0, height - 16, xlabel);

  for (int m = 0; m < 2; ++m) {
    if (bars) {
      const double bw = std::min(40.0, pw / (3.0 * double(points.size())));
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].seen[m]) continue;
        const double x = xpix(i) + (m == 0 ? -bw - 2 : 2);
        const double y = ypix(points[i].mean[m]);
        append_f(svg, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"%s\"/>\n", x, y,
                 bw, mt + ph - y, color[m]);
      }
    } else {
      std::string pts;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].seen[m]) continue;
        append_f(pts, "%g,%g ", xpix(i), ypix(points[i].mean[m]));
      }
      append_f(svg, "<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"2\"/>\n",
               pts.c_str(), color[m]);
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].seen[m]) continue;
        append_f(svg, "<circle cx=\"%g\" cy=\"%g\" r=\"3.5\" fill=\"%s\"/>\n", xpix(i),
                 ypix(points[i].mean[m]), color[m]);
      }
    }
    // error bars
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].seen[m] || points[i].ci[m] <= 0.0) continue;
      const double x = bars ? xpix(i) + (m == 0 ? -22.0 : 22.0) : xpix(i);
      const double yl = ypix(points[i].mean[m] - points[i].ci[m]);
      const double yh = ypix(points[i].mean[m] + points[i].ci[m]);
      append_f(svg, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#333\"/>\n", x, yl, x,
               yh);
      append_f(svg, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#333\"/>\n", x - 4, yl,
               x + 4, yl);
      append_f(svg, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#333\"/>\n", x - 4, yh,
               x + 4, yh);
    }
  }

  for (int m = 0; m < 2; ++m) {
    const double lx = ml + pw - 150, ly = mt + 16 + 20.0 * m;
    append_f(svg, "<rect x=\"%g\" y=\"%g\" width=\"14\" height=\"14\" fill=\"%s\"/>\n", lx,
             ly - 11, color[m]);
    append_f(svg, "<text x=\"%g\" y=\"%g\" font-size=\"12\">%s</text>\n", lx + 20, ly,
             series_name[m]);
  }
  svg += "</svg>\n";

  std::ofstream out(svg_path);
  require(out.good(), "emit_plot: cannot write " + svg_path);
  out << svg;
  require(out.good(), "emit_plot: write failed for " + svg_path);
}

}  // namespace sogas
