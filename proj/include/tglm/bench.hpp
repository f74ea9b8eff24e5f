#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tglm/glm.hpp"
#include "tglm/model.hpp"
#include "tglm/op_counter.hpp"
#include "tglm/staggered.hpp"

namespace tglm {

enum class Backend { tensor, staggered };

inline const char* to_string(Backend b) { return b == Backend::tensor ? "tensor" : "staggered"; }

struct ElementCount {
  std::uint64_t stored = 0;
  std::uint64_t nonzero = 0;

  friend bool operator==(const ElementCount&, const ElementCount&) = default;
};

/// Closed-form design storage. Nonzeros assume no regressor value is exactly 0.
inline ElementCount count_elements(Backend backend, std::size_t groups, std::size_t params,
                                   const std::vector<std::size_t>& samples_per_group) {
  const std::uint64_t total = std::accumulate(samples_per_group.begin(), samples_per_group.end(), std::uint64_t{0});
  const std::uint64_t k_max =
      samples_per_group.empty() ? 0 : *std::max_element(samples_per_group.begin(), samples_per_group.end());
  if (backend == Backend::staggered) return {total * params * groups, total * params};
  return {k_max * params * groups, total * params};
}

/// Storage measured on an actually built design.
inline ElementCount measure_elements(const Tensor& design) {
  ElementCount c;
  c.stored = design.size();
  for (double v : design.data()) c.nonzero += v != 0.0;
  return c;
}

/// Largest absolute difference scaled by the larger infinity norm of the two.
inline double max_relative_deviation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  if (diff == 0.0) return 0.0;
  return scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
}

inline constexpr double equivalence_tolerance = 1e-9;

/// Seeded grouped regression data: regressors uniform on [-1, 1], true
/// coefficients uniform on [-2, 2] per group, unit-variance Gaussian noise.
inline Dataset synthetic_dataset(std::uint64_t seed, const std::vector<std::size_t>& samples_per_group,
                                 std::size_t regressors) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset d;
  d.group_count = samples_per_group.size();
  d.regressor_count = regressors;
  std::vector<std::vector<double>> truth(d.group_count, std::vector<double>(regressors + 1));
  for (auto& t : truth) {
    for (auto& v : t) v = coef(rng);
  }
  for (std::size_t g = 0; g < d.group_count; ++g) {
    for (std::size_t k = 0; k < samples_per_group[g]; ++k) {
      std::vector<double> x(regressors);
      double y = truth[g][0];
      for (std::size_t j = 0; j < regressors; ++j) {
        x[j] = unit(rng);
        y += truth[g][j + 1] * x[j];
      }
      d.outcome.push_back(y + noise(rng));
      d.regressors.push_back(std::move(x));
      d.group.push_back(g);
    }
  }
  return d;
}

struct SweepPoint {
  std::size_t groups;
  std::size_t regressors;
  std::size_t samples;  ///< per group
};

struct BenchConfig {
  std::vector<std::size_t> groups{1, 2, 4, 8};
  std::vector<std::size_t> regressors{1};
  std::vector<std::size_t> samples{32};
  std::uint64_t seed = 7;
  std::size_t repetitions = 3;
  /// Optional hook applied to each generated dataset (fault injection in tests).
  std::function<void(Dataset&, const SweepPoint&)> perturb;
};

struct BenchRow {
  SweepPoint point{};
  Backend backend = Backend::tensor;
  ElementCount elements;
  ElementCount closed_form;
  OpCounter fit_ops;
  OpCounter solve_ops;
  double median_seconds = 0.0;
  double beta_deviation = 0.0;
  bool failed = false;
  std::string status = "ok";
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::uint64_t point_seed(std::uint64_t seed, const SweepPoint& pt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(pt.groups), static_cast<std::uint32_t>(pt.regressors),
                    static_cast<std::uint32_t>(pt.samples)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct BackendRun {
  std::vector<double> beta;  ///< parameter-major flat layout
  OpCounter fit_ops;
  OpCounter solve_ops;
  ElementCount elements;
};

inline BackendRun run_tensor(const Dataset& d) {
  BackendRun r;
  auto [x, y] = build_design(d);
  r.elements = measure_elements(x.values);
  OpCounter assemble;
  auto res = fit_detailed(x, y, FitCounters{&assemble, &r.solve_ops});
  r.fit_ops = assemble;
  r.fit_ops += r.solve_ops;
  r.beta = beta_to_flat(res.beta);
  return r;
}

inline BackendRun run_staggered(const Dataset& d) {
  BackendRun r;
  const auto sys = build_staggered(d);
  r.elements = measure_elements(sys.design);
  OpCounter assemble;
  auto res = fit_staggered_detailed(sys, FitCounters{&assemble, &r.solve_ops});
  r.fit_ops = assemble;
  r.fit_ops += r.solve_ops;
  r.beta = std::move(res.coef);
  return r;
}

}  // namespace detail

/**
 * Sweeps every (groups, regressors, samples) combination, fitting the same
 * synthetic data with both backends. Counts are exact and identical across
 * repetitions; wall time is the median over repetitions. A failing point is
 * flagged in its rows and the sweep moves on.
 */
inline BenchReport run_benchmark(const BenchConfig& cfg) {
  if (cfg.repetitions < 1) throw Error(ErrorKind::shape_mismatch, "repetitions must be >= 1");
  BenchReport report;
  for (auto groups : cfg.groups) {
    for (auto regressors : cfg.regressors) {
      for (auto samples : cfg.samples) {
        const SweepPoint pt{groups, regressors, samples};
        const std::vector<std::size_t> n(groups, samples);
        Dataset d = synthetic_dataset(detail::point_seed(cfg.seed, pt), n, regressors);
        if (cfg.perturb) cfg.perturb(d, pt);

        BenchRow rows[2];
        detail::BackendRun runs[2];
        for (int b = 0; b < 2; ++b) {
          auto& row = rows[b];
          row.point = pt;
          row.backend = b == 0 ? Backend::tensor : Backend::staggered;
          row.closed_form = count_elements(row.backend, groups, regressors + 1, n);
          std::vector<double> times;
          try {
            for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
              const auto t0 = std::chrono::steady_clock::now();
              auto run = b == 0 ? detail::run_tensor(d) : detail::run_staggered(d);
              const auto t1 = std::chrono::steady_clock::now();
              times.push_back(std::chrono::duration<double>(t1 - t0).count());
              if (rep > 0 && (run.fit_ops != runs[b].fit_ops || run.solve_ops != runs[b].solve_ops)) {
                row.failed = true;
                row.status = "FAILED: counts differ across repetitions";
              }
              runs[b] = std::move(run);
            }
            row.elements = runs[b].elements;
            row.fit_ops = runs[b].fit_ops;
            row.solve_ops = runs[b].solve_ops;
            row.median_seconds = detail::median(times);
          } catch (const Error& e) {
            row.failed = true;
            row.status = std::string("FAILED: ") + e.what();
          }
        }

        if (!rows[0].failed && !rows[1].failed) {
          const double dev = max_relative_deviation(runs[0].beta, runs[1].beta);
          for (auto& row : rows) {
            row.beta_deviation = dev;
            if (!(dev < equivalence_tolerance)) {
              row.failed = true;
              row.status = "FAILED: beta deviation above tolerance";
            }
          }
        } else {
          for (auto& row : rows) row.beta_deviation = std::nan("");
        }
        report.rows.push_back(rows[0]);
        report.rows.push_back(rows[1]);
      }
    }
  }
  return report;
}

inline const std::vector<std::string>& bench_csv_header() {
  static const std::vector<std::string> header{
      "groups",   "regressors", "samples",     "backend",         "stored",         "nonzero",
      "fit_mul",  "fit_add",    "fit_div",     "fit_flops",       "solve_flops",    "median_seconds",
      "beta_dev", "status"};
  return header;
}

inline void write_bench_csv(std::ostream& os, const BenchReport& report) {
  const auto& header = bench_csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : report.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    os << r.point.groups << ',' << r.point.regressors << ',' << r.point.samples << ',' << to_string(r.backend) << ','
       << r.elements.stored << ',' << r.elements.nonzero << ',' << r.fit_ops.multiplies << ',' << r.fit_ops.adds << ','
       << r.fit_ops.divides << ',' << r.fit_ops.total() << ',' << r.solve_ops.total() << ',' << std::setprecision(6)
       << std::scientific << r.median_seconds << ',' << std::setprecision(3) << r.beta_deviation << std::defaultfloat
       << ',' << status << '\n';
  }
}

inline void write_bench_table(std::ostream& os, const BenchReport& report) {
  os << std::left << std::setw(7) << "groups" << std::setw(5) << "r" << std::setw(8) << "n" << std::setw(11)
     << "backend" << std::right << std::setw(10) << "stored" << std::setw(10) << "nonzero" << std::setw(12)
     << "fit_flops" << std::setw(12) << "solve_flops" << std::setw(13) << "median_us" << std::setw(11) << "beta_dev"
     << "  status\n";
  for (const auto& r : report.rows) {
    std::ostringstream dev;
    dev << std::setprecision(2) << std::scientific << r.beta_deviation;
    std::ostringstream us;
    us << std::fixed << std::setprecision(1) << r.median_seconds * 1e6;
    os << std::left << std::setw(7) << r.point.groups << std::setw(5) << r.point.regressors << std::setw(8)
       << r.point.samples << std::setw(11) << to_string(r.backend) << std::right << std::setw(10) << r.elements.stored
       << std::setw(10) << r.elements.nonzero << std::setw(12) << r.fit_ops.total() << std::setw(12)
       << r.solve_ops.total() << std::setw(13) << us.str() << std::setw(11) << dev.str() << "  " << r.status << '\n';
  }
}

}  // namespace tglm
