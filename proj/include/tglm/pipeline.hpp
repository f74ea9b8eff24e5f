#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tglm/bench.hpp"
#include "tglm/glm.hpp"
#include "tglm/hypothesis.hpp"
#include "tglm/io.hpp"
#include "tglm/staggered.hpp"

namespace tglm {

enum class BackendChoice { tensor, staggered, both };

inline const char* to_string(BackendChoice b) {
  switch (b) {
    case BackendChoice::tensor: return "tensor";
    case BackendChoice::staggered: return "staggered";
    case BackendChoice::both: return "both";
  }
  return "?";
}

struct AnalysisOptions {
  BackendChoice backend = BackendChoice::both;
  bool f_test = false;
  /// Test hook: nudges the named backend's coefficients so the cross-check trips.
  std::optional<Backend> inject_fault;
};

/// Raised when the two backends disagree beyond the equivalence tolerance.
class CrossCheckFailure : public std::runtime_error {
 public:
  CrossCheckFailure(const std::string& what, RunReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const RunReport& report() const noexcept { return report_; }

 private:
  RunReport report_;
};

struct BackendResult {
  BetaTensor beta;
  VarianceEstimate variance;
  std::optional<HypothesisResult> hypotheses;
};

namespace detail {

inline void nudge(BetaTensor& beta) {
  std::vector<double> v(beta.values.data().begin(), beta.values.data().end());
  v[0] = v[0] * (1.0 + 1e-6) + 1e-6;
  beta.values = Tensor(beta.values.shape(), std::move(v));
}

inline BackendResult analyse_tensor(const Dataset& data, const ContrastTensor* contrasts, bool f_test, bool fault) {
  auto [x, y] = build_design(data);
  auto fitted = fit_detailed(x, y);
  if (fault) nudge(fitted.beta);
  const auto n = residuals(x, fitted.beta, y);
  BackendResult out{fitted.beta, estimate_variance(n, x.params()), std::nullopt};
  if (contrasts) {
    auto h = t_statistics(*contrasts, fitted.beta, fitted.inverse, out.variance);
    if (f_test) {
      h.f = f_statistic(*contrasts, fitted.beta, fitted.inverse, out.variance);
      h.f_p = f_pvalue(*h.f, static_cast<long long>(contrasts->hypotheses()), h.df);
    }
    out.hypotheses = std::move(h);
  }
  return out;
}

inline BackendResult analyse_staggered(const Dataset& data, const ContrastTensor* contrasts, bool f_test, bool fault) {
  const auto sys = build_staggered(data);
  auto fitted = fit_staggered_detailed(sys);
  if (fault) {
    fitted.coef[0] = fitted.coef[0] * (1.0 + 1e-6) + 1e-6;
  }
  BackendResult out{flat_to_beta(fitted.coef, sys.params, sys.groups), {}, std::nullopt};
  if (fitted.df < 1) throw Error(ErrorKind::no_degrees_of_freedom, "residual degrees of freedom < 1");

  // Per-group residual variances from the flat residual vector.
  const auto cols = sys.cols();
  out.variance.df = fitted.df;
  out.variance.pooled = fitted.sigma2;
  out.variance.rss.assign(sys.groups, 0.0);
  std::vector<long long> counts(sys.groups, 0);
  for (std::size_t k = 0; k < sys.rows(); ++k) {
    double f = 0.0;
    for (std::size_t j = 0; j < cols; ++j) f += sys.design.data()[k * cols + j] * fitted.coef[j];
    const double e = sys.outcome[k] - f;
    out.variance.rss[sys.group[k]] += e * e;
    ++counts[sys.group[k]];
  }
  for (std::size_t g = 0; g < sys.groups; ++g) {
    const auto df_g = counts[g] - static_cast<long long>(sys.params);
    out.variance.per_group.push_back(df_g > 0 ? out.variance.rss[g] / static_cast<double>(df_g) : std::nan(""));
  }

  if (contrasts) {
    auto h = staggered_t_statistics(*contrasts, fitted);
    if (f_test) {
      h.f = staggered_f_statistic(*contrasts, fitted);
      h.f_p = f_pvalue(*h.f, static_cast<long long>(contrasts->hypotheses()), h.df);
    }
    out.hypotheses = std::move(h);
  }
  return out;
}

inline void fill_report(RunReport& r, const BackendResult& res) {
  const auto p = res.beta.params();
  const auto groups = res.beta.groups();
  r.beta.assign(groups, std::vector<double>(p));
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t a = 0; a < p; ++a) r.beta[g][a] = res.beta.values.data()[a * groups + g];
  }
  r.sigma2 = res.variance.pooled;
  r.sigma2_per_group = res.variance.per_group;
  r.df = res.variance.df;
  r.hypotheses.clear();
  if (res.hypotheses) {
    const auto& h = *res.hypotheses;
    for (std::size_t i = 0; i < h.t.size(); ++i) r.hypotheses.push_back({h.g[i], h.t[i], h.standard_error[i], h.p[i]});
    r.f = h.f;
    r.f_p = h.f_p;
  }
}

}  // namespace detail

/**
 * Fits the model (and tests contrasts when given) on the selected backend.
 * With BackendChoice::both the tensor result is reported and the staggered
 * result must agree on beta and t within 1e-9 relative, otherwise
 * CrossCheckFailure is thrown carrying the partial report.
 */
inline RunReport run_analysis(const LoadedData& loaded, const std::vector<std::string>& param_names,
                              const ContrastTensor* contrasts, const AnalysisOptions& opt) {
  RunReport r;
  r.command = contrasts ? "test" : "fit";
  r.backend = to_string(opt.backend);
  r.params = param_names;
  r.groups = loaded.group_labels;

  const bool fault_tensor = opt.inject_fault == Backend::tensor;
  const bool fault_staggered = opt.inject_fault == Backend::staggered;

  if (opt.backend == BackendChoice::staggered) {
    detail::fill_report(r, detail::analyse_staggered(loaded.data, contrasts, opt.f_test, fault_staggered));
    return r;
  }
  const auto tensor = detail::analyse_tensor(loaded.data, contrasts, opt.f_test, fault_tensor);
  detail::fill_report(r, tensor);
  if (opt.backend == BackendChoice::tensor) return r;

  const auto stag = detail::analyse_staggered(loaded.data, contrasts, opt.f_test, fault_staggered);
  r.beta_deviation = max_relative_deviation(tensor.beta.values.data(), stag.beta.values.data());
  if (tensor.hypotheses) r.t_deviation = max_relative_deviation(tensor.hypotheses->t, stag.hypotheses->t);

  if (!(*r.beta_deviation < equivalence_tolerance) || (r.t_deviation && !(*r.t_deviation < equivalence_tolerance))) {
    std::ostringstream os;
    os << "backends disagree: beta deviation " << *r.beta_deviation;
    if (r.t_deviation) os << ", t deviation " << *r.t_deviation;
    os << " (tolerance " << equivalence_tolerance << ")";
    throw CrossCheckFailure(os.str(), r);
  }
  return r;
}

struct EquivalenceCase {
  std::size_t groups = 0;
  std::size_t regressors = 0;
  std::vector<std::size_t> samples;
  double beta_deviation = 0.0;
  double t_deviation = 0.0;
  bool passed = false;
};

/// Random ragged instance for equivalence checks: G in [1, 4], r in [0, 2],
/// n_g in [5, 50].
inline Dataset random_instance(std::mt19937_64& rng, std::size_t& groups, std::size_t& regressors,
                               std::vector<std::size_t>& samples) {
  groups = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
  regressors = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
  samples.assign(groups, 0);
  for (auto& n : samples) n = std::uniform_int_distribution<std::size_t>(5, 50)(rng);
  return synthetic_dataset(rng(), samples, regressors);
}

/// Contrast with one slope-difference style row per parameter plus a dense
/// random row; every row is nonzero by construction.
inline ContrastTensor random_contrast(std::mt19937_64& rng, std::size_t params, std::size_t groups) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t h = 2;
  std::vector<double> c(h * params * groups, 0.0);
  c[(0 * params + params - 1) * groups + 0] = 1.0;
  if (groups > 1) c[(0 * params + params - 1) * groups + 1] = -1.0;
  for (std::size_t i = params * groups; i < c.size(); ++i) c[i] = u(rng);
  c[params * groups] = 1.0 + std::abs(c[params * groups]);
  return ContrastTensor(Tensor({h, params, groups}, std::move(c)));
}

/// Tensor vs staggered beta and t on seeded random instances.
inline std::vector<EquivalenceCase> run_equivalence_suite(std::uint64_t seed, std::size_t instances) {
  std::mt19937_64 rng(seed);
  std::vector<EquivalenceCase> out;
  for (std::size_t i = 0; i < instances; ++i) {
    EquivalenceCase c;
    const Dataset d = random_instance(rng, c.groups, c.regressors, c.samples);
    const auto contrast = random_contrast(rng, c.regressors + 1, c.groups);
    const auto tensor = detail::analyse_tensor(d, &contrast, false, false);
    const auto stag = detail::analyse_staggered(d, &contrast, false, false);
    c.beta_deviation = max_relative_deviation(tensor.beta.values.data(), stag.beta.values.data());
    c.t_deviation = max_relative_deviation(tensor.hypotheses->t, stag.hypotheses->t);
    c.passed = c.beta_deviation < equivalence_tolerance && c.t_deviation < equivalence_tolerance;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace tglm
