// Fits a two-group, one-regressor model and tests whether the slopes differ.

#include <iostream>

#include "tglm/tglm.hpp"

int main() {
  tglm::Dataset data;
  data.group_count = 2;
  data.regressor_count = 1;
  const double xs[] = {0.0, 1.0, 2.0, 3.0, 4.0};
  const double noise[] = {0.1, -0.2, 0.05, 0.15, -0.1};
  for (std::size_t g = 0; g < 2; ++g) {
    for (std::size_t i = 0; i < 5; ++i) {
      const double slope = g == 0 ? 2.0 : 2.5;
      data.outcome.push_back(1.0 + slope * xs[i] + noise[(i + g) % 5]);
      data.regressors.push_back({xs[i]});
      data.group.push_back(g);
    }
  }

  auto [x, y] = tglm::build_design(data);
  const auto fitted = tglm::fit_detailed(x, y);
  const auto variance = tglm::estimate_variance(tglm::residuals(x, fitted.beta, y), x.params());

  // C[h, a, g]: one hypothesis, slope of group 0 minus slope of group 1.
  const tglm::ContrastTensor slope_difference(tglm::Tensor({1, 2, 2}, {0, 0, 1, -1}));
  const auto result = tglm::t_statistics(slope_difference, fitted.beta, fitted.inverse, variance);

  for (std::size_t g = 0; g < 2; ++g) {
    std::cout << "group " << g << ": intercept " << fitted.beta.values(0, g) << ", slope " << fitted.beta.values(1, g)
              << '\n';
  }
  std::cout << "slope difference g = " << result.g[0] << ", t = " << result.t[0] << ", p = " << result.p[0]
            << " (df " << result.df << ")\n";
}
