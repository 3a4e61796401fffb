// Least-squares decay fits used by the analysis pipelines.
#ifndef SPINECHO_FITTING_HPP
#define SPINECHO_FITTING_HPP

#include <cmath>
#include <vector>

#include "spinecho/types.hpp"

namespace spinecho {

enum class FitFamily { gaussian, exponential };

// Result of fitting y = A exp(-x/lambda) (exponential) or
// y = A exp(-x^2 / (2 w^2)) (gaussian). `scale` is lambda or w; data with no
// decay gets scale = +infinity with the amplitude at the data mean.
struct FitResult {
  FitFamily family;
  double amplitude;
  double scale;
  double residual_norm;  // L2 norm of residuals in linear space
  double r_squared;

  bool scale_is_finite() const { return std::isfinite(scale); }
};

// Least squares in linear space, initialized by a log-space regression and
// refined with damped Gauss-Newton steps. Requires >= 4 points with positive
// values; throws std::invalid_argument otherwise.
FitResult fit_gaussian(const std::vector<double>& x, const std::vector<double>& y);
FitResult fit_exponential(const std::vector<double>& x, const std::vector<double>& y);

// Ordinary least squares y = a + b x; used for model comparisons.
struct LinearFit {
  double intercept;
  double slope;
  double residual_norm;
  double r_squared;
};
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spinecho

#endif  // SPINECHO_FITTING_HPP
