#include "spinecho/analysis.hpp"

#include <cmath>
#include <limits>

namespace spinecho {

std::vector<ReparameterizedCurve> reparameterize_otoc(const OtocSurface& surface,
                                                      const std::vector<double>& spread_curve) {
  const std::vector<double>& t_grid = surface.t_grid();
  if (spread_curve.size() != t_grid.size()) {
    throw std::invalid_argument("reparameterize_otoc: spread curve does not match the T grid");
  }
  // strictly increasing prefix = injective window
  size_t window = 1;
  while (window < spread_curve.size() && spread_curve[window] > spread_curve[window - 1]) {
    ++window;
  }
  if (window < 2) {
    throw std::invalid_argument("reparameterize_otoc: spread curve is not increasing anywhere");
  }

  std::vector<ReparameterizedCurve> out;
  out.reserve(surface.tau_grid().size());
  for (size_t r = 0; r < surface.tau_grid().size(); ++r) {
    ReparameterizedCurve curve;
    curve.tau = surface.tau_grid()[r];
    curve.x.assign(spread_curve.begin(), spread_curve.begin() + static_cast<long>(window));
    curve.f.reserve(window);
    for (size_t i = 0; i < window; ++i) {
      curve.f.push_back(surface.normalized()(static_cast<Eigen::Index>(r),
                                             static_cast<Eigen::Index>(i)));
    }
    out.push_back(std::move(curve));
  }
  return out;
}

std::vector<ImmunityFactor> scrambling_immunity_factor(
    const std::vector<ReparameterizedCurve>& curves, const ImmunityOptions& opts) {
  if (!(opts.window_fraction > 0.0) || !(opts.window_fraction < 1.0)) {
    throw std::invalid_argument("scrambling_immunity_factor: bad window fraction");
  }
  std::vector<ImmunityFactor> out;
  out.reserve(curves.size());
  for (const auto& curve : curves) {
    if (curve.f.empty()) throw std::invalid_argument("scrambling_immunity_factor: empty curve");
    const double floor = opts.window_fraction * curve.f.front();
    std::vector<double> x, y;
    for (size_t i = 0; i < curve.f.size(); ++i) {
      if (curve.f[i] >= floor && curve.f[i] > 0.0) {
        x.push_back(curve.x[i]);
        y.push_back(curve.f[i]);
      } else {
        break;  // early-decay window only
      }
    }
    ImmunityFactor factor{curve.tau, std::numeric_limits<double>::infinity(), 1.0, true};
    if (x.size() >= 4) {
      const FitResult fit = fit_exponential(x, y);
      factor.kappa = fit.scale;
      factor.r_squared = fit.r_squared;
    }
    factor.unscrambled =
        !std::isfinite(factor.kappa) || (opts.system_size > 0.0 && factor.kappa > opts.system_size);
    out.push_back(factor);
  }
  return out;
}

}  // namespace spinecho
