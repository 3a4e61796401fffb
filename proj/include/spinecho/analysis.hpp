// Higher-level analysis of echo surfaces: reparameterization by the
// correlation spread and immunity-factor extraction.
#ifndef SPINECHO_ANALYSIS_HPP
#define SPINECHO_ANALYSIS_HPP

#include <vector>

#include "spinecho/fitting.hpp"
#include "spinecho/otoc.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

// One fixed-tau normalized echo curve expressed against a substituted
// abscissa (the Hamming weight spread by default).
struct ReparameterizedCurve {
  double tau;
  std::vector<double> x;  // spread values, strictly increasing
  std::vector<double> f;  // normalized echo values
};

// Substitute x = spread(T) pointwise. `spread_curve` must be defined on the
// surface's T grid (same length). Only the strictly increasing prefix of the
// spread curve is kept (substitution needs injectivity); a prefix shorter
// than 2 points is an error.
std::vector<ReparameterizedCurve> reparameterize_otoc(const OtocSurface& surface,
                                                      const std::vector<double>& spread_curve);

struct ImmunityFactor {
  double tau;
  double kappa;     // inverse exponential decay rate vs spread
  double r_squared;
  bool unscrambled;  // kappa exceeds the system size: perturbation too weak
};

struct ImmunityOptions {
  double window_fraction = 0.2;  // keep points with f >= fraction * f_initial
  double system_size = 0.0;      // spin count used for the unscrambled flag
};

// kappa(tau) from exponential fits of each curve over its early-decay
// window. Curves with no decay get kappa = +infinity and the unscrambled
// flag.
std::vector<ImmunityFactor> scrambling_immunity_factor(
    const std::vector<ReparameterizedCurve>& curves, const ImmunityOptions& opts);

}  // namespace spinecho

#endif  // SPINECHO_ANALYSIS_HPP
