// Out-of-time-order echo: evolve under the system-environment coupling,
// scramble the environment for a window tau, reverse, and overlap with the
// initial state.
#ifndef SPINECHO_OTOC_HPP
#define SPINECHO_OTOC_HPP

#include <utility>
#include <vector>

#include "spinecho/geometry.hpp"
#include "spinecho/operators.hpp"
#include "spinecho/spin_system.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

struct OtocPoint {
  double t;
  double tau;
  double f;
  int orientation_index;  // -1 for ensemble-averaged values
};

enum class OtocNormalization {
  pointwise,  // each tau row divided by the tau = 0 row at the same T
  scalar,     // each tau row divided by the mean of the tau = 0 row
};

// F over a (tau x T) grid, raw and normalized to the tau = 0 reference row.
// The reference row is always computed internally, so normalization works
// whether or not 0 is part of tau_grid.
class OtocSurface {
 public:
  OtocSurface(std::vector<double> t_grid, std::vector<double> tau_grid, RMatrix raw,
              RVector reference_row, OtocNormalization mode);

  const std::vector<double>& t_grid() const { return t_grid_; }
  const std::vector<double>& tau_grid() const { return tau_grid_; }
  const RMatrix& raw() const { return raw_; }                // tau x T
  const RMatrix& normalized() const { return normalized_; }  // tau x T
  OtocNormalization mode() const { return mode_; }
  OtocPoint point(size_t tau_index, size_t t_index) const;

 private:
  std::vector<double> t_grid_;
  std::vector<double> tau_grid_;
  RMatrix raw_;
  RMatrix normalized_;
  OtocNormalization mode_;
};

// Dense-propagation echo amplitude
//   F = Tr[rho(2T+tau) rho(0)] * 2^(N+1),
//   rho(2T+tau) = A rho(0) A^dag,  A = U_SE^dag(T) U_E(tau) U_SE(T),
// normalized so tau = 0 gives exactly 1. Real part returned; an imaginary
// residue above 1e-10 raises NumericError.
double otoc(const CouplingSet& c, double t, double tau, const SpinSystem& sys,
            const TogglingParams& tog);

// Both sides of Re F = 1 - <[W,V]^dag [W,V]> / 2 with V = sX^cs x 1 and
// <.> = Tr[.]/2^(N+1), computed independently: {trace form, commutator form}.
std::pair<double, double> otoc_commutator_check(const CouplingSet& c, double t, double tau,
                                                const SpinSystem& sys,
                                                const TogglingParams& tog);

// Environment-space evaluation of the same quantity for one orientation's
// couplings, reusing a single eigendecomposition of the environment
// Hamiltonian across the whole (T, tau) grid. Exactly equal to otoc() up to
// floating point; used by ensemble_otoc.
RMatrix otoc_grid(const CouplingSet& c, const std::vector<double>& t_grid,
                  const std::vector<double>& tau_grid, const SpinSystem& sys,
                  const TogglingParams& tog, EnvTerms terms = EnvTerms::full);

// Powder-averaged surface, normalized per the chosen mode. Deterministic for
// a fixed seed and any thread count.
OtocSurface ensemble_otoc(const EnsembleSpec& spec, const std::vector<double>& t_grid,
                          const std::vector<double>& tau_grid, const TogglingParams& tog,
                          OtocNormalization mode = OtocNormalization::pointwise,
                          EnvTerms terms = EnvTerms::full, unsigned n_threads = 0);

}  // namespace spinecho

#endif  // SPINECHO_OTOC_HPP
