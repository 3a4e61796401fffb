// Echo experiment with phase encoding: signal, correlation-order spectra,
// cluster-size weights and the Hamming weight spread.
#ifndef SPINECHO_MCD_HPP
#define SPINECHO_MCD_HPP

#include <vector>

#include "spinecho/geometry.hpp"
#include "spinecho/operators.hpp"
#include "spinecho/spin_system.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

// Equally spaced encoding angles phi_m = 2 pi m / M. Resolving all orders
// |n| <= N without aliasing requires M >= 2N + 2 (checked at extraction).
class PhaseGrid {
 public:
  explicit PhaseGrid(int m);
  int size() const { return m_; }
  double angle(int k) const { return 2.0 * M_PI * static_cast<double>(k) / m_; }

 private:
  int m_;
};

// |C_n|^2 for n = -N..N at a fixed evolution time. Amplitudes within
// -1e-9 of zero are clipped; anything more negative raises NumericError.
// The sum over orders is 1 within 1e-9 for per-orientation spectra, and
// averaging preserves both properties.
class OrderSpectrum {
 public:
  OrderSpectrum(int n_env, double t, RVector amplitudes);

  int n_env() const { return n_env_; }
  double t() const { return t_; }
  double amp(int order) const { return amplitudes_(order + n_env_); }
  const RVector& amplitudes() const { return amplitudes_; }  // index 0 is order -N
  double sum() const { return amplitudes_.sum(); }

 private:
  int n_env_;
  double t_;
  RVector amplitudes_;
};

// Probability p(n) that exactly n environment spins are correlated with the
// central spin.
class ClusterWeights {
 public:
  ClusterWeights(double t, RVector probabilities);

  double t() const { return t_; }
  double p(int n) const { return probabilities_(n); }
  int n_env() const { return static_cast<int>(probabilities_.size()) - 1; }
  const RVector& probabilities() const { return probabilities_; }
  double mean() const;

 private:
  double t_;
  RVector probabilities_;
};

// Closed-form echo signal for the commuting heteronuclear coupling:
//   S_phi(2T) = prod_j [cos^2(alpha w_j T) + cos(phi) sin^2(alpha w_j T)].
double mcd_signal(const CouplingSet& c, double t, double phi, double alpha);

// Same signal via dense propagation of the full echo sequence
// (evolve, encode, reverse, overlap with the initial state). Supports any
// toggling mode; subject to the brute-force cap.
double mcd_signal_oracle(const CouplingSet& c, double t, double phi,
                         const TogglingParams& tog);

// Discrete Fourier transform of the closed-form signal over the phase grid.
OrderSpectrum extract_spectrum(const CouplingSet& c, double t, const PhaseGrid& grid,
                               double alpha);

// Spectrum via the dense oracle signal; the only route for full_toggling.
OrderSpectrum extract_spectrum_oracle(const CouplingSet& c, double t,
                                      const PhaseGrid& grid, const TogglingParams& tog);

// Poisson-binomial cluster-size distribution with per-spin success
// probability sin^2(alpha w_j T), via the standard O(N^2) recurrence.
ClusterWeights cluster_weights(const CouplingSet& c, double t, double alpha);

// Second moment sum_n n^2 |C_n|^2. Throws if the spectrum sum deviates from
// 1 by more than 1e-6.
double hamming_weight_spread(const OrderSpectrum& s);

// Largest |n| with |C_n|^2 >= floor.
int largest_order(const OrderSpectrum& s, double floor = 1e-4);

struct EnsembleMcdResult {
  std::vector<double> t_grid;
  std::vector<OrderSpectrum> spectra;        // ensemble-averaged, one per T
  std::vector<double> spread_mean;           // of the averaged spectrum
  std::vector<double> spread_stderr;         // across orientations
  std::vector<int> largest_orders;           // of the averaged spectrum
};

// Per-T spectra averaged over the powder ensemble. Spectra are averaged
// before moments are taken; per-orientation spread scatter is reported as a
// standard error. Deterministic for a fixed seed and any thread count.
EnsembleMcdResult ensemble_mcd(const EnsembleSpec& spec, const std::vector<double>& t_grid,
                               const PhaseGrid& grid, double alpha,
                               unsigned n_threads = 0);

}  // namespace spinecho

#endif  // SPINECHO_MCD_HPP
