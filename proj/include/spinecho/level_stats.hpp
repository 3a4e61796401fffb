// Random-matrix diagnostics: magnetization-sector spectra, staircase
// unfolding and nearest-neighbor spacing statistics.
#ifndef SPINECHO_LEVEL_STATS_HPP
#define SPINECHO_LEVEL_STATS_HPP

#include <functional>
#include <vector>

#include "spinecho/spin_system.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

struct UnfoldOptions {
  int degree = 7;      // polynomial degree for the cumulative staircase fit
  double trim = 0.05;  // fraction of levels dropped at each spectral edge
};

// Unfolded nearest-neighbor spacings; mean is 1 within 0.02 by construction
// (violations raise NumericError, as do negative spacings from a
// non-monotone staircase fit).
class SpacingHistogram {
 public:
  explicit SpacingHistogram(std::vector<double> spacings);

  const std::vector<double>& spacings() const { return spacings_;}
  size_t sample_size() const { return spacings_.size(); }
  double mean() const { return mean_; }

  // equal-width bins over [0, max]; returns (edges, density)
  std::pair<std::vector<double>, std::vector<double>> density(int n_bins) const;

 private:
  std::vector<double> spacings_;
  double mean_;
};

// Indices of the computational-basis states of n spins whose total Z
// magnetization (ups minus downs) equals `magnetization`.
std::vector<int> sector_indices(int n_spins, int magnetization);

// Unfold a sorted spectrum by a degree-`degree` polynomial fit to the
// cumulative staircase, trim the spectral edges, and return consecutive
// differences of the mapped levels.
std::vector<double> unfold_spacings(RVector eigenvalues, const UnfoldOptions& opts = {});

// Restrict a hermitian operator on n spins (dim = 2^n) to one total-Z
// magnetization sector, diagonalize, unfold. The sector must hold at least
// 50 levels.
SpacingHistogram level_spacings(const OperatorMatrix& h, int magnetization,
                                const UnfoldOptions& opts = {});

// Wigner surmise density (pi s / 2) exp(-pi s^2 / 4); s must be >= 0.
double wigner_surmise(double s);

double wigner_cdf(double s);
double poisson_cdf(double s);

// Kolmogorov-Smirnov distance between samples and a reference CDF.
double ks_distance(const std::vector<double>& samples,
                   const std::function<double(double)>& cdf);

}  // namespace spinecho

#endif  // SPINECHO_LEVEL_STATS_HPP
