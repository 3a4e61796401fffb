#include "spinecho/level_stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace spinecho {

SpacingHistogram::SpacingHistogram(std::vector<double> spacings)
    : spacings_(std::move(spacings)) {
  if (spacings_.empty()) throw std::invalid_argument("SpacingHistogram: no spacings");
  double sum = 0.0;
  for (double s : spacings_) {
    if (s < 0.0) {
      throw NumericError("SpacingHistogram: negative unfolded spacing " + std::to_string(s) +
                         " (staircase fit non-monotone)");
    }
    sum += s;
  }
  mean_ = sum / static_cast<double>(spacings_.size());
  if (std::abs(mean_ - 1.0) > tol::unfolded_mean) {
    throw NumericError("SpacingHistogram: unfolded mean " + std::to_string(mean_));
  }
}

std::pair<std::vector<double>, std::vector<double>> SpacingHistogram::density(int n_bins) const {
  if (n_bins < 1) throw std::invalid_argument("density: n_bins must be >= 1");
  const double hi = *std::max_element(spacings_.begin(), spacings_.end());
  const double width = hi > 0.0 ? hi / n_bins : 1.0;
  std::vector<double> edges(static_cast<size_t>(n_bins) + 1);
  for (int b = 0; b <= n_bins; ++b) edges[static_cast<size_t>(b)] = b * width;
  std::vector<double> dens(static_cast<size_t>(n_bins), 0.0);
  for (double s : spacings_) {
    int b = static_cast<int>(s / width);
    if (b >= n_bins) b = n_bins - 1;
    dens[static_cast<size_t>(b)] += 1.0;
  }
  const double norm = width * static_cast<double>(spacings_.size());
  for (double& d : dens) d /= norm;
  return {edges, dens};
}

std::vector<int> sector_indices(int n_spins, int magnetization) {
  if (n_spins < 1 || n_spins > 24) throw std::invalid_argument("sector_indices: bad spin count");
  std::vector<int> out;
  const int dim = 1 << n_spins;
  for (int e = 0; e < dim; ++e) {
    const int downs = std::popcount(static_cast<unsigned>(e));
    if (n_spins - 2 * downs == magnetization) out.push_back(e);
  }
  return out;
}

std::vector<double> unfold_spacings(RVector eigenvalues, const UnfoldOptions& opts) {
  const Eigen::Index n = eigenvalues.size();
  if (n < 10) throw std::invalid_argument("unfold_spacings: too few levels");
  if (opts.degree < 1 || opts.degree > 15) {
    throw std::invalid_argument("unfold_spacings: bad polynomial degree");
  }
  if (!(opts.trim >= 0.0) || !(opts.trim < 0.5)) {
    throw std::invalid_argument("unfold_spacings: trim must lie in [0, 0.5)");
  }
  std::sort(eigenvalues.data(), eigenvalues.data() + n);
  const double lo = eigenvalues(0);
  const double hi = eigenvalues(n - 1);
  if (!(hi > lo)) throw std::invalid_argument("unfold_spacings: degenerate spectrum range");

  // least-squares polynomial fit of the staircase N(E_i) = i + 1/2 on a
  // range-normalized abscissa for conditioning
  const int cols = opts.degree + 1;
  RMatrix vand(n, cols);
  RVector stair(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = 2.0 * (eigenvalues(i) - lo) / (hi - lo) - 1.0;
    double p = 1.0;
    for (int c = 0; c < cols; ++c) {
      vand(i, c) = p;
      p *= u;
    }
    stair(i) = static_cast<double>(i) + 0.5;
  }
  const RVector coeff = vand.colPivHouseholderQr().solve(stair);
  const RVector mapped = vand * coeff;

  const Eigen::Index cut = static_cast<Eigen::Index>(std::floor(opts.trim * static_cast<double>(n)));
  const Eigen::Index first = cut;
  const Eigen::Index last = n - cut;  // exclusive
  if (last - first < 2) throw std::invalid_argument("unfold_spacings: trim leaves no spacings");
  std::vector<double> spacings;
  spacings.reserve(static_cast<size_t>(last - first - 1));
  for (Eigen::Index i = first + 1; i < last; ++i) {
    spacings.push_back(mapped(i) - mapped(i - 1));
  }
  return spacings;
}

SpacingHistogram level_spacings(const OperatorMatrix& h, int magnetization,
                                const UnfoldOptions& opts) {
  if (h.tag() != MatrixTag::hermitian && h.hermiticity_defect() > tol::hermitian) {
    throw std::invalid_argument("level_spacings: operator is not hermitian");
  }
  const Eigen::Index dim = h.dim();
  int n_spins = 0;
  while ((Eigen::Index{1} << n_spins) < dim) ++n_spins;
  if ((Eigen::Index{1} << n_spins) != dim) {
    throw std::invalid_argument("level_spacings: dimension is not a power of 2");
  }
  const std::vector<int> sector = sector_indices(n_spins, magnetization);
  if (sector.size() < 50) {
    throw std::invalid_argument("level_spacings: sector holds " +
                                std::to_string(sector.size()) + " levels, need >= 50");
  }
  CMatrix block(sector.size(), sector.size());
  for (size_t a = 0; a < sector.size(); ++a) {
    for (size_t b = 0; b < sector.size(); ++b) {
      block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          h.matrix()(sector[a], sector[b]);
    }
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(block);
  if (solver.info() != Eigen::Success) throw NumericError("level_spacings: eigensolver failed");
  return SpacingHistogram(unfold_spacings(solver.eigenvalues(), opts));
}

double wigner_surmise(double s) {
  if (s < 0.0) throw std::invalid_argument("wigner_surmise: negative spacing");
  return 0.5 * M_PI * s * std::exp(-0.25 * M_PI * s * s);
}

double wigner_cdf(double s) { return 1.0 - std::exp(-0.25 * M_PI * s * s); }

double poisson_cdf(double s) { return 1.0 - std::exp(-s); }

double ks_distance(const std::vector<double>& samples,
                   const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: no samples");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace spinecho
