#include "spinecho/mcd.hpp"

#include <cmath>

#include "spinecho/parallel.hpp"

namespace spinecho {

namespace {

constexpr Complex kI{0.0, 1.0};

RVector dft_spectrum(const std::vector<double>& signals, int n_env) {
  const int m = static_cast<int>(signals.size());
  RVector amps(2 * n_env + 1);
  for (int order = -n_env; order <= n_env; ++order) {
    Complex acc{0.0, 0.0};
    for (int k = 0; k < m; ++k) {
      const double phi = 2.0 * M_PI * k / m;
      acc += signals[static_cast<size_t>(k)] * std::exp(-kI * (order * phi));
    }
    acc /= static_cast<double>(m);
    if (std::abs(acc.imag()) > tol::dft_imag) {
      throw NumericError("spectrum DFT: imaginary residue " + std::to_string(acc.imag()) +
                         " at order " + std::to_string(order));
    }
    amps(order + n_env) = acc.real();
  }
  return amps;
}

void check_grid(const PhaseGrid& grid, int n_env) {
  if (grid.size() < 2 * n_env + 2) {
    throw std::invalid_argument("phase grid too small: M = " + std::to_string(grid.size()) +
                                " < 2N+2 = " + std::to_string(2 * n_env + 2));
  }
}

}  // namespace

PhaseGrid::PhaseGrid(int m) : m_(m) {
  if (m < 2) throw std::invalid_argument("PhaseGrid: M must be >= 2");
}

OrderSpectrum::OrderSpectrum(int n_env, double t, RVector amplitudes)
    : n_env_(n_env), t_(t), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != 2 * n_env_ + 1) {
    throw std::invalid_argument("OrderSpectrum: amplitude count must be 2N+1");
  }
  for (Eigen::Index i = 0; i < amplitudes_.size(); ++i) {
    if (amplitudes_(i) < -tol::spectrum_negative) {
      throw NumericError("OrderSpectrum: amplitude " + std::to_string(amplitudes_(i)) +
                         " at order " + std::to_string(i - n_env_) +
                         " below the clip threshold");
    }
    if (amplitudes_(i) < 0.0) amplitudes_(i) = 0.0;
  }
  const double total = amplitudes_.sum();
  if (std::abs(total - 1.0) > tol::spectrum_sum) {
    throw NumericError("OrderSpectrum: total weight " + std::to_string(total));
  }
}

ClusterWeights::ClusterWeights(double t, RVector probabilities)
    : t_(t), probabilities_(std::move(probabilities)) {
  for (Eigen::Index i = 0; i < probabilities_.size(); ++i) {
    if (probabilities_(i) < 0.0) throw NumericError("ClusterWeights: negative probability");
  }
  if (std::abs(probabilities_.sum() - 1.0) > tol::cluster_sum) {
    throw NumericError("ClusterWeights: probabilities sum to " +
                       std::to_string(probabilities_.sum()));
  }
}

double ClusterWeights::mean() const {
  double m = 0.0;
  for (Eigen::Index n = 0; n < probabilities_.size(); ++n) m += static_cast<double>(n) * probabilities_(n);
  return m;
}

double mcd_signal(const CouplingSet& c, double t, double phi, double alpha) {
  if (!(t >= 0.0)) throw std::invalid_argument("mcd_signal: negative time");
  const double cp = std::cos(phi);
  double s = 1.0;
  for (int j = 0; j < c.n(); ++j) {
    const double th = alpha * c.hetero()(j) * t;
    const double sn = std::sin(th);
    const double s2 = sn * sn;
    s *= (1.0 - s2) + cp * s2;
  }
  return s;
}

double mcd_signal_oracle(const CouplingSet& c, double t, double phi,
                         const TogglingParams& tog) {
  if (!(t >= 0.0)) throw std::invalid_argument("mcd_signal_oracle: negative time");
  const SpinSystem sys(c.n());
  sys.require_brute_force();
  const OperatorMatrix h = se_evolution_hamiltonian(c, sys, tog);
  const OperatorMatrix u = propagator(h, t);
  const OperatorMatrix r = rx_collective(phi, sys);
  const OperatorMatrix rho0 = initial_state(sys);

  // echo operator E = U^dag R U; signal = Tr[(E rho0)(E^dag rho0)] * 2^(N+1)
  const CMatrix e = u.matrix().adjoint() * r.matrix() * u.matrix();
  const CMatrix p = e * rho0.matrix();
  const CMatrix q = e.adjoint() * rho0.matrix();
  Complex trace = (p.array() * q.transpose().array()).sum();
  trace *= static_cast<double>(sys.dim());
  if (std::abs(trace.imag()) > tol::trace_imag) {
    throw NumericError("mcd_signal_oracle: imaginary residue " + std::to_string(trace.imag()));
  }
  return trace.real();
}

OrderSpectrum extract_spectrum(const CouplingSet& c, double t, const PhaseGrid& grid,
                               double alpha) {
  check_grid(grid, c.n());
  std::vector<double> signals(static_cast<size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) {
    signals[static_cast<size_t>(k)] = mcd_signal(c, t, grid.angle(k), alpha);
  }
  return OrderSpectrum(c.n(), t, dft_spectrum(signals, c.n()));
}

OrderSpectrum extract_spectrum_oracle(const CouplingSet& c, double t,
                                      const PhaseGrid& grid, const TogglingParams& tog) {
  check_grid(grid, c.n());
  std::vector<double> signals(static_cast<size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) {
    signals[static_cast<size_t>(k)] = mcd_signal_oracle(c, t, grid.angle(k), tog);
  }
  return OrderSpectrum(c.n(), t, dft_spectrum(signals, c.n()));
}

ClusterWeights cluster_weights(const CouplingSet& c, double t, double alpha) {
  if (!(t >= 0.0)) throw std::invalid_argument("cluster_weights: negative time");
  const int n = c.n();
  RVector p = RVector::Zero(n + 1);
  p(0) = 1.0;
  for (int j = 0; j < n; ++j) {
    const double sn = std::sin(alpha * c.hetero()(j) * t);
    const double q = sn * sn;
    for (int k = j + 1; k > 0; --k) p(k) = p(k) * (1.0 - q) + p(k - 1) * q;
    p(0) *= (1.0 - q);
  }
  return ClusterWeights(t, std::move(p));
}

double hamming_weight_spread(const OrderSpectrum& s) {
  if (std::abs(s.sum() - 1.0) > 1e-6) {
    throw NumericError("hamming_weight_spread: spectrum not normalized (sum = " +
                       std::to_string(s.sum()) + ")");
  }
  double m2 = 0.0;
  for (int n = -s.n_env(); n <= s.n_env(); ++n) {
    m2 += static_cast<double>(n) * static_cast<double>(n) * s.amp(n);
  }
  return m2;
}

int largest_order(const OrderSpectrum& s, double floor) {
  if (!(floor > 0.0)) throw std::invalid_argument("largest_order: floor must be positive");
  for (int n = s.n_env(); n > 0; --n) {
    if (s.amp(n) >= floor || s.amp(-n) >= floor) return n;
  }
  return 0;
}

EnsembleMcdResult ensemble_mcd(const EnsembleSpec& spec, const std::vector<double>& t_grid,
                               const PhaseGrid& grid, double alpha, unsigned n_threads) {
  const int n_env = spec.geometry.n_env();
  check_grid(grid, n_env);
  if (t_grid.empty()) throw std::invalid_argument("ensemble_mcd: empty time grid");

  const size_t n_or = static_cast<size_t>(spec.n_orientations);
  const size_t n_t = t_grid.size();
  const int width = 2 * n_env + 1;

  // per-orientation spectra land in independent slots, then are reduced in
  // fixed index order; the result is identical for any thread count
  RMatrix amp_table(n_or, static_cast<size_t>(n_t) * width);
  RMatrix spread_table(n_or, n_t);
  parallel_for(n_or, n_threads, [&](size_t o) {
    const Orientation orientation = Orientation::sampled(spec.seed, o);
    const CouplingSet c = couplings_for(orientation, spec.geometry);
    for (size_t it = 0; it < n_t; ++it) {
      const OrderSpectrum s = extract_spectrum(c, t_grid[it], grid, alpha);
      amp_table.block(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(it * width), 1, width) =
          s.amplitudes().transpose();
      spread_table(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(it)) =
          hamming_weight_spread(s);
    }
  });

  EnsembleMcdResult out;
  out.t_grid = t_grid;
  for (size_t it = 0; it < n_t; ++it) {
    RVector mean = RVector::Zero(width);
    for (size_t o = 0; o < n_or; ++o) {
      mean += amp_table.block(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(it * width), 1, width)
                  .transpose();
    }
    mean /= static_cast<double>(n_or);
    OrderSpectrum avg(n_env, t_grid[it], std::move(mean));
    out.spread_mean.push_back(hamming_weight_spread(avg));
    out.largest_orders.push_back(largest_order(avg));
    out.spectra.push_back(std::move(avg));

    double se = 0.0;
    if (n_or > 1) {
      const double m = spread_table.col(static_cast<Eigen::Index>(it)).mean();
      const double var =
          (spread_table.col(static_cast<Eigen::Index>(it)).array() - m).square().sum() /
          static_cast<double>(n_or - 1);
      se = std::sqrt(var / static_cast<double>(n_or));
    }
    out.spread_stderr.push_back(se);
  }
  return out;
}

}  // namespace spinecho
