#include "spinecho/otoc.hpp"

#include <cmath>

#include "spinecho/parallel.hpp"

namespace spinecho {

namespace {

constexpr Complex kI{0.0, 1.0};

// Diagonal of the echo-evolution generator restricted to the environment
// space for the central spin up: h(e) = sum_j (alpha w_j / 2) z_j(e).
RVector echo_phase_diagonal(const CouplingSet& c, const SpinSystem& sys, double alpha) {
  const int big_n = sys.n_env();
  const int d = sys.env_dim();
  RVector h = RVector::Zero(d);
  for (int e = 0; e < d; ++e) {
    double acc = 0.0;
    for (int j = 0; j < big_n; ++j) {
      const int bit = big_n - 1 - j;
      acc += 0.5 * alpha * c.hetero()(j) * ((e >> bit) & 1 ? -1.0 : 1.0);
    }
    h(e) = acc;
  }
  return h;
}

// Environment block of the full_toggling evolution generator for central
// spin up: 0.5 * 0.36 * sum_j w_j (X_j + Z_j).
RMatrix toggling_env_block(const CouplingSet& c, const SpinSystem& sys) {
  const int big_n = sys.n_env();
  const int d = sys.env_dim();
  RMatrix g = RMatrix::Zero(d, d);
  for (int e = 0; e < d; ++e) {
    double diag = 0.0;
    for (int j = 0; j < big_n; ++j) {
      const double w = 0.5 * kFullTogglingWeight * c.hetero()(j);
      const int bit = big_n - 1 - j;
      diag += w * ((e >> bit) & 1 ? -1.0 : 1.0);
      g(e ^ (1 << bit), e) += w;
    }
    g(e, e) += diag;
  }
  return g;
}

double check_real(Complex value, const char* where) {
  if (std::abs(value.imag()) > tol::trace_imag) {
    throw NumericError(std::string(where) + ": imaginary residue " +
                       std::to_string(value.imag()));
  }
  return value.real();
}

}  // namespace

OtocSurface::OtocSurface(std::vector<double> t_grid, std::vector<double> tau_grid,
                         RMatrix raw, RVector reference_row, OtocNormalization mode)
    : t_grid_(std::move(t_grid)),
      tau_grid_(std::move(tau_grid)),
      raw_(std::move(raw)),
      mode_(mode) {
  const Eigen::Index n_tau = static_cast<Eigen::Index>(tau_grid_.size());
  const Eigen::Index n_t = static_cast<Eigen::Index>(t_grid_.size());
  if (raw_.rows() != n_tau || raw_.cols() != n_t) {
    throw std::invalid_argument("OtocSurface: raw shape mismatch");
  }
  if (reference_row.size() != n_t) {
    throw std::invalid_argument("OtocSurface: reference row length mismatch");
  }
  for (Eigen::Index i = 0; i < n_t; ++i) {
    if (std::abs(reference_row(i) - 1.0) > 1e-10) {
      throw NumericError("OtocSurface: tau=0 reference deviates from 1 by " +
                         std::to_string(reference_row(i) - 1.0));
    }
  }
  if ((raw_.cwiseAbs().array() > 1.0 + 1e-9).any()) {
    throw NumericError("OtocSurface: |F| exceeds 1");
  }
  normalized_ = raw_;
  if (mode_ == OtocNormalization::pointwise) {
    for (Eigen::Index r = 0; r < n_tau; ++r) {
      for (Eigen::Index i = 0; i < n_t; ++i) normalized_(r, i) /= reference_row(i);
    }
  } else {
    const double scalar = reference_row.mean();
    normalized_ /= scalar;
  }
  // a tau = 0 row in the grid is the reference divided by itself
  for (size_t r = 0; r < tau_grid_.size(); ++r) {
    if (tau_grid_[r] == 0.0 && mode_ == OtocNormalization::pointwise) {
      normalized_.row(static_cast<Eigen::Index>(r)).setOnes();
    }
  }
}

OtocPoint OtocSurface::point(size_t tau_index, size_t t_index) const {
  return OtocPoint{t_grid_[t_index], tau_grid_[tau_index],
                   raw_(static_cast<Eigen::Index>(tau_index), static_cast<Eigen::Index>(t_index)),
                   -1};
}

double otoc(const CouplingSet& c, double t, double tau, const SpinSystem& sys,
            const TogglingParams& tog) {
  if (!(t >= 0.0) || !(tau >= 0.0)) throw std::invalid_argument("otoc: negative time");
  sys.require_brute_force();
  const OperatorMatrix h_se = se_evolution_hamiltonian(c, sys, tog);
  const OperatorMatrix u_se = propagator(h_se, t);
  const OperatorMatrix h_e = build_h_e(c, sys);
  const OperatorMatrix u_e = propagator(h_e, tau);
  const OperatorMatrix rho0 = initial_state(sys);

  const CMatrix a = u_se.matrix().adjoint() * u_e.matrix() * u_se.matrix();
  const CMatrix p = a * rho0.matrix();
  const CMatrix q = a.adjoint() * rho0.matrix();
  const Complex trace =
      (p.array() * q.transpose().array()).sum() * static_cast<double>(sys.dim());
  return check_real(trace, "otoc");
}

std::pair<double, double> otoc_commutator_check(const CouplingSet& c, double t, double tau,
                                                const SpinSystem& sys,
                                                const TogglingParams& tog) {
  if (!(t >= 0.0) || !(tau >= 0.0)) {
    throw std::invalid_argument("otoc_commutator_check: negative time");
  }
  sys.require_brute_force();
  const double dim = static_cast<double>(sys.dim());
  const CMatrix u_se = propagator(se_evolution_hamiltonian(c, sys, tog), t).matrix();
  const CMatrix u_e = propagator(build_h_e(c, sys), tau).matrix();
  const CMatrix w = u_se.adjoint() * u_e.adjoint() * u_se;
  const CMatrix v = pauli(0, Axis::X, sys).matrix();

  const double f_trace = check_real((w.adjoint() * v * w * v).trace() / dim,
                                    "otoc_commutator_check (trace form)");
  const CMatrix comm = w * v - v * w;
  const double norm2 =
      check_real((comm.adjoint() * comm).trace() / dim, "otoc_commutator_check (commutator)");
  return {f_trace, 1.0 - 0.5 * norm2};
}

RMatrix otoc_grid(const CouplingSet& c, const std::vector<double>& t_grid,
                  const std::vector<double>& tau_grid, const SpinSystem& sys,
                  const TogglingParams& tog, EnvTerms terms) {
  sys.require_brute_force();
  const int d = sys.env_dim();
  const double dd = static_cast<double>(d);

  // environment scrambling propagator via one eigendecomposition
  const RMatrix h_env = build_h_env_block(c, sys, terms);
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(h_env);
  if (solver.info() != Eigen::Success) throw NumericError("otoc_grid: eigensolver failed");
  const RMatrix& z = solver.eigenvectors();
  const RVector& lam = solver.eigenvalues();

  const bool diagonal_se = tog.mode() != ToggleMode::full_toggling;
  RVector h_diag;
  RMatrix g_env;
  Eigen::SelfAdjointEigenSolver<RMatrix> g_solver;
  if (diagonal_se) {
    h_diag = echo_phase_diagonal(c, sys, tog.mode() == ToggleMode::scaled ? tog.alpha() : 1.0);
  } else {
    g_env = toggling_env_block(c, sys);
    g_solver.compute(g_env);
    if (g_solver.info() != Eigen::Success) throw NumericError("otoc_grid: eigensolver failed");
  }

  RMatrix out(tau_grid.size(), t_grid.size());
  for (size_t r = 0; r < tau_grid.size(); ++r) {
    const double tau = tau_grid[r];
    if (!(tau >= 0.0)) throw std::invalid_argument("otoc_grid: negative tau");
    CVector phases(d);
    for (int i = 0; i < d; ++i) phases(i) = std::exp(-kI * lam(i) * tau);
    const CMatrix v = z.cast<Complex>() * phases.asDiagonal() * z.transpose().cast<Complex>();

    if (diagonal_se) {
      // F = Re[q^dag M q] / d with q_e = exp(-2 i T h_e), M = |V|^2
      const RMatrix m = v.cwiseAbs2();
      for (size_t it = 0; it < t_grid.size(); ++it) {
        const double t = t_grid[it];
        if (!(t >= 0.0)) throw std::invalid_argument("otoc_grid: negative T");
        RVector qr(d), qi(d);
        for (int e = 0; e < d; ++e) {
          qr(e) = std::cos(2.0 * t * h_diag(e));
          qi(e) = -std::sin(2.0 * t * h_diag(e));
        }
        const RVector mr = m * qr;
        const RVector mi = m * qi;
        const Complex val(qr.dot(mr) + qi.dot(mi), qr.dot(mi) - qi.dot(mr));
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(it)) =
            check_real(val / dd, "otoc_grid");
      }
    } else {
      // F = Re Tr[B^dag V B V^dag] / d with B = exp(-2 i G T)
      for (size_t it = 0; it < t_grid.size(); ++it) {
        const double t = t_grid[it];
        CVector bphases(d);
        for (int i = 0; i < d; ++i) bphases(i) = std::exp(-2.0 * kI * g_solver.eigenvalues()(i) * t);
        const CMatrix b = g_solver.eigenvectors().cast<Complex>() * bphases.asDiagonal() *
                          g_solver.eigenvectors().transpose().cast<Complex>();
        const Complex val = (b.adjoint() * v * b * v.adjoint()).trace();
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(it)) =
            check_real(val / dd, "otoc_grid");
      }
    }
  }
  return out;
}

OtocSurface ensemble_otoc(const EnsembleSpec& spec, const std::vector<double>& t_grid,
                          const std::vector<double>& tau_grid, const TogglingParams& tog,
                          OtocNormalization mode, EnvTerms terms, unsigned n_threads) {
  if (t_grid.empty() || tau_grid.empty()) {
    throw std::invalid_argument("ensemble_otoc: empty grid");
  }
  const SpinSystem sys(spec.geometry.n_env());
  sys.require_brute_force();

  // tau = 0 reference appended as an extra row of the same computation
  std::vector<double> tau_ext = tau_grid;
  tau_ext.push_back(0.0);

  const size_t n_or = static_cast<size_t>(spec.n_orientations);
  std::vector<RMatrix> per_orientation(n_or);
  parallel_for(n_or, n_threads, [&](size_t o) {
    const Orientation orientation = Orientation::sampled(spec.seed, o);
    const CouplingSet c = couplings_for(orientation, spec.geometry);
    per_orientation[o] = otoc_grid(c, t_grid, tau_ext, sys, tog, terms);
  });

  RMatrix mean = RMatrix::Zero(static_cast<Eigen::Index>(tau_ext.size()),
                               static_cast<Eigen::Index>(t_grid.size()));
  for (size_t o = 0; o < n_or; ++o) mean += per_orientation[o];
  mean /= static_cast<double>(n_or);

  const RVector reference = mean.row(mean.rows() - 1).transpose();
  RMatrix raw = mean.topRows(mean.rows() - 1);
  return OtocSurface(t_grid, tau_grid, std::move(raw), reference, mode);
}

}  // namespace spinecho
