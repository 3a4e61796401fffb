#include "spinecho/spin_system.hpp"

#include <cmath>

#include "spinecho/rng.hpp"

namespace spinecho {

SpinSystem::SpinSystem(int n_env) : n_env_(n_env) {
  if (n_env < 1) throw std::invalid_argument("SpinSystem: n_env must be >= 1");
  if (n_env > 30) throw std::invalid_argument("SpinSystem: n_env unreasonably large");
}

void SpinSystem::require_brute_force() const {
  if (n_env_ > kBruteForceCap) {
    throw CapError("dense path refused: n_env = " + std::to_string(n_env_) +
                   " exceeds cap " + std::to_string(kBruteForceCap));
  }
}

CouplingSet::CouplingSet(RVector hetero, RMatrix homo, CouplingUnits units)
    : hetero_(std::move(hetero)), homo_(std::move(homo)), units_(units) {
  const Eigen::Index n = hetero_.size();
  if (n < 1) throw std::invalid_argument("CouplingSet: empty hetero couplings");
  if (!hetero_.allFinite()) throw std::invalid_argument("CouplingSet: non-finite hetero coupling");
  if (homo_.rows() != n || homo_.cols() != n) {
    throw std::invalid_argument("CouplingSet: homo matrix shape mismatch");
  }
  if (!homo_.allFinite()) throw std::invalid_argument("CouplingSet: non-finite homo coupling");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (homo_(j, j) != 0.0) throw std::invalid_argument("CouplingSet: nonzero homo diagonal");
    for (Eigen::Index k = j + 1; k < n; ++k) {
      if (homo_(j, k) != homo_(k, j)) {
        throw std::invalid_argument("CouplingSet: asymmetric homo matrix");
      }
    }
  }
}

CouplingSet CouplingSet::hetero_only(RVector hetero, CouplingUnits units) {
  const Eigen::Index n = hetero.size();
  return CouplingSet(std::move(hetero), RMatrix::Zero(n, n), units);
}

double CouplingSet::max_abs_hetero() const { return hetero_.cwiseAbs().maxCoeff(); }

double mrev8_alpha(double t_p, double tau_c) {
  if (!(t_p >= 0.0) || !(tau_c > 0.0) || !(t_p < tau_c)) {
    throw std::invalid_argument("mrev8_alpha: require 0 <= t_p < tau_c");
  }
  const double x = 3.0 * t_p / tau_c;
  return std::sqrt(2.0) * (1.0 + 2.0 * x * (4.0 / M_PI - 1.0)) / 3.0;
}

TogglingParams TogglingParams::ideal() { return TogglingParams(ToggleMode::ideal, 1.0, 0.0, 0.0); }

TogglingParams TogglingParams::scaled(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("TogglingParams::scaled: alpha must lie in (0, 1)");
  }
  return TogglingParams(ToggleMode::scaled, alpha, 0.0, 0.0);
}

TogglingParams TogglingParams::mrev8(double t_p, double tau_c) {
  const double alpha = mrev8_alpha(t_p, tau_c);
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("TogglingParams::mrev8: derived alpha outside (0, 1)");
  }
  return TogglingParams(ToggleMode::scaled, alpha, t_p, tau_c);
}

TogglingParams TogglingParams::full_toggling() {
  return TogglingParams(ToggleMode::full_toggling, 1.0, 0.0, 0.0);
}

namespace {

double hermiticity_defect_of(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_defect_of(const CMatrix& m) {
  CMatrix g = m.adjoint() * m;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

// Cheap probabilistic unitarity check for large matrices:
// max_x ||U^dag(Ux) - x||_inf over a few fixed pseudo-random vectors.
double sampled_unitarity_defect(const CMatrix& m) {
  SplitMix64 rng(0x5eed0f00dULL);
  double worst = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    CVector x(m.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x(i) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    }
    x /= x.norm();
    CVector back = m.adjoint() * (m * x);
    worst = std::max(worst, (back - x).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

OperatorMatrix OperatorMatrix::hermitian(CMatrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("OperatorMatrix: not square");
  const double defect = hermiticity_defect_of(m);
  if (defect > tol::hermitian) {
    throw NumericError("hermitian tag violated: defect " + std::to_string(defect));
  }
  return OperatorMatrix(std::move(m), MatrixTag::hermitian);
}

OperatorMatrix OperatorMatrix::unitary(CMatrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("OperatorMatrix: not square");
  const double defect =
      m.rows() <= 2048 ? unitarity_defect_of(m) : sampled_unitarity_defect(m);
  if (defect > tol::unitary) {
    throw NumericError("unitary tag violated: defect " + std::to_string(defect));
  }
  return OperatorMatrix(std::move(m), MatrixTag::unitary);
}

OperatorMatrix OperatorMatrix::untagged(CMatrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("OperatorMatrix: not square");
  return OperatorMatrix(std::move(m), MatrixTag::none);
}

double OperatorMatrix::hermiticity_defect() const { return hermiticity_defect_of(m_); }

double OperatorMatrix::unitarity_defect() const { return unitarity_defect_of(m_); }

}  // namespace spinecho
