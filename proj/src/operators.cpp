#include "spinecho/operators.hpp"

#include <cmath>

namespace spinecho {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_couplings(const CouplingSet& c, const SpinSystem& sys) {
  if (c.n() != sys.n_env()) {
    throw std::invalid_argument("coupling count does not match environment size");
  }
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// sum over heteronuclear terms with weight(w_j) applied, as a dense matrix
CMatrix h_se_matrix(const CouplingSet& c, const SpinSystem& sys, ToggleMode mode,
                    double scale) {
  const int dim = sys.dim();
  const int n = sys.n_spins();
  const int big_n = sys.n_env();
  CMatrix h = CMatrix::Zero(dim, dim);
  if (mode == ToggleMode::ideal || mode == ToggleMode::scaled) {
    for (int i = 0; i < dim; ++i) {
      double e = 0.0;
      const int zc = pauli_z_sign(i, 0, n);
      for (int j = 0; j < big_n; ++j) {
        e += scale * c.hetero()(j) * zc * pauli_z_sign(i, 1 + j, n);
      }
      h(i, i) = e;
    }
    return h;
  }
  // full_toggling: 0.36 sum_j w_j (sZ^cs sX^j + sZ^cs sZ^j)
  for (int i = 0; i < dim; ++i) {
    const int zc = pauli_z_sign(i, 0, n);
    double diag = 0.0;
    for (int j = 0; j < big_n; ++j) {
      const double w = scale * kFullTogglingWeight * c.hetero()(j);
      diag += w * zc * pauli_z_sign(i, 1 + j, n);
      const int flipped = i ^ (1 << (n - 1 - (1 + j)));
      h(flipped, i) += w * zc;  // sX^j matrix element
    }
    h(i, i) += diag;
  }
  return h;
}

}  // namespace

OperatorMatrix pauli(int site, Axis axis, const SpinSystem& sys) {
  if (site < 0 || site > sys.n_env()) {
    throw std::invalid_argument("pauli: site out of range");
  }
  const int dim = sys.dim();
  const int n = sys.n_spins();
  const int bit = n - 1 - site;
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    switch (axis) {
      case Axis::Z:
        m(i, i) = static_cast<double>(pauli_z_sign(i, site, n));
        break;
      case Axis::X:
        m(i ^ (1 << bit), i) = 1.0;
        break;
      case Axis::Y:
        // sY |up> = i |down>, sY |down> = -i |up>
        m(i ^ (1 << bit), i) = pauli_z_sign(i, site, n) > 0 ? kI : -kI;
        break;
    }
  }
  return OperatorMatrix::hermitian(std::move(m));
}

OperatorMatrix build_h_se(const CouplingSet& c, const SpinSystem& sys,
                          const TogglingParams& tog) {
  check_couplings(c, sys);
  const double alpha = tog.mode() == ToggleMode::scaled ? tog.alpha() : 1.0;
  return OperatorMatrix::hermitian(h_se_matrix(c, sys, tog.mode(), alpha));
}

OperatorMatrix se_evolution_hamiltonian(const CouplingSet& c, const SpinSystem& sys,
                                        const TogglingParams& tog) {
  check_couplings(c, sys);
  const double alpha = tog.mode() == ToggleMode::scaled ? tog.alpha() : 1.0;
  return OperatorMatrix::hermitian(h_se_matrix(c, sys, tog.mode(), 0.5 * alpha));
}

OperatorMatrix build_h_e(const CouplingSet& c, const SpinSystem& sys, EnvTerms terms) {
  check_couplings(c, sys);
  const RMatrix block = build_h_env_block(c, sys, terms);
  const int d = sys.env_dim();
  CMatrix h = CMatrix::Zero(2 * d, 2 * d);
  h.topLeftCorner(d, d) = block.cast<Complex>();
  h.bottomRightCorner(d, d) = block.cast<Complex>();
  return OperatorMatrix::hermitian(std::move(h));
}

RMatrix build_h_env_block(const CouplingSet& c, const SpinSystem& sys, EnvTerms terms) {
  check_couplings(c, sys);
  const int big_n = sys.n_env();
  const int d = sys.env_dim();
  RMatrix h = RMatrix::Zero(d, d);
  for (int e = 0; e < d; ++e) {
    double diag = 0.0;
    for (int j = 0; j < big_n; ++j) {
      const int bj = big_n - 1 - j;
      const int zj = (e >> bj) & 1 ? -1 : 1;
      for (int k = j + 1; k < big_n; ++k) {
        const int bk = big_n - 1 - k;
        const int zk = (e >> bk) & 1 ? -1 : 1;
        const double w = c.homo()(j, k);
        if (w == 0.0) continue;
        diag += w * zj * zk;
        if (terms == EnvTerms::full && zj != zk) {
          // flip-flop: |ud> <-> |du> with amplitude -W_jk
          h(e ^ (1 << bj) ^ (1 << bk), e) += -w;
        }
      }
    }
    h(e, e) = diag;
  }
  return h;
}

OperatorMatrix propagator(const OperatorMatrix& h, double t) {
  if (h.tag() != MatrixTag::hermitian && h.hermiticity_defect() > tol::hermitian) {
    throw std::invalid_argument("propagator: Hamiltonian is not hermitian");
  }
  const CMatrix& m = h.matrix();
  const Eigen::Index dim = m.rows();

  bool diagonal = true;
  for (Eigen::Index j = 0; j < dim && diagonal; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i != j && m(i, j) != Complex(0.0, 0.0)) {
        diagonal = false;
        break;
      }
    }
  }

  CMatrix u;
  if (diagonal) {
    u = CMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      u(i, i) = std::exp(-kI * m(i, i).real() * t);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
    if (solver.info() != Eigen::Success) {
      throw NumericError("propagator: eigendecomposition failed");
    }
    const CVector phases =
        (-kI * t * solver.eigenvalues().array().cast<Complex>()).exp().matrix();
    u = solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
  }
  return OperatorMatrix::unitary(std::move(u));
}

OperatorMatrix initial_state(const SpinSystem& sys) {
  const int dim = sys.dim();
  const int d = sys.env_dim();
  const double w = 1.0 / static_cast<double>(dim);
  CMatrix rho = CMatrix::Zero(dim, dim);
  for (int e = 0; e < d; ++e) {
    rho(e, d + e) = w;
    rho(d + e, e) = w;
  }
  return OperatorMatrix::hermitian(std::move(rho));
}

OperatorMatrix rx_collective(double phi, const SpinSystem& sys) {
  CMatrix r2(2, 2);
  const double ch = std::cos(phi / 2.0);
  const Complex sh = kI * std::sin(phi / 2.0);
  r2 << ch, sh, sh, ch;
  CMatrix r = CMatrix::Identity(1, 1);
  for (int j = 0; j < sys.n_env(); ++j) r = kron(r, r2);
  return OperatorMatrix::unitary(kron(CMatrix::Identity(2, 2), r));
}

}  // namespace spinecho
