#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spinecho/operators.hpp"
#include "spinecho/rng.hpp"

#include "oracle_helpers.hpp"

using namespace spinecho;

namespace {

CouplingSet random_couplings(int n, SplitMix64& rng, bool with_homo = false) {
  RVector hetero(n);
  for (int j = 0; j < n; ++j) hetero(j) = rng.uniform(-1.0, 1.0);
  RMatrix homo = RMatrix::Zero(n, n);
  if (with_homo) {
    for (int j = 0; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        homo(j, k) = homo(k, j) = rng.uniform(-1.0, 1.0);
      }
    }
  }
  return CouplingSet(hetero, homo);
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("pauli: embedding, involution, orthogonality") {
  const SpinSystem sys1(1);
  const CMatrix z0 = pauli(0, Axis::Z, sys1).matrix();
  CMatrix expect(4, 4);
  expect.setZero();
  expect.diagonal() << 1, 1, -1, -1;  // central spin is the most significant qubit
  CHECK(max_abs(z0 - expect) == 0.0);

  const CMatrix x1 = pauli(1, Axis::X, sys1).matrix();
  CHECK(max_abs(x1 * x1 - CMatrix::Identity(4, 4)) == 0.0);

  const SpinSystem sys3(3);
  const CMatrix x0 = pauli(0, Axis::X, sys3).matrix();
  const CMatrix y0 = pauli(0, Axis::Y, sys3).matrix();
  CHECK(std::abs((x0 * y0).trace()) == 0.0);

  // traceless, hermitian, matches the kron-built oracle on every axis/site
  for (int site = 0; site <= 3; ++site) {
    for (auto [axis, name] : {std::pair{Axis::X, 'x'}, {Axis::Y, 'y'}, {Axis::Z, 'z'}}) {
      const OperatorMatrix p = pauli(site, axis, sys3);
      CHECK(std::abs(p.matrix().trace()) == 0.0);
      CHECK(p.hermiticity_defect() == 0.0);
      CHECK(max_abs(p.matrix() - oracle::op_at(site, name, 4)) == 0.0);
    }
  }

  CHECK_THROWS_AS(pauli(4, Axis::X, sys3), std::invalid_argument);
  CHECK_THROWS_AS(pauli(-1, Axis::X, sys3), std::invalid_argument);
}

TEST_CASE("build_h_se: ideal diagonal, scaling linearity, toggling form") {
  const SpinSystem sys(1);
  const CouplingSet one = CouplingSet::hetero_only((RVector(1) << 1.0).finished());
  const CMatrix h = build_h_se(one, sys, TogglingParams::ideal()).matrix();
  CMatrix expect = CMatrix::Zero(4, 4);
  expect.diagonal() << 1, -1, -1, 1;
  CHECK(max_abs(h - expect) == 0.0);

  SplitMix64 rng(7);
  const SpinSystem sys3(3);
  const CouplingSet c3 = random_couplings(3, rng);
  const CMatrix ideal = build_h_se(c3, sys3, TogglingParams::ideal()).matrix();
  for (Eigen::Index i = 0; i < ideal.rows(); ++i) {
    for (Eigen::Index j = 0; j < ideal.cols(); ++j) {
      if (i != j) CHECK(ideal(i, j) == Complex(0.0, 0.0));
    }
  }

  // scaled(alpha) with couplings w equals ideal with alpha*w
  const CouplingSet doubled = CouplingSet::hetero_only((RVector(1) << 2.0).finished());
  const CMatrix scaled = build_h_se(doubled, sys, TogglingParams::scaled(0.5)).matrix();
  CHECK(max_abs(scaled - h) < 1e-15);

  // full_toggling: 0.36 sum w (sZ sX + sZ sZ) against the kron oracle
  const CMatrix ft = build_h_se(c3, sys3, TogglingParams::full_toggling()).matrix();
  CMatrix want = CMatrix::Zero(16, 16);
  for (int j = 0; j < 3; ++j) {
    want += 0.36 * c3.hetero()(j) *
            (oracle::op_at(0, 'z', 4) * oracle::op_at(1 + j, 'x', 4) +
             oracle::op_at(0, 'z', 4) * oracle::op_at(1 + j, 'z', 4));
  }
  CHECK(max_abs(ft - want) < 1e-14);

  const CouplingSet wrong = CouplingSet::hetero_only((RVector(2) << 1.0, 2.0).finished());
  CHECK_THROWS_AS(build_h_se(wrong, sys3, TogglingParams::ideal()), std::invalid_argument);
}

TEST_CASE("se_evolution_hamiltonian carries half the builder weights") {
  SplitMix64 rng(11);
  const SpinSystem sys(2);
  const CouplingSet c = random_couplings(2, rng);
  const CMatrix full = build_h_se(c, sys, TogglingParams::ideal()).matrix();
  const CMatrix evo = se_evolution_hamiltonian(c, sys, TogglingParams::ideal()).matrix();
  CHECK(max_abs(evo - 0.5 * full) < 1e-15);
}

TEST_CASE("build_h_e: flip-flop block, magnetization conservation") {
  const SpinSystem sys(2);
  RMatrix homo = RMatrix::Zero(2, 2);
  homo(0, 1) = homo(1, 0) = 1.0;
  const CouplingSet c(RVector::Zero(2), homo);

  // environment block on {uu, ud, du, dd}: ZZ diag(1,-1,-1,1), flip-flop
  // couples ud <-> du with amplitude -1
  const RMatrix block = build_h_env_block(c, sys);
  RMatrix expect(4, 4);
  expect << 1, 0, 0, 0,
            0, -1, -1, 0,
            0, -1, -1, 0,
            0, 0, 0, 1;
  CHECK((block - expect).cwiseAbs().maxCoeff() == 0.0);

  // full-space operator is identity on the central spin
  const CMatrix h = build_h_e(c, sys).matrix();
  CHECK(max_abs(h.topLeftCorner(4, 4) - block.cast<Complex>()) == 0.0);
  CHECK(max_abs(h.bottomRightCorner(4, 4) - block.cast<Complex>()) == 0.0);
  CHECK(max_abs(h.topRightCorner(4, 4)) == 0.0);

  // [H_E, total environment Z] = 0
  SplitMix64 rng(3);
  const SpinSystem sys4(4);
  const CouplingSet c4 = random_couplings(4, rng, true);
  const CMatrix h4 = build_h_e(c4, sys4).matrix();
  CMatrix mz = CMatrix::Zero(h4.rows(), h4.cols());
  for (int j = 1; j <= 4; ++j) mz += pauli(j, Axis::Z, sys4).matrix();
  CHECK(max_abs(h4 * mz - mz * h4) < 1e-12);

  // against the kron oracle
  CHECK(max_abs(h4 - oracle::h_env_full(c4.homo(), true)) < 1e-13);

  // zero couplings give the zero matrix
  const CouplingSet zero(RVector::Zero(2), RMatrix::Zero(2, 2));
  CHECK(max_abs(build_h_e(zero, sys).matrix()) == 0.0);

  RMatrix bad = homo;
  bad(0, 1) = 2.0;
  CHECK_THROWS_AS(CouplingSet(RVector::Zero(2), bad), std::invalid_argument);
}

TEST_CASE("propagator: identity, diagonal phases, group property, unitarity") {
  const SpinSystem sys(2);
  SplitMix64 rng(5);
  const CouplingSet c = random_couplings(2, rng, true);
  const OperatorMatrix h = build_h_e(c, sys);

  CHECK(max_abs(propagator(h, 0.0).matrix() - CMatrix::Identity(8, 8)) < 1e-14);

  // 2x2 sigma_z at t = pi/2
  CMatrix sz(2, 2);
  sz << 1, 0, 0, -1;
  const CMatrix u = propagator(OperatorMatrix::hermitian(sz), M_PI / 2).matrix();
  CHECK(std::abs(u(0, 0) - std::exp(Complex(0, -M_PI / 2))) < 1e-15);
  CHECK(std::abs(u(1, 1) - std::exp(Complex(0, M_PI / 2))) < 1e-15);
  CHECK(std::abs(u(0, 1)) == 0.0);

  const CMatrix fwd = propagator(h, 0.37).matrix();
  const CMatrix bwd = propagator(h, -0.37).matrix();
  CHECK(max_abs(fwd * bwd - CMatrix::Identity(8, 8)) < 1e-10);
  CHECK(propagator(h, 0.37).unitarity_defect() < 1e-10);

  // matches the Taylor-series oracle
  CHECK(max_abs(fwd - oracle::expm(Complex(0, -0.37) * h.matrix())) < 1e-12);

  // diagonal fast path agrees with the dense path on a diagonal Hamiltonian
  const OperatorMatrix hd = build_h_se(c, sys, TogglingParams::ideal());
  const CMatrix fast = propagator(hd, 1.23).matrix();
  CHECK(max_abs(fast - oracle::expm(Complex(0, -1.23) * hd.matrix())) < 1e-12);

  CMatrix nh(2, 2);
  nh << 0, 1, 0, 0;
  CHECK_THROWS_AS(propagator(OperatorMatrix::untagged(nh), 1.0), std::invalid_argument);
}

TEST_CASE("initial_state: normalization and reduced state") {
  for (int n : {1, 3}) {
    const SpinSystem sys(n);
    const CMatrix rho = initial_state(sys).matrix();
    const double dim = static_cast<double>(sys.dim());
    CHECK(std::abs(rho.trace()) == 0.0);
    CHECK(std::abs((rho * pauli(0, Axis::X, sys).matrix()).trace() - 1.0) < 1e-14);
    CHECK(std::abs((rho * rho).trace() * dim - 1.0) < 1e-14);
    CHECK(max_abs(rho - oracle::rho0(n)) == 0.0);
  }

  // partial trace over the environment = sigma_x / 2
  const SpinSystem sys(2);
  const CMatrix rho = initial_state(sys).matrix();
  CMatrix reduced = CMatrix::Zero(2, 2);
  const int d = sys.env_dim();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int e = 0; e < d; ++e) reduced(a, b) += rho(a * d + e, b * d + e);
    }
  }
  CMatrix half_sx(2, 2);
  half_sx << 0, 0.5, 0.5, 0;
  CHECK(max_abs(reduced - half_sx) < 1e-15);
}

TEST_CASE("short-time expansion: error shrinks at third order") {
  SplitMix64 rng(13);
  const SpinSystem sys(3);
  const CouplingSet c = random_couplings(3, rng);
  const OperatorMatrix h_op = build_h_se(c, sys, TogglingParams::ideal());
  const CMatrix h = h_op.matrix();
  const CMatrix rho = initial_state(sys).matrix();

  auto series_error = [&](double t) {
    const CMatrix u = propagator(h_op, t).matrix();
    const CMatrix exact = u * rho * u.adjoint();
    const CMatrix c1 = rho * h - h * rho;           // [rho, H]
    const CMatrix c2 = c1 * h - h * c1;             // [[rho, H], H]
    const CMatrix series = rho + Complex(0, t) * c1 - (t * t / 2.0) * c2;
    return max_abs(exact - series);
  };

  const double t1 = 0.01 / c.max_abs_hetero();
  const double e1 = series_error(t1);
  const double e2 = series_error(t1 / 2.0);
  CHECK(e1 > 1e-13);  // above the noise floor, so the ratio is meaningful
  const double order = std::log2(e1 / e2);
  CHECK(order > 2.6);
  CHECK(order < 3.4);
}

TEST_CASE("propagator conserves energy") {
  SplitMix64 rng(17);
  const SpinSystem sys(3);
  const CouplingSet c = random_couplings(3, rng, true);
  const OperatorMatrix h = build_h_e(c, sys);
  const CMatrix rho = initial_state(sys).matrix();
  const CMatrix u = propagator(h, 0.83).matrix();
  const Complex before = (h.matrix() * rho).trace();
  const Complex after = (h.matrix() * u * rho * u.adjoint()).trace();
  CHECK(std::abs(after - before) < 1e-9);
}

TEST_CASE("mrev8 scale factor") {
  CHECK(mrev8_alpha(0.0, 1.0) == doctest::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-12));
  CHECK(mrev8_alpha(2e-6, 60e-6) > mrev8_alpha(0.0, 60e-6));
  CHECK_THROWS_AS(mrev8_alpha(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TogglingParams::scaled(1.5), std::invalid_argument);
  CHECK_THROWS_AS(TogglingParams::scaled(0.0), std::invalid_argument);
}

TEST_CASE("brute force cap") {
  CHECK_THROWS_AS(SpinSystem(13).require_brute_force(), CapError);
  CHECK_NOTHROW(SpinSystem(12).require_brute_force());
  CHECK_THROWS_AS(SpinSystem(0), std::invalid_argument);
}
