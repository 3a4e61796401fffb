// Domain types for the central-spin problem: system size, coupling constants,
// pulse-sequence scaling parameters and tagged operator matrices.
#ifndef SPINECHO_SPIN_SYSTEM_HPP
#define SPINECHO_SPIN_SYSTEM_HPP

#include <string>
#include <utility>

#include "spinecho/types.hpp"

namespace spinecho {

// One central spin (site 0) plus n_env environment spins.
// Basis ordering is big-endian: the central spin is the most significant
// qubit, environment spin j sits at bit (n_env - j) counted from the LSB.
class SpinSystem {
 public:
  static constexpr int kBruteForceCap = 12;  // dense paths refuse n_env beyond this

  explicit SpinSystem(int n_env);

  int n_env() const { return n_env_; }
  int n_spins() const { return n_env_ + 1; }
  int dim() const { return 1 << (n_env_ + 1); }
  int env_dim() const { return 1 << n_env_; }

  // Throws CapError when a dense computation would exceed the hard cap.
  void require_brute_force() const;

 private:
  int n_env_;
};

enum class CouplingUnits { dimensionless, rad_per_s };

// Heteronuclear couplings w_j (central spin to environment spin j) and the
// symmetric homonuclear matrix W_jk with zero diagonal.
class CouplingSet {
 public:
  CouplingSet(RVector hetero, RMatrix homo,
              CouplingUnits units = CouplingUnits::dimensionless);

  // All-zero homonuclear part.
  static CouplingSet hetero_only(RVector hetero,
                                 CouplingUnits units = CouplingUnits::dimensionless);

  int n() const { return static_cast<int>(hetero_.size()); }
  const RVector& hetero() const { return hetero_; }
  const RMatrix& homo() const { return homo_; }
  CouplingUnits units() const { return units_; }

  double max_abs_hetero() const;

 private:
  RVector hetero_;
  RMatrix homo_;
  CouplingUnits units_;
};

enum class ToggleMode {
  ideal,          // bare ZZ heteronuclear coupling
  scaled,         // ZZ coupling rescaled by alpha
  full_toggling,  // zeroth-order average Hamiltonian with equal ZX and ZZ weight
};

// Parameters of the homonuclear-decoupling frame. `scaled` mode carries the
// scale factor either directly or derived from pulse timings.
class TogglingParams {
 public:
  static TogglingParams ideal();
  static TogglingParams scaled(double alpha);
  // alpha computed from the pulse length t_p and cycle length tau_c.
  static TogglingParams mrev8(double t_p, double tau_c);
  static TogglingParams full_toggling();

  ToggleMode mode() const { return mode_; }
  double alpha() const { return alpha_; }
  double t_p() const { return t_p_; }
  double tau_c() const { return tau_c_; }

 private:
  TogglingParams(ToggleMode mode, double alpha, double t_p, double tau_c)
      : mode_(mode), alpha_(alpha), t_p_(t_p), tau_c_(tau_c) {}

  ToggleMode mode_;
  double alpha_;
  double t_p_;
  double tau_c_;
};

// Scale factor of the environment sigma_z operator in the pulse-sequence
// toggling frame, as a function of pulse length and cycle length.
double mrev8_alpha(double t_p, double tau_c);

// Weight of the zeroth-order average Hamiltonian in full_toggling mode.
inline constexpr double kFullTogglingWeight = 0.36;

enum class MatrixTag { none, hermitian, unitary };

// Dense complex matrix with a structural tag checked at construction.
// Hermiticity is always verified in full; unitarity is verified in full up
// to dim 2048 and spot-checked on random vectors beyond (the full check is
// cubic in the dimension).
class OperatorMatrix {
 public:
  static OperatorMatrix hermitian(CMatrix m);
  static OperatorMatrix unitary(CMatrix m);
  static OperatorMatrix untagged(CMatrix m);

  const CMatrix& matrix() const { return m_; }
  MatrixTag tag() const { return tag_; }
  Eigen::Index dim() const { return m_.rows(); }

  // max|A - A^dag|
  double hermiticity_defect() const;
  // max|U^dag U - 1| (full, cubic cost)
  double unitarity_defect() const;

 private:
  OperatorMatrix(CMatrix m, MatrixTag tag) : m_(std::move(m)), tag_(tag) {}

  CMatrix m_;
  MatrixTag tag_;
};

}  // namespace spinecho

#endif  // SPINECHO_SPIN_SYSTEM_HPP
