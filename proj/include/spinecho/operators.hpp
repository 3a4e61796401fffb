// Spin-operator algebra: Pauli strings, Hamiltonian builders, exact
// propagators and the uncorrelated initial state.
#ifndef SPINECHO_OPERATORS_HPP
#define SPINECHO_OPERATORS_HPP

#include "spinecho/spin_system.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

enum class Axis { X, Y, Z };

enum class EnvTerms {
  full,     // ZZ plus flip-flop
  zz_only,  // integrable reference without the flip-flop term
};

// +1 if spin `site` is up in basis state `index`, -1 if down.
// Big-endian: site 0 (central spin) is the most significant bit.
inline int pauli_z_sign(int index, int site, int n_spins) {
  const int bit = n_spins - 1 - site;
  return (index >> bit) & 1 ? -1 : 1;
}

// Single-site Pauli operator embedded in the full Hilbert space.
OperatorMatrix pauli(int site, Axis axis, const SpinSystem& sys);

// Heteronuclear coupling Hamiltonian between the central spin and the
// environment. ideal: sum_j w_j sZ^cs sZ^j (diagonal); scaled: w_j -> alpha w_j;
// full_toggling: 0.36 sum_j w_j (sZ^cs sX^j + sZ^cs sZ^j).
OperatorMatrix build_h_se(const CouplingSet& c, const SpinSystem& sys,
                          const TogglingParams& tog);

// Echo-evolution generator used by the MCD and OTOC engines.
// Convention: a hetero coupling w_j is the correlation phase rate, i.e. under
// exp(-iHt) the central-spin coherence picks up cos(w_j t) / sin(w_j t)
// factors from spin j. Each two-body term therefore carries w_j/2 relative to
// build_h_se. (Same rescaling applied to the full_toggling Hamiltonian.)
OperatorMatrix se_evolution_hamiltonian(const CouplingSet& c, const SpinSystem& sys,
                                        const TogglingParams& tog);

// Homonuclear environment Hamiltonian, identity on the central spin:
//   sum_{j<k} W_jk [ sZ^j sZ^k - 1/4 (s+^j s-^k + s-^j s+^k) ]
// with s± = sX ± i sY, so the flip-flop block couples |ud> and |du> with
// amplitude -W_jk. Commutes with the total environment Z magnetization.
OperatorMatrix build_h_e(const CouplingSet& c, const SpinSystem& sys,
                         EnvTerms terms = EnvTerms::full);

// Environment-only block of build_h_e (real symmetric, dimension 2^N).
// build_h_e is the identity on the central spin tensored with this block.
RMatrix build_h_env_block(const CouplingSet& c, const SpinSystem& sys,
                          EnvTerms terms = EnvTerms::full);

// exp(-i H t) for hermitian H: elementwise for diagonal H, otherwise via
// eigendecomposition. Exact up to floating point.
OperatorMatrix propagator(const OperatorMatrix& h, double t);

// Traceless working part of the uncorrelated initial state:
// sX^cs x 1^N / 2^(N+1). Normalized so Tr[rho sX^cs] = 1.
OperatorMatrix initial_state(const SpinSystem& sys);

// Collective environment rotation exp(i phi/2 sum_j sX^j), identity on the
// central spin.
OperatorMatrix rx_collective(double phi, const SpinSystem& sys);

}  // namespace spinecho

#endif  // SPINECHO_OPERATORS_HPP
