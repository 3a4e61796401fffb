// Core scalar/matrix aliases, error types and shared numeric tolerances.
#ifndef SPINECHO_TYPES_HPP
#define SPINECHO_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spinecho {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

// Configuration/schema problems (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Requested problem size exceeds a hard resource cap (CLI exit code 3).
struct CapError : std::runtime_error {
  explicit CapError(const std::string& what) : std::runtime_error(what) {}
};

// A numeric invariant failed at runtime (CLI exit code 4).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

namespace tol {
inline constexpr double hermitian = 1e-12;       // max|A - A^dag|
inline constexpr double unitary = 1e-10;         // max|U^dag U - 1|
inline constexpr double trace_imag = 1e-10;      // imaginary residue of echo traces
inline constexpr double dft_imag = 1e-9;         // imaginary residue of spectrum DFT
inline constexpr double spectrum_negative = 1e-9;  // clip threshold for amplitudes
inline constexpr double spectrum_sum = 1e-9;     // |sum of amplitudes - 1|
inline constexpr double cluster_sum = 1e-12;     // |sum of cluster weights - 1|
inline constexpr double unfolded_mean = 0.02;    // |mean unfolded spacing - 1|
inline constexpr double reduction = 1e-10;       // partition independence of ensemble means
}  // namespace tol

}  // namespace spinecho

#endif  // SPINECHO_TYPES_HPP
