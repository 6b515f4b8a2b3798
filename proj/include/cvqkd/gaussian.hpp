#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "cvqkd/errors.hpp"
#include "cvqkd/linalg.hpp"

namespace cvqkd {

/// Tolerance that absorbs double-precision roundoff in symplectic
/// eigenvalue and discriminant checks without masking modeling errors.
inline constexpr double kSymplecticTol = 1e-9;

/// Covariance matrix of a two-mode Gaussian state in 2x2 block form,
///
///     gamma = [ A  C ]
///             [ C^T B ]
///
/// in shot-noise units (vacuum quadrature variance = 1).
struct TwoModeCovariance {
  Mat2 a_block;  ///< first mode
  Mat2 b_block;  ///< second mode
  Mat2 c_block;  ///< cross correlations

  [[nodiscard]] Mat4 assemble() const {
    return Mat4{{{a_block.m00, a_block.m01, c_block.m00, c_block.m01},
                 {a_block.m10, a_block.m11, c_block.m10, c_block.m11},
                 {c_block.m00, c_block.m10, b_block.m00, b_block.m01},
                 {c_block.m01, c_block.m11, b_block.m10, b_block.m11}}};
  }
};

/// Symplectic eigenvalues of a two-mode covariance matrix together with the
/// invariants they were computed from.
struct SymplecticSpectrum {
  double s1 = 0.0;     ///< larger symplectic eigenvalue, >= 1 for physical states
  double s2 = 0.0;     ///< smaller symplectic eigenvalue
  double delta = 0.0;  ///< det A + det B + 2 det C
  double det = 0.0;    ///< determinant of the assembled 4x4 matrix
};

/// Von Neumann entropy contribution of one symplectic eigenvalue, in bits:
///
///     g(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2)
///
/// Continuous at x = 1 with g(1) = 0; values in [1 - tol, 1] are clamped.
inline double entropy_g(double x) {
  if (!(x >= 1.0 - kSymplecticTol))
    throw DomainError("entropy_g: unphysical symplectic eigenvalue x = " +
                      std::to_string(x) + " (must be >= 1)");
  if (x <= 1.0) return 0.0;
  const double p = (x + 1.0) / 2.0;
  const double q = (x - 1.0) / 2.0;
  return p * std::log2(p) - q * std::log2(q);
}

/// Symplectic eigenvalues from the invariants
///
///     s_{1,2}^2 = (Delta +- sqrt(Delta^2 - 4 det gamma)) / 2.
///
/// delta comes from the 2x2 block determinants, det from direct LU
/// evaluation of the assembled 4x4 matrix. The smaller eigenvalue is
/// recovered as sqrt(det)/s1, which avoids the cancellation in
/// Delta - sqrt(discriminant) at large block entries.
inline SymplecticSpectrum symplectic_spectrum(const TwoModeCovariance& gamma) {
  SymplecticSpectrum sp;
  sp.delta = static_cast<double>(
      static_cast<long double>(gamma.a_block.det()) + gamma.b_block.det() +
      2.0L * gamma.c_block.det());
  sp.det = det4(gamma.assemble());

  const long double dd = static_cast<long double>(sp.delta) * sp.delta -
                         4.0L * static_cast<long double>(sp.det);
  const double disc_scale = std::max(sp.delta * sp.delta, 1.0);
  if (dd < -kSymplecticTol * disc_scale)
    throw DomainError(
        "symplectic_spectrum: negative discriminant Delta^2 - 4 det = " +
        std::to_string(static_cast<double>(dd)) + " (unphysical input)");
  const long double disc = dd < 0.0L ? 0.0L : dd;

  const long double s1sq = (sp.delta + std::sqrt(static_cast<double>(disc))) / 2.0L;
  if (s1sq < -kSymplecticTol)
    throw DomainError("symplectic_spectrum: negative invariant Delta + sqrt(disc)");
  sp.s1 = std::sqrt(std::max(static_cast<double>(s1sq), 0.0));
  sp.s2 = sp.s1 > 0.0 ? std::sqrt(std::max(sp.det, 0.0)) / sp.s1 : 0.0;
  return sp;
}

/// Von Neumann entropy S = g(s1) + g(s2) of a two-mode Gaussian state, bits.
inline double entropy_two_mode(const TwoModeCovariance& gamma) {
  const SymplecticSpectrum sp = symplectic_spectrum(gamma);
  return entropy_g(sp.s1) + entropy_g(sp.s2);
}

/// Von Neumann entropy of a single mode with covariance sigma: g(sqrt(det)).
inline double entropy_one_mode(const Mat2& sigma) {
  const double d = sigma.det();
  if (!(d >= 0.0))
    throw DomainError("entropy_one_mode: negative covariance determinant " +
                      std::to_string(d));
  return entropy_g(std::sqrt(d));
}

/// True iff gamma describes a physical two-mode Gaussian state: symmetric
/// blocks with positive diagonals, positive definite as a 4x4 matrix, and
/// both symplectic eigenvalues >= 1 - tol.
inline bool is_physical(const TwoModeCovariance& gamma,
                        double tol = kSymplecticTol) {
  if (!gamma.a_block.is_symmetric(tol) || !gamma.b_block.is_symmetric(tol))
    return false;
  if (!(gamma.a_block.m00 > 0.0) || !(gamma.a_block.m11 > 0.0) ||
      !(gamma.b_block.m00 > 0.0) || !(gamma.b_block.m11 > 0.0))
    return false;

  const Mat4 full = gamma.assemble();
  for (int k = 1; k <= 4; ++k)
    if (!(leading_minor(full, k) > 0.0)) return false;

  try {
    const SymplecticSpectrum sp = symplectic_spectrum(gamma);
    return sp.s2 >= 1.0 - tol && sp.s1 >= 1.0 - tol;
  } catch (const DomainError&) {
    return false;
  }
}

/// Throws PhysicalityError naming `what` if gamma is not physical.
inline void require_physical(const TwoModeCovariance& gamma, const char* what) {
  if (!is_physical(gamma))
    throw PhysicalityError(std::string(what) +
                           ": covariance matrix is not a physical Gaussian "
                           "state (symplectic eigenvalue below 1 or not "
                           "positive definite)");
}

}  // namespace cvqkd
