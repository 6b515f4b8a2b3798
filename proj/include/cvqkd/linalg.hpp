#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

namespace cvqkd {

/// 2x2 real matrix, row-major. Small enough that everything stays by value.
struct Mat2 {
  double m00 = 0.0;
  double m01 = 0.0;
  double m10 = 0.0;
  double m11 = 0.0;

  static constexpr Mat2 identity(double scale = 1.0) {
    return {scale, 0.0, 0.0, scale};
  }

  static constexpr Mat2 diagonal(double d0, double d1) {
    return {d0, 0.0, 0.0, d1};
  }

  /// Determinant, accumulated in extended precision. The protocol matrices
  /// produce near-cancelling products at large modulation variance.
  [[nodiscard]] double det() const {
    const long double p = static_cast<long double>(m00) * m11;
    const long double q = static_cast<long double>(m01) * m10;
    return static_cast<double>(p - q);
  }

  [[nodiscard]] double trace() const { return m00 + m11; }

  [[nodiscard]] Mat2 transposed() const { return {m00, m10, m01, m11}; }

  [[nodiscard]] bool is_symmetric(double tol) const {
    const double scale = std::max({std::fabs(m00), std::fabs(m01),
                                   std::fabs(m10), std::fabs(m11), 1.0});
    return std::fabs(m01 - m10) <= tol * scale;
  }
};

/// Dense 4x4 real matrix, row-major.
using Mat4 = std::array<std::array<double, 4>, 4>;

/// Determinant of a 4x4 matrix by LU factorization with partial pivoting.
/// Runs in long double: the assembled covariance matrices cancel down from
/// entry products of order V^4 to determinants of order 1.
inline double det4(const Mat4& m) {
  long double a[4][4];
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a[r][c] = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];

  long double det = 1.0L;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::fabs(static_cast<double>(a[r][col])) >
          std::fabs(static_cast<double>(a[pivot][col])))
        pivot = r;
    if (a[pivot][col] == 0.0L) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < 4; ++c) std::swap(a[pivot][c], a[col][c]);
      det = -det;
    }
    det *= a[col][col];
    for (int r = col + 1; r < 4; ++r) {
      const long double f = a[r][col] / a[col][col];
      for (int c = col + 1; c < 4; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return static_cast<double>(det);
}

/// Leading principal minor of order k (1..4), for definiteness tests.
inline double leading_minor(const Mat4& m, int k) {
  if (k == 1) return m[0][0];
  if (k == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  if (k == 3) {
    const long double d =
        static_cast<long double>(m[0][0]) * (static_cast<long double>(m[1][1]) * m[2][2] - static_cast<long double>(m[1][2]) * m[2][1]) -
        static_cast<long double>(m[0][1]) * (static_cast<long double>(m[1][0]) * m[2][2] - static_cast<long double>(m[1][2]) * m[2][0]) +
        static_cast<long double>(m[0][2]) * (static_cast<long double>(m[1][0]) * m[2][1] - static_cast<long double>(m[1][1]) * m[2][0]);
    return static_cast<double>(d);
  }
  return det4(m);
}

}  // namespace cvqkd
