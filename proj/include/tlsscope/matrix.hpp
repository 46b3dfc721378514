#pragma once

// Fixed-size dense complex matrices for few-level Hamiltonians.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace tlsscope {

using cplx = std::complex<double>;

template <std::size_t N>
struct Matrix {
  std::array<cplx, N * N> data{};

  static constexpr std::size_t size() { return N; }

  cplx& operator()(std::size_t r, std::size_t c) { return data[r * N + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data[r * N + c]; }

  static Matrix identity() {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(const std::array<double, N>& d) {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
    return m;
  }

  Matrix& operator+=(const Matrix& o) {
    for (std::size_t i = 0; i < N * N; ++i) data[i] += o.data[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    for (std::size_t i = 0; i < N * N; ++i) data[i] -= o.data[i];
    return *this;
  }
  Matrix& operator*=(cplx s) {
    for (auto& x : data) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, cplx s) { return a *= s; }
  friend Matrix operator*(cplx s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < N; ++j) m(i, j) += aik * b(k, j);
      }
    return m;
  }

  Matrix adjoint() const {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) m(i, j) = std::conj((*this)(j, i));
    return m;
  }

  cplx trace() const {
    cplx t{};
    for (std::size_t i = 0; i < N; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0;
    for (const auto& x : data) s += std::norm(x);
    return std::sqrt(s);
  }

  /// Largest |A_ij - conj(A_ji)|.
  double hermiticity_defect() const {
    double worst = 0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i; j < N; ++j)
        worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return worst;
  }
};

using Matrix2 = Matrix<2>;
using Matrix4 = Matrix<4>;

/// Kronecker product of two 2x2 matrices, first factor acting on the
/// more significant index.
inline Matrix4 kron(const Matrix2& a, const Matrix2& b) {
  Matrix4 m;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return m;
}

namespace pauli {

inline Matrix2 identity() { return Matrix2::identity(); }

inline Matrix2 x() {
  Matrix2 m;
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

inline Matrix2 y() {
  Matrix2 m;
  m(0, 1) = cplx{0, -1};
  m(1, 0) = cplx{0, 1};
  return m;
}

inline Matrix2 z() {
  Matrix2 m;
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

}  // namespace pauli

}  // namespace tlsscope
