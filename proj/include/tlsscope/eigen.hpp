#pragma once

// Cyclic Jacobi diagonalization of small Hermitian matrices.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "tlsscope/errors.hpp"
#include "tlsscope/matrix.hpp"

namespace tlsscope {

struct JacobiOptions {
  double hermitian_tolerance = 1e-10;  // relative to max(1, ||H||_F)
  double threshold = 1e-14;            // off-diagonal norm relative to ||H||_F
  int max_sweeps = 50;
};

/// Eigen-decomposition H = U diag(eigenvalues) U^dagger with ascending
/// eigenvalues. Columns of `eigenvectors` are the eigenvectors.
template <std::size_t N>
struct Spectrum {
  std::array<double, N> eigenvalues{};
  Matrix<N> eigenvectors;
  int sweeps = 0;

  cplx component(std::size_t row, std::size_t col) const { return eigenvectors(row, col); }
};

namespace detail {

template <std::size_t N>
double off_diagonal_norm(const Matrix<N>& a) {
  double s = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace detail

/// Diagonalizes a Hermitian matrix with complex cyclic Jacobi rotations.
///
/// Each rotation first removes the phase of A_pq with a diagonal unitary and
/// then applies the real symmetric Jacobi rotation to the (p, q) block.
/// Throws NonHermitianInput if H deviates from Hermitian beyond tolerance.
template <std::size_t N>
Spectrum<N> eigensolve_hermitian(const Matrix<N>& h, const JacobiOptions& opt = {}) {
  const double scale = std::max(1.0, h.frobenius_norm());
  if (h.hermiticity_defect() > opt.hermitian_tolerance * scale)
    throw NonHermitianInput("eigensolve_hermitian: matrix is not Hermitian");

  Matrix<N> a = h;
  // Symmetrize away round-off so the diagonal stays real.
  for (std::size_t i = 0; i < N; ++i) {
    a(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < N; ++j) {
      const cplx v = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = v;
      a(j, i) = std::conj(v);
    }
  }
  Matrix<N> v = Matrix<N>::identity();
  const double norm = std::max(a.frobenius_norm(), 1e-300);

  int sweep = 0;
  for (; sweep < opt.max_sweeps; ++sweep) {
    if (detail::off_diagonal_norm(a) <= opt.threshold * norm) break;
    for (std::size_t p = 0; p + 1 < N; ++p) {
      for (std::size_t q = p + 1; q < N; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        const cplx phase = apq / mag;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // U = D * R, D = diag(.., 1 at p, e^{-i phi} at q, ..),
        // R = [[c, s], [-s, c]] on (p, q).
        Matrix<N> u = Matrix<N>::identity();
        const cplx dq = std::conj(phase);
        u(p, p) = c;
        u(p, q) = s;
        u(q, p) = -s * dq;
        u(q, q) = c * dq;
        a = u.adjoint() * a * u;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        v = v * u;
      }
    }
  }
  if (detail::off_diagonal_norm(a) > opt.threshold * norm * 1e3)
    throw NoConvergence("eigensolve_hermitian: Jacobi did not converge");

  std::array<std::size_t, N> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() < a(j, j).real();
  });

  Spectrum<N> out;
  out.sweeps = sweep;
  for (std::size_t k = 0; k < N; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    // Fix the global phase: largest component real and positive.
    std::size_t big = 0;
    for (std::size_t r = 1; r < N; ++r)
      if (std::abs(v(r, order[k])) > std::abs(v(big, order[k])) + 1e-14) big = r;
    const cplx ph = std::abs(v(big, order[k])) > 0
                        ? std::conj(v(big, order[k])) / std::abs(v(big, order[k]))
                        : cplx{1.0};
    for (std::size_t r = 0; r < N; ++r) out.eigenvectors(r, k) = v(r, order[k]) * ph;
  }
  return out;
}

/// ||H - U diag(lambda) U^dagger||_F
template <std::size_t N>
double reconstruction_residual(const Matrix<N>& h, const Spectrum<N>& s) {
  Matrix<N> lam = Matrix<N>::diagonal(s.eigenvalues);
  return (h - s.eigenvectors * lam * s.eigenvectors.adjoint()).frobenius_norm();
}

/// ||U^dagger U - I||_F
template <std::size_t N>
double unitarity_defect(const Spectrum<N>& s) {
  return (s.eigenvectors.adjoint() * s.eigenvectors - Matrix<N>::identity()).frobenius_norm();
}

}  // namespace tlsscope
