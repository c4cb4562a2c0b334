#pragma once

// Dense complex linear algebra used by every other part of the library.
//
// All routines are templated on the real scalar type (double in practice)
// and accept any Eigen expression. Vectorization is column stacking
// throughout, matching Eigen's default storage order:
//
//   vec(A X B) = (B^T kron A) vec(X).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "arveson/errors.hpp"

namespace arveson {

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using ComplexMatrix = CMatrix<double>;
using ComplexVector = CVector<double>;

template <typename Derived>
using real_of_t = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

namespace tolerance {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kRank = 1e-9;
}  // namespace tolerance

/// Eigenvalues ascending; columns of `vectors` are the matching orthonormal
/// eigenvectors.
template <typename Real>
struct EigDecomposition {
  RVector<Real> eigenvalues;
  CMatrix<Real> vectors;
};

template <typename Real>
CMatrix<Real> identity(Eigen::Index n) {
  return CMatrix<Real>::Identity(n, n);
}

template <typename Derived>
CMatrix<real_of_t<Derived>> adjoint(const Eigen::MatrixBase<Derived>& x) {
  return x.adjoint().eval();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (!std::isfinite(std::real(x(i, j))) || !std::isfinite(std::imag(x(i, j)))) return false;
  return true;
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& x, const char* what) {
  if (x.rows() != x.cols() || x.rows() == 0)
    throw DimensionError(std::string(what) + " must be a non-empty square matrix, got " +
                         std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
}

/// Kronecker product of square factors; block (i, j) of the result is x(i, j) * y.
template <typename DerivedX, typename DerivedY>
CMatrix<real_of_t<DerivedX>> kron(const Eigen::MatrixBase<DerivedX>& x,
                                  const Eigen::MatrixBase<DerivedY>& y) {
  require_square(x, "kron left factor");
  require_square(y, "kron right factor");
  using Real = real_of_t<DerivedX>;
  const CMatrix<Real> xe = x;
  const CMatrix<Real> ye = y;
  const Eigen::Index m = xe.rows();
  const Eigen::Index p = ye.rows();
  CMatrix<Real> out(m * p, m * p);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) out.block(i * p, j * p, p, p) = xe(i, j) * ye;
  return out;
}

/// Column-stacking vectorization.
template <typename Derived>
CVector<real_of_t<Derived>> vec(const Eigen::MatrixBase<Derived>& x) {
  CMatrix<real_of_t<Derived>> tmp = x;
  return Eigen::Map<const CVector<real_of_t<Derived>>>(tmp.data(), tmp.size());
}

template <typename Derived>
CMatrix<real_of_t<Derived>> unvec(const Eigen::MatrixBase<Derived>& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0)
    throw DimensionError("cannot reshape a vector of length " + std::to_string(v.size()) +
                         " into " + std::to_string(rows) + " rows");
  CVector<real_of_t<Derived>> tmp = v;
  return Eigen::Map<const CMatrix<real_of_t<Derived>>>(tmp.data(), rows, v.size() / rows);
}

template <typename Derived>
real_of_t<Derived> hermitian_defect(const Eigen::MatrixBase<Derived>& h) {
  return (h - h.adjoint()).norm();
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Sweeps continue until the off-diagonal Frobenius mass falls below
/// 1e-13 * ||H||_F (or the working-precision floor for narrow types).
template <typename Derived>
EigDecomposition<real_of_t<Derived>> hermitian_eig(const Eigen::MatrixBase<Derived>& h,
                                                   double tol = tolerance::kHermitian) {
  using Real = real_of_t<Derived>;
  using Complex = std::complex<Real>;
  require_square(h, "hermitian_eig input");
  const Real fro = h.norm();
  if (!(hermitian_defect(h) <= Real(tol) * (Real(1) + fro)))
    throw NotHermitian("defect " + std::to_string(double(hermitian_defect(h))) +
                       " exceeds tolerance");

  const Eigen::Index n = h.rows();
  CMatrix<Real> a = (h + h.adjoint()) / Real(2);
  CMatrix<Real> v = CMatrix<Real>::Identity(n, n);
  const Real floor = std::max(Real(1e-13), Real(16) * std::numeric_limits<Real>::epsilon());
  const Real threshold = floor * fro;

  auto off_mass = [&] {
    Real s = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && off_mass() > threshold; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const Real r = std::abs(apq);
        if (r == Real(0)) continue;
        const Complex phase = apq / r;
        const Real tau = (std::real(a(q, q)) - std::real(a(p, p))) / (Real(2) * r);
        const Real t = (tau >= 0 ? Real(1) : Real(-1)) / (std::abs(tau) + std::sqrt(Real(1) + tau * tau));
        const Real c = Real(1) / std::sqrt(Real(1) + t * t);
        const Real s = t * c;
        // G = diag(1, conj(phase)) * [[c, s], [-s, c]] restricted to (p, q).
        const Complex g00(c), g01(s);
        const Complex g10 = -s * std::conj(phase);
        const Complex g11 = c * std::conj(phase);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * g00 + akq * g10;
          a(k, q) = akp * g01 + akq * g11;
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * g00 + vkq * g10;
          v(k, q) = vkp * g01 + vkq * g11;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(g00) * apk + std::conj(g10) * aqk;
          a(q, k) = std::conj(g01) * apk + std::conj(g11) * aqk;
        }
        a(p, q) = a(q, p) = Complex(0);
        a(p, p) = std::real(a(p, p));
        a(q, q) = std::real(a(q, q));
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return std::real(a(i, i)) < std::real(a(j, j));
  });
  EigDecomposition<Real> out{RVector<Real>(n), CMatrix<Real>(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = std::real(a(order[k], order[k]));
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

/// Largest singular value, computed as sqrt(spr(X^* X)).
template <typename Derived>
real_of_t<Derived> spectral_norm(const Eigen::MatrixBase<Derived>& x) {
  using Real = real_of_t<Derived>;
  if (x.size() == 0) return Real(0);
  CMatrix<Real> gram = x.adjoint() * x;
  gram = (gram + gram.adjoint()).eval() / Real(2);
  const auto eig = hermitian_eig(gram);
  return std::sqrt(std::max(eig.eigenvalues(eig.eigenvalues.size() - 1), Real(0)));
}

namespace detail {

template <typename Real>
Real rank_cut(const RVector<Real>& singular_values, double tol) {
  const Real top = singular_values.size() > 0 ? singular_values(0) : Real(0);
  return top > Real(0) ? Real(tol) * top : Real(tol);
}

template <typename Real>
Eigen::Index count_above(const RVector<Real>& singular_values, Real cut) {
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    if (singular_values(i) > cut) ++r;
  return r;
}

}  // namespace detail

/// Orthonormal basis (as columns) of the numerical nullspace of `m`.
///
/// Singular values at or below tol * sigma_max count as zero; for the zero
/// matrix the cut is the absolute `tol`.
template <typename Derived>
CMatrix<real_of_t<Derived>> nullspace(const Eigen::MatrixBase<Derived>& m,
                                      double tol = tolerance::kRank) {
  using Real = real_of_t<Derived>;
  const CMatrix<Real> dense = m;
  Eigen::JacobiSVD<CMatrix<Real>> svd(dense, Eigen::ComputeFullV);
  const RVector<Real> sv = svd.singularValues();
  const Eigen::Index rank = detail::count_above(sv, detail::rank_cut(sv, tol));
  return svd.matrixV().rightCols(dense.cols() - rank);
}

/// Orthonormal basis (as columns) of the numerical column space of `m`.
template <typename Derived>
CMatrix<real_of_t<Derived>> range_basis(const Eigen::MatrixBase<Derived>& m,
                                        double tol = tolerance::kRank) {
  using Real = real_of_t<Derived>;
  const CMatrix<Real> dense = m;
  Eigen::JacobiSVD<CMatrix<Real>> svd(dense, Eigen::ComputeThinU);
  const RVector<Real> sv = svd.singularValues();
  const Eigen::Index rank = detail::count_above(sv, detail::rank_cut(sv, tol));
  return svd.matrixU().leftCols(rank);
}

template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& m, double tol = tolerance::kRank) {
  using Real = real_of_t<Derived>;
  const CMatrix<Real> dense = m;
  Eigen::JacobiSVD<CMatrix<Real>> svd(dense);
  const RVector<Real> sv = svd.singularValues();
  return detail::count_above(sv, detail::rank_cut(sv, tol));
}

/// True iff the smallest eigenvalue is >= -tol * (1 + ||H||).
template <typename Derived>
bool psd_check(const Eigen::MatrixBase<Derived>& h, double tol = tolerance::kHermitian) {
  using Real = real_of_t<Derived>;
  const auto eig = hermitian_eig(h, tol);
  if (eig.eigenvalues.size() == 0) return true;
  const Real lo = eig.eigenvalues(0);
  const Real hi = eig.eigenvalues(eig.eigenvalues.size() - 1);
  const Real norm = std::max(std::abs(lo), std::abs(hi));
  return lo >= -Real(tol) * (Real(1) + norm);
}

/// Applies a real function to the spectrum of a Hermitian matrix.
template <typename Derived, typename Fn>
CMatrix<real_of_t<Derived>> hermitian_function(const Eigen::MatrixBase<Derived>& h, Fn&& fn,
                                               double tol = tolerance::kHermitian) {
  using Real = real_of_t<Derived>;
  const auto eig = hermitian_eig(h, tol);
  RVector<Real> mapped(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < mapped.size(); ++i) mapped(i) = fn(eig.eigenvalues(i));
  return eig.vectors * mapped.template cast<std::complex<Real>>().asDiagonal() *
         eig.vectors.adjoint();
}

/// Direct sum X (+) Y.
template <typename DerivedX, typename DerivedY>
CMatrix<real_of_t<DerivedX>> direct_sum(const Eigen::MatrixBase<DerivedX>& x,
                                        const Eigen::MatrixBase<DerivedY>& y) {
  CMatrix<real_of_t<DerivedX>> out =
      CMatrix<real_of_t<DerivedX>>::Zero(x.rows() + y.rows(), x.cols() + y.cols());
  out.topLeftCorner(x.rows(), x.cols()) = x;
  out.bottomRightCorner(y.rows(), y.cols()) = y;
  return out;
}

}  // namespace arveson
