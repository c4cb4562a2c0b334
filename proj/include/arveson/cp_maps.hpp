#pragma once

// Linear maps of matrix space, complete positivity, and the conditional
// expectations obtained from ucp maps.
//
// Conventions, fixed library-wide:
//   * a Superoperator on M_n is an n^2 x n^2 matrix L acting on column-stacked
//     vectorizations, phi(X) = unvec(L vec(X));
//   * the Choi matrix has block (i, j) equal to phi(E_ij), i.e.
//     C(i*n + a, j*n + b) = phi(E_ij)(a, b);
//   * Kraus operators act as phi(X) = sum_j V_j^* X V_j.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "arveson/linalg.hpp"
#include "arveson/random.hpp"

namespace arveson {

template <typename Real = double>
class Superoperator {
 public:
  Superoperator(Eigen::Index n, CMatrix<Real> matrix) : n_(n), matrix_(std::move(matrix)) {
    if (n_ <= 0 || matrix_.rows() != n_ * n_ || matrix_.cols() != n_ * n_)
      throw DimensionError("superoperator on M_" + std::to_string(n_) + " needs a " +
                           std::to_string(n_ * n_) + "x" + std::to_string(n_ * n_) + " matrix");
  }

  static Superoperator identity(Eigen::Index n) {
    return Superoperator(n, CMatrix<Real>::Identity(n * n, n * n));
  }

  /// Tabulates a linear map given as a callable M_n -> M_n.
  template <typename Fn>
  static Superoperator from_function(Eigen::Index n, Fn&& fn) {
    CMatrix<Real> l(n * n, n * n);
    for (Eigen::Index k = 0; k < n * n; ++k) {
      CMatrix<Real> e = CMatrix<Real>::Zero(n, n);
      e(k % n, k / n) = Real(1);
      const CMatrix<Real> image = fn(e);
      if (image.rows() != n || image.cols() != n)
        throw DimensionError("map does not send M_n to M_n");
      l.col(k) = vec(image);
    }
    return Superoperator(n, std::move(l));
  }

  Eigen::Index dim() const { return n_; }
  const CMatrix<Real>& matrix() const { return matrix_; }

  template <typename Derived>
  CMatrix<Real> apply(const Eigen::MatrixBase<Derived>& x) const {
    if (x.rows() != n_ || x.cols() != n_)
      throw DimensionError("argument is " + std::to_string(x.rows()) + "x" +
                           std::to_string(x.cols()) + ", map acts on M_" + std::to_string(n_));
    return unvec(matrix_ * vec(x), n_);
  }

  template <typename Derived>
  CMatrix<Real> operator()(const Eigen::MatrixBase<Derived>& x) const {
    return apply(x);
  }

  /// omega^k.
  Superoperator power(unsigned k) const {
    CMatrix<Real> acc = CMatrix<Real>::Identity(matrix_.rows(), matrix_.cols());
    CMatrix<Real> base = matrix_;
    while (k > 0) {
      if (k & 1u) acc = (acc * base).eval();
      base = (base * base).eval();
      k >>= 1u;
    }
    return Superoperator(n_, std::move(acc));
  }

  friend Superoperator operator*(const Superoperator& after, const Superoperator& before) {
    check_same(after, before);
    return Superoperator(after.n_, after.matrix_ * before.matrix_);
  }
  friend Superoperator operator+(const Superoperator& a, const Superoperator& b) {
    check_same(a, b);
    return Superoperator(a.n_, a.matrix_ + b.matrix_);
  }
  friend Superoperator operator-(const Superoperator& a, const Superoperator& b) {
    check_same(a, b);
    return Superoperator(a.n_, a.matrix_ - b.matrix_);
  }
  friend Superoperator operator*(std::complex<Real> s, const Superoperator& a) {
    return Superoperator(a.n_, s * a.matrix_);
  }

 private:
  static void check_same(const Superoperator& a, const Superoperator& b) {
    if (a.n_ != b.n_) throw DimensionError("superoperators act on different matrix sizes");
  }

  Eigen::Index n_;
  CMatrix<Real> matrix_;
};

/// Spectral norm of the difference of the representing matrices.
template <typename Real>
Real distance(const Superoperator<Real>& a, const Superoperator<Real>& b) {
  return spectral_norm((a - b).matrix());
}

template <typename Real = double>
struct ChoiMatrix {
  ChoiMatrix(Eigen::Index n_, CMatrix<Real> c_) : n(n_), c(std::move(c_)) {
    if (n <= 0 || c.rows() != n * n || c.cols() != n * n)
      throw DimensionError("Choi matrix for M_" + std::to_string(n) + " must be " +
                           std::to_string(n * n) + "x" + std::to_string(n * n));
  }

  /// Infers n from an n^2 x n^2 matrix.
  static ChoiMatrix from_matrix(CMatrix<Real> c) {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(c.rows()))));
    if (c.rows() != c.cols() || n * n != c.rows())
      throw DimensionError("Choi matrix must be square with a perfect-square size");
    return ChoiMatrix(n, std::move(c));
  }

  Eigen::Index n;
  CMatrix<Real> c;
};

template <typename Real = double>
struct KrausSet {
  std::vector<CMatrix<Real>> ops;
  std::size_t rank() const { return ops.size(); }
};

/// An idempotent ucp map Omega together with a basis of its range.
template <typename Real = double>
struct ConditionalExpectation {
  Superoperator<Real> omega;
  std::vector<CMatrix<Real>> fixed_basis;

  template <typename Derived>
  CMatrix<Real> apply(const Eigen::MatrixBase<Derived>& x) const {
    return omega.apply(x);
  }
};

/// X -> V^* X V; its matrix is V^T kron V^* under column stacking.
template <typename Derived>
Superoperator<real_of_t<Derived>> conjugation_superop(const Eigen::MatrixBase<Derived>& v) {
  require_square(v, "conjugation operator");
  return Superoperator<real_of_t<Derived>>(v.rows(), kron(v.transpose(), v.adjoint()));
}

template <typename Real>
ChoiMatrix<Real> choi(const Superoperator<Real>& phi) {
  const Eigen::Index n = phi.dim();
  const CMatrix<Real>& l = phi.matrix();
  CMatrix<Real> c(n * n, n * n);
  // phi(E_ij)(a, b) = L(b*n + a, j*n + i)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) c(i * n + a, j * n + b) = l(b * n + a, j * n + i);
  return ChoiMatrix<Real>(n, std::move(c));
}

template <typename Real>
Superoperator<Real> superop_from_choi(const ChoiMatrix<Real>& choi_matrix) {
  const Eigen::Index n = choi_matrix.n;
  CMatrix<Real> l(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) l(b * n + a, j * n + i) = choi_matrix.c(i * n + a, j * n + b);
  return Superoperator<Real>(n, std::move(l));
}

template <typename Real>
Superoperator<Real> superop_from_kraus(const KrausSet<Real>& kraus, Eigen::Index n) {
  CMatrix<Real> l = CMatrix<Real>::Zero(n * n, n * n);
  for (const auto& v : kraus.ops) l += conjugation_superop(v).matrix();
  return Superoperator<Real>(n, std::move(l));
}

/// Minimal Kraus decomposition phi(X) = sum_j V_j^* X V_j read off the
/// spectral decomposition C = sum_j lambda_j w_j w_j^*.
///
/// With block (i, j) = phi(E_ij), a single term V^* X V has Choi vector
/// w(i*n + a) = conj(V(i, a)), so each kept eigenvector is reshaped row-wise
/// and conjugated.
template <typename Real>
KrausSet<Real> kraus_from_choi(const ChoiMatrix<Real>& choi_matrix, double tol = tolerance::kRank) {
  EigDecomposition<Real> eig;
  try {
    eig = hermitian_eig(choi_matrix.c, tol);
  } catch (const NotHermitian& e) {
    throw NotCompletelyPositive(std::string("Choi matrix is not Hermitian (") + e.what() + ")");
  }
  const Eigen::Index size = eig.eigenvalues.size();
  const Real lo = eig.eigenvalues(0);
  const Real hi = eig.eigenvalues(size - 1);
  const Real scale = std::max(std::abs(lo), std::abs(hi));
  if (lo < -Real(tol) * (Real(1) + scale))
    throw NotCompletelyPositive("Choi matrix has eigenvalue " + std::to_string(double(lo)));

  const Eigen::Index n = choi_matrix.n;
  KrausSet<Real> out;
  for (Eigen::Index k = size - 1; k >= 0; --k) {
    const Real lambda = eig.eigenvalues(k);
    if (!(lambda > Real(tol) * hi)) break;
    CMatrix<Real> v(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index a = 0; a < n; ++a)
        v(i, a) = std::sqrt(lambda) * std::conj(eig.vectors(i * n + a, k));
    out.ops.push_back(std::move(v));
  }
  return out;
}

/// Unital and completely positive within `tol`.
template <typename Real>
bool is_ucp(const Superoperator<Real>& phi, double tol = tolerance::kRank) {
  const Eigen::Index n = phi.dim();
  if (spectral_norm(phi.apply(CMatrix<Real>::Identity(n, n)) - CMatrix<Real>::Identity(n, n)) > Real(tol))
    return false;
  try {
    return psd_check(choi(phi).c, tol);
  } catch (const NotHermitian&) {
    return false;
  }
}

/// Lower estimate of ||phi|| = max{ ||phi(X)|| : ||X|| = 1 } from the
/// identity, a few random unitaries and `samples` random unit-norm X.
template <typename Real>
Real estimate_norm(const Superoperator<Real>& phi, int samples = 200, std::uint64_t seed = 0x5EED) {
  const Eigen::Index n = phi.dim();
  Rng rng(seed);
  Real best = spectral_norm(phi.apply(CMatrix<Real>::Identity(n, n)));
  for (int k = 0; k < 8; ++k) best = std::max(best, spectral_norm(phi.apply(random_unitary<Real>(n, rng))));
  for (int k = 0; k < samples; ++k) {
    CMatrix<Real> x = random_gaussian<Real>(n, n, rng);
    x /= spectral_norm(x);
    best = std::max(best, spectral_norm(phi.apply(x)));
  }
  return best;
}

namespace detail {

/// Idempotent with range span(right) and kernel (span left)^perp:
/// right (left^* right)^{-1} left^*.
template <typename Real>
CMatrix<Real> oblique_projector(const CMatrix<Real>& right, const CMatrix<Real>& left, double min_cosine) {
  if (right.cols() != left.cols())
    throw DecompositionFailure("left and right invariant subspaces differ in dimension (" +
                               std::to_string(left.cols()) + " vs " + std::to_string(right.cols()) + ")");
  const CMatrix<Real> gram = left.adjoint() * right;
  Eigen::JacobiSVD<CMatrix<Real>> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Real smallest = svd.singularValues()(svd.singularValues().size() - 1);
  if (smallest < Real(min_cosine))
    throw DecompositionFailure("invariant subspace meets its complement (cosine " +
                               std::to_string(double(smallest)) + ")");
  return right * svd.solve(CMatrix<Real>(left.adjoint()));
}

template <typename Real>
std::vector<CMatrix<Real>> columns_as_matrices(const CMatrix<Real>& basis, Eigen::Index n) {
  std::vector<CMatrix<Real>> out;
  out.reserve(static_cast<std::size_t>(basis.cols()));
  for (Eigen::Index k = 0; k < basis.cols(); ++k) out.push_back(unvec(basis.col(k), n));
  return out;
}

inline constexpr double kNormSlack = 1e-6;

}  // namespace detail

/// Wraps an idempotent map as a ConditionalExpectation, reading its range
/// basis from the column space of L.
template <typename Real>
ConditionalExpectation<Real> make_conditional_expectation(const Superoperator<Real>& omega,
                                                          double tol = tolerance::kRank) {
  const CMatrix<Real>& l = omega.matrix();
  const Real defect = spectral_norm(l * l - l);
  if (defect > Real(1e-9) * std::max(Real(1), spectral_norm(l)))
    throw DecompositionFailure("map is not idempotent (defect " + std::to_string(double(defect)) + ")");
  return {omega, detail::columns_as_matrices<Real>(range_basis(l, tol), omega.dim())};
}

/// The limit of the Cesaro means of omega, computed as the idempotent with
/// range ker(omega - id) and kernel ran(omega - id).
template <typename Real>
ConditionalExpectation<Real> ergodic_projection(const Superoperator<Real>& omega,
                                                double tol = tolerance::kRank) {
  const Eigen::Index n = omega.dim();
  const Eigen::Index size = n * n;
  const CMatrix<Real> shifted = omega.matrix() - CMatrix<Real>::Identity(size, size);

  const CMatrix<Real> right = nullspace(shifted, tol);
  if (right.cols() == 0) throw NoFixedPoint("1 is not an eigenvalue of the map");

  const Real norm = estimate_norm(omega);
  if (norm > Real(1) + Real(detail::kNormSlack))
    throw DecompositionFailure("map norm is at least " + std::to_string(double(norm)) + " > 1");

  // ran(omega - id) is the annihilator of ker(omega^* - id).
  const CMatrix<Real> left = nullspace(CMatrix<Real>(shifted.adjoint()), tol);
  CMatrix<Real> projector = detail::oblique_projector(right, left, std::sqrt(tol));

  const Real defect = spectral_norm(projector * projector - projector);
  if (defect > Real(1e-9) * std::max(Real(1), spectral_norm(projector)))
    throw DecompositionFailure("projection is not idempotent (defect " + std::to_string(double(defect)) + ")");
  return {Superoperator<Real>(n, std::move(projector)), detail::columns_as_matrices<Real>(right, n)};
}

/// (1/m) sum_{k=0}^{m-1} omega^k, summed exactly.
template <typename Real>
Superoperator<Real> cesaro_average(const Superoperator<Real>& omega, long m) {
  if (m < 1) throw InvalidArgument("Cesaro average needs m >= 1");
  const Eigen::Index size = omega.matrix().rows();
  CMatrix<Real> term = CMatrix<Real>::Identity(size, size);
  CMatrix<Real> sum = term;
  for (long k = 1; k < m; ++k) {
    term = (omega.matrix() * term).eval();
    sum += term;
  }
  return Superoperator<Real>(omega.dim(), sum / Real(m));
}

/// Cesaro averages at several m, sharing one pass over the powers.
template <typename Real>
std::vector<Superoperator<Real>> cesaro_averages(const Superoperator<Real>& omega, std::vector<long> ms) {
  for (long m : ms)
    if (m < 1) throw InvalidArgument("Cesaro average needs m >= 1");
  std::vector<long> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  const Eigen::Index size = omega.matrix().rows();
  CMatrix<Real> term = CMatrix<Real>::Identity(size, size);
  CMatrix<Real> sum = term;
  std::vector<Superoperator<Real>> by_sorted;
  long k = 1;
  for (long m : sorted) {
    for (; k < m; ++k) {
      term = (omega.matrix() * term).eval();
      sum += term;
    }
    by_sorted.emplace_back(omega.dim(), sum / Real(m));
  }
  std::vector<Superoperator<Real>> out;
  for (long m : ms)
    out.push_back(by_sorted[static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), m) - sorted.begin())]);
  return out;
}

/// One cluster of eigenvalues of modulus (numerically) one, with the ranks
/// of L - lambda and (L - lambda)^2.
template <typename Real>
struct PeripheralEigenvalue {
  std::complex<Real> value;
  Eigen::Index multiplicity = 0;
  Eigen::Index rank_first = 0;
  Eigen::Index rank_second = 0;

  bool semisimple() const { return rank_first == rank_second; }
};

template <typename Real>
std::vector<PeripheralEigenvalue<Real>> peripheral_spectrum(const Superoperator<Real>& omega,
                                                            double tol = 1e-8,
                                                            double cluster_radius = 1e-6) {
  const CMatrix<Real>& l = omega.matrix();
  const Eigen::Index size = l.rows();
  Eigen::ComplexEigenSolver<CMatrix<Real>> solver(l, false);
  std::vector<PeripheralEigenvalue<Real>> clusters;
  for (Eigen::Index k = 0; k < size; ++k) {
    const std::complex<Real> lambda = solver.eigenvalues()(k);
    if (std::abs(lambda) < Real(1) - Real(tol)) continue;
    auto hit = std::find_if(clusters.begin(), clusters.end(), [&](const auto& c) {
      return std::abs(c.value - lambda) <= Real(cluster_radius);
    });
    if (hit == clusters.end()) {
      clusters.push_back({lambda, 1});
    } else {
      hit->value += (lambda - hit->value) / Real(hit->multiplicity + 1);
      ++hit->multiplicity;
    }
  }
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    return std::arg(a.value) < std::arg(b.value);
  });
  for (auto& c : clusters) {
    const CMatrix<Real> shifted = l - c.value * CMatrix<Real>::Identity(size, size);
    c.rank_first = numerical_rank(shifted);
    c.rank_second = numerical_rank(CMatrix<Real>(shifted * shifted));
  }
  return clusters;
}

/// The idempotent cluster point of {omega^k}: the spectral projection onto
/// the eigenspaces of the peripheral eigenvalues.
template <typename Real>
Superoperator<Real> peripheral_expectation(const Superoperator<Real>& omega, double tol = 1e-8) {
  const Eigen::Index n = omega.dim();
  const Eigen::Index size = n * n;
  const auto spectrum = peripheral_spectrum(omega, tol);
  CMatrix<Real> right(size, 0), left(size, 0);
  for (const auto& c : spectrum) {
    if (!c.semisimple())
      throw PeripheralDefect("eigenvalue (" + std::to_string(double(std::real(c.value))) + ", " +
                             std::to_string(double(std::imag(c.value))) + ") has a Jordan block");
    const CMatrix<Real> shifted = omega.matrix() - c.value * CMatrix<Real>::Identity(size, size);
    const CMatrix<Real> r = nullspace(shifted);
    const CMatrix<Real> w = nullspace(CMatrix<Real>(shifted.adjoint()));
    if (r.cols() != c.multiplicity || w.cols() != c.multiplicity)
      throw PeripheralDefect("geometric multiplicity " + std::to_string(r.cols()) +
                             " differs from algebraic multiplicity " + std::to_string(c.multiplicity));
    CMatrix<Real> grown_r(size, right.cols() + r.cols()), grown_l(size, left.cols() + w.cols());
    grown_r << right, r;
    grown_l << left, w;
    right = std::move(grown_r);
    left = std::move(grown_l);
  }
  if (right.cols() == 0) return Superoperator<Real>(n, CMatrix<Real>::Zero(size, size));
  return Superoperator<Real>(n, detail::oblique_projector(right, left, std::sqrt(tol)));
}

namespace detail {
inline constexpr double kRangeTol = 1e-8;

template <typename Real>
bool in_range(const ConditionalExpectation<Real>& expectation, const CMatrix<Real>& x) {
  return spectral_norm(expectation.apply(x) - x) <= Real(kRangeTol) * (Real(1) + spectral_norm(x));
}
}  // namespace detail

/// X . Y = Omega(XY) on the range of Omega.
template <typename Real>
CMatrix<Real> choi_effros_product(const ConditionalExpectation<Real>& expectation,
                                  const CMatrix<Real>& x, const CMatrix<Real>& y) {
  if (!detail::in_range(expectation, x)) throw NotInRange("left factor is not fixed by the expectation");
  if (!detail::in_range(expectation, y)) throw NotInRange("right factor is not fixed by the expectation");
  return expectation.apply(CMatrix<Real>(x * y));
}

/// ||Omega(Y Z) - Omega(Y Omega(Z))||.
template <typename Real>
Real module_property_check(const ConditionalExpectation<Real>& expectation, const CMatrix<Real>& y,
                           const CMatrix<Real>& z) {
  const CMatrix<Real> direct = expectation.apply(CMatrix<Real>(y * z));
  const CMatrix<Real> inner = expectation.apply(z);
  const CMatrix<Real> nested = expectation.apply(CMatrix<Real>(y * inner));
  return spectral_norm(direct - nested);
}

}  // namespace arveson
