#pragma once

// Search for a ucp map with prescribed values phi(A_i) = B_i.
//
// The feasible set is the intersection of the PSD cone of Choi matrices
// with the affine set { C : phi_C(I) = I, phi_C(A_i) = B_i }. Dykstra's
// alternating projections converge to the point of that intersection
// nearest the starting Choi matrix; when the sets do not meet, the
// constraint residual levels off above the tolerance and the search reports
// infeasibility.
//
// With one affine set, Dykstra's iteration collapses to the fixed-point map
//
//   z -> z + P_A(P_K(z)) - P_K(z),    answer = P_K(z*),
//
// which is run here with safeguarded Anderson acceleration. Feasible sets
// of this problem usually lie in the boundary of the cone, where plain
// alternating projections converge sublinearly; every `stall_window`
// iterations the best iterate is therefore also polished by Gauss-Newton on
// a low-rank factor C = Y Y^* seeded from its dominant eigenvectors. A
// polished point is PSD by construction and is accepted only if it meets
// the tolerance.

#include <deque>
#include <limits>
#include <utility>
#include <vector>

#include "arveson/cp_maps.hpp"

namespace arveson {

template <typename Real = double>
struct MapConstraint {
  CMatrix<Real> input;
  CMatrix<Real> output;
};

struct FeasibilityOptions {
  long max_iter = 100000;
  long stall_window = 500;
  /// A window whose best residual is not below this fraction of the
  /// previous window's best counts as a stall.
  double stall_ratio = 0.999;
  double tol = 1e-7;
  int anderson_memory = 10;
  bool polish = true;
};

template <typename Real = double>
struct FeasibilityResult {
  bool feasible = false;
  bool stalled = false;
  ChoiMatrix<Real> choi;
  /// Euclidean norm of the stacked constraint violations of `choi`.
  Real residual = 0;
  long iterations = 0;
};

namespace detail {

template <typename Real>
CMatrix<Real> pseudo_inverse(const CMatrix<Real>& m, double tol) {
  Eigen::JacobiSVD<CMatrix<Real>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector<Real> sv = svd.singularValues();
  const Real cut = rank_cut(sv, tol);
  RVector<Real> inv(sv.size());
  for (Eigen::Index k = 0; k < sv.size(); ++k) inv(k) = sv(k) > cut ? Real(1) / sv(k) : Real(0);
  return svd.matrixV() * inv.template cast<std::complex<Real>>().asDiagonal() * svd.matrixU().adjoint();
}

/// Linear constraints G vec(C) = h for the listed values, with unitality and
/// the adjoint of every pair added so that the affine set is closed under
/// C -> C^* (its projection then keeps Hermitian points Hermitian).
template <typename Real>
class AffineChoiConstraints {
 public:
  AffineChoiConstraints(Eigen::Index n, const std::vector<MapConstraint<Real>>& pairs) : n_(n) {
    std::vector<MapConstraint<Real>> all;
    all.push_back({CMatrix<Real>::Identity(n, n), CMatrix<Real>::Identity(n, n)});
    for (const auto& p : pairs) {
      if (p.input.rows() != n || p.input.cols() != n || p.output.rows() != n || p.output.cols() != n)
        throw DimensionError("constraint pair does not consist of " + std::to_string(n) + "x" +
                             std::to_string(n) + " matrices");
      all.push_back(p);
      all.push_back({p.input.adjoint(), p.output.adjoint()});
    }
    const Eigen::Index size = n * n;
    const Eigen::Index rows = static_cast<Eigen::Index>(all.size()) * size;
    g_ = CMatrix<Real>::Zero(rows, size * size);
    h_ = CVector<Real>(rows);
    Eigen::Index row = 0;
    for (const auto& p : all) {
      // phi_C(A)(a, b) = sum_ij A(i, j) C(i*n + a, j*n + b)
      for (Eigen::Index b = 0; b < n; ++b)
        for (Eigen::Index a = 0; a < n; ++a, ++row) {
          for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
              g_(row, (j * n + b) * size + (i * n + a)) = p.input(i, j);
          h_(row) = p.output(a, b);
        }
    }
    pinv_ = pseudo_inverse(g_, 1e-12);
  }

  CVector<Real> project(const CVector<Real>& x) const { return x - pinv_ * (g_ * x - h_); }
  Real residual(const CVector<Real>& x) const { return (g_ * x - h_).norm(); }

  CVector<Real> residual_vector(const CVector<Real>& x) const { return g_ * x - h_; }
  const CMatrix<Real>& constraint_matrix() const { return g_; }

 private:
  Eigen::Index n_;
  CMatrix<Real> g_;
  CVector<Real> h_;
  CMatrix<Real> pinv_;
};

template <typename Real>
CMatrix<Real> project_psd(const CMatrix<Real>& x) {
  const CMatrix<Real> sym = (x + x.adjoint()) / Real(2);
  const auto eig = hermitian_eig(sym, 1e-6);
  RVector<Real> clipped = eig.eigenvalues.cwiseMax(Real(0));
  return eig.vectors * clipped.template cast<std::complex<Real>>().asDiagonal() * eig.vectors.adjoint();
}

/// Gauss-Newton refinement of a factored Choi matrix C = Y Y^*, started
/// from the dominant eigenpairs of `x`. Ranks given by successively smaller
/// eigenvalue thresholds are tried in turn; the first refined point meeting
/// the tolerance is returned. Results are PSD by construction.
template <typename Real>
bool polish(const AffineChoiConstraints<Real>& affine, const CMatrix<Real>& x, double tol,
            CMatrix<Real>& out, Real& out_residual) {
  using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  const auto eig = hermitian_eig(CMatrix<Real>((x + x.adjoint()) / Real(2)), 1e-6);
  const Eigen::Index size = eig.eigenvalues.size();
  const Real top = eig.eigenvalues(size - 1);
  if (!(top > Real(0))) return false;
  const CMatrix<Real>& g = affine.constraint_matrix();
  const Eigen::Index rows = g.rows();

  Eigen::Index last_rank = -1;
  for (double threshold = 1e-2; threshold >= 1e-10; threshold /= 10) {
    Eigen::Index rank = 0;
    while (rank < size && eig.eigenvalues(size - 1 - rank) > Real(threshold) * top) ++rank;
    if (rank == last_rank) continue;
    last_rank = rank;

    CMatrix<Real> y = eig.vectors.rightCols(rank);
    for (Eigen::Index k = 0; k < rank; ++k) y.col(k) *= std::sqrt(eig.eigenvalues(size - rank + k));

    Real residual = affine.residual(vec(CMatrix<Real>(y * y.adjoint())));
    for (int it = 0; it < 30 && residual > Real(tol) * Real(1e-3); ++it) {
      // Real Jacobian of Y -> G vec(Y Y^*) over (Re Y, Im Y).
      const Eigen::Index unknowns = size * rank;
      RMatrix jac(2 * rows, 2 * unknowns);
      for (Eigen::Index k = 0; k < unknowns; ++k) {
        for (int part = 0; part < 2; ++part) {
          CMatrix<Real> dy = CMatrix<Real>::Zero(size, rank);
          dy(k % size, k / size) = part == 0 ? std::complex<Real>(1) : std::complex<Real>(0, 1);
          const CVector<Real> col = g * vec(CMatrix<Real>(dy * y.adjoint() + y * dy.adjoint()));
          jac.col(part * unknowns + k) << col.real(), col.imag();
        }
      }
      const CVector<Real> r = affine.residual_vector(vec(CMatrix<Real>(y * y.adjoint())));
      Eigen::Matrix<Real, Eigen::Dynamic, 1> rhs(2 * rows);
      rhs << r.real(), r.imag();
      const Eigen::Matrix<Real, Eigen::Dynamic, 1> delta = jac.completeOrthogonalDecomposition().solve(rhs);
      CMatrix<Real> trial = y;
      for (Eigen::Index k = 0; k < unknowns; ++k)
        trial(k % size, k / size) -= std::complex<Real>(delta(k), delta(unknowns + k));
      const Real trial_residual = affine.residual(vec(CMatrix<Real>(trial * trial.adjoint())));
      if (!(trial_residual < residual)) break;
      y = std::move(trial);
      residual = trial_residual;
    }
    if (residual <= Real(tol)) {
      out = y * y.adjoint();
      out = (out + out.adjoint()).eval() / Real(2);
      out_residual = affine.residual(vec(out));
      return out_residual <= Real(tol);
    }
  }
  return false;
}

}  // namespace detail

template <typename Real>
FeasibilityResult<Real> ucp_feasibility(const std::vector<MapConstraint<Real>>& pairs,
                                        const ChoiMatrix<Real>& start,
                                        const FeasibilityOptions& options = {}) {
  const Eigen::Index n = start.n;
  const Eigen::Index size = n * n;
  const detail::AffineChoiConstraints<Real> affine(n, pairs);

  auto to_cone = [&](const CVector<Real>& z) { return vec(detail::project_psd(unvec(z, size))); };
  // Dykstra map: F(z) = z + P_A(P_K z) - P_K z. Writes P_K z to `x`.
  auto step = [&](const CVector<Real>& z, CVector<Real>& x) {
    x = to_cone(z);
    return CVector<Real>(z + affine.project(x) - x);
  };

  CVector<Real> z = vec(start.c);
  CVector<Real> x;
  CVector<Real> fz = step(z, x);
  CVector<Real> g = fz - z;
  CVector<Real> prev_g, prev_f;
  std::deque<CVector<Real>> dg, df;

  FeasibilityResult<Real> result{false, false, start, affine.residual(x), 0};
  Real best = std::numeric_limits<Real>::infinity();
  Real best_at_window = best;
  CVector<Real> best_x = x;

  for (long k = 1; k <= options.max_iter; ++k) {
    result.iterations = k;
    const Real residual = affine.residual(x);
    if (residual < best) {
      best = residual;
      best_x = x;
    }
    if (residual <= Real(options.tol)) {
      result.feasible = true;
      break;
    }
    if (k % options.stall_window == 0) {
      CMatrix<Real> polished;
      Real polished_residual;
      if (options.polish && detail::polish(affine, unvec(best_x, size), options.tol, polished, polished_residual)) {
        best_x = vec(polished);
        best = polished_residual;
        result.feasible = true;
        break;
      }
      if (best > Real(options.stall_ratio) * best_at_window) {
        result.stalled = true;
        break;
      }
      best_at_window = best;
    }

    // Anderson (type II) extrapolation over the last few steps.
    CVector<Real> next = fz;
    if (options.anderson_memory > 0 && k > 1) {
      dg.push_back(g - prev_g);
      df.push_back(fz - prev_f);
      if (static_cast<int>(dg.size()) > options.anderson_memory) {
        dg.pop_front();
        df.pop_front();
      }
      const Eigen::Index len = g.size();
      const auto m = static_cast<Eigen::Index>(dg.size());
      Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> basis(2 * len, m);
      Eigen::Matrix<Real, Eigen::Dynamic, 1> target(2 * len);
      for (Eigen::Index j = 0; j < m; ++j) {
        basis.col(j).head(len) = dg[j].real();
        basis.col(j).tail(len) = dg[j].imag();
      }
      target.head(len) = g.real();
      target.tail(len) = g.imag();
      const Eigen::Matrix<Real, Eigen::Dynamic, 1> gamma = basis.colPivHouseholderQr().solve(target);
      for (Eigen::Index j = 0; j < m; ++j) next -= gamma(j) * df[j];
    }
    prev_g = g;
    prev_f = fz;
    CVector<Real> next_x;
    CVector<Real> next_f = step(next, next_x);
    CVector<Real> next_g = next_f - next;
    if (options.anderson_memory > 0 && next_g.norm() > Real(2) * g.norm()) {
      // Extrapolation overshot: fall back to the plain Dykstra step.
      dg.clear();
      df.clear();
      next = fz;
      next_f = step(next, next_x);
      next_g = next_f - next;
    }
    z = std::move(next);
    fz = std::move(next_f);
    g = std::move(next_g);
    x = std::move(next_x);
  }
  if (!result.feasible && !result.stalled) {
    const Real residual = affine.residual(x);
    if (residual < best) {
      best = residual;
      best_x = x;
    }
  }
  CMatrix<Real> c = unvec(best_x, size);
  result.choi = ChoiMatrix<Real>(n, (c + c.adjoint()) / Real(2));
  result.residual = best;
  return result;
}

}  // namespace arveson
