#pragma once

// Deciding unitary similarity B = U^* A U.
//
// The norm invariants f_(H,K)(A) = ||A kron H + I kron K|| are sampled on a
// seeded dyadic grid. A mismatch refutes similarity outright; a match is only
// evidence, so a "similar" verdict is issued only once an explicit unitary
// has been recovered from the intertwiner space of (A, A^*) and (B, B^*) and
// checked.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arveson/cp_maps.hpp"
#include "arveson/feasibility.hpp"
#include "arveson/random.hpp"

namespace arveson {

inline constexpr std::uint64_t kDefaultSeed = 0xA57E5EED;

/// A reproducible finite sample of (H, K) pairs with entries on the grid
/// {(k + i m) / d : |k|, |m| <= d}.
struct SamplePlan {
  Eigen::Index n = 0;
  std::size_t count = 64;
  std::uint64_t seed = kDefaultSeed;
  std::int64_t grid_denominator = 64;

  friend bool operator==(const SamplePlan&, const SamplePlan&) = default;
};

template <typename Real = double>
struct InvariantPair {
  CMatrix<Real> h;
  CMatrix<Real> k;
};

/// Pair `index` of the plan; depends only on (seed, index).
template <typename Real = double>
InvariantPair<Real> sample_pair(const SamplePlan& plan, std::size_t index) {
  if (plan.n <= 0 || plan.grid_denominator <= 0)
    throw InvalidArgument("sample plan needs positive n and grid denominator");
  const std::int64_t d = plan.grid_denominator;
  const auto span = static_cast<std::uint64_t>(2 * d + 1);
  Rng rng(plan.seed, index);
  auto grid = [&] { return Real(static_cast<std::int64_t>(rng.below(span)) - d) / Real(d); };
  auto draw = [&] {
    CMatrix<Real> m(plan.n, plan.n);
    for (Eigen::Index j = 0; j < plan.n; ++j)
      for (Eigen::Index i = 0; i < plan.n; ++i) {
        const Real re = grid();
        const Real im = grid();
        m(i, j) = std::complex<Real>(re, im);
      }
    return m;
  };
  InvariantPair<Real> out;
  out.h = draw();
  out.k = draw();
  return out;
}

template <typename Real = double>
std::vector<InvariantPair<Real>> sample_pairs(const SamplePlan& plan) {
  std::vector<InvariantPair<Real>> out;
  out.reserve(plan.count);
  for (std::size_t t = 0; t < plan.count; ++t) out.push_back(sample_pair<Real>(plan, t));
  return out;
}

/// Dimension of {S : AS = SA, A^*S = SA^*}.
template <typename Derived>
Eigen::Index commutant_dimension(const Eigen::MatrixBase<Derived>& a, double tol = tolerance::kRank) {
  using Real = real_of_t<Derived>;
  require_square(a, "commutant argument");
  const Eigen::Index n = a.rows();
  const CMatrix<Real> id = CMatrix<Real>::Identity(n, n);
  const CMatrix<Real> ae = a;
  CMatrix<Real> system(2 * n * n, n * n);
  system << kron(id, ae) - kron(ae.transpose(), id), kron(id, ae.adjoint()) - kron(ae.conjugate(), id);
  return nullspace(system, tol).cols();
}

/// Trivial commutant, i.e. {I, A, A^*} generates M_n.
template <typename Derived>
bool is_irreducible(const Eigen::MatrixBase<Derived>& a, double tol = tolerance::kRank) {
  return commutant_dimension(a, tol) == 1;
}

/// f_(H,K)(A) = ||A kron H + I kron K||.
template <typename DerivedA, typename DerivedH, typename DerivedK>
real_of_t<DerivedA> arveson_invariant(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedH>& h,
                                      const Eigen::MatrixBase<DerivedK>& k) {
  using Real = real_of_t<DerivedA>;
  require_square(a, "invariant argument");
  const Eigen::Index n = a.rows();
  if (h.rows() != n || h.cols() != n || k.rows() != n || k.cols() != n)
    throw DimensionError("H and K must match the " + std::to_string(n) + "x" + std::to_string(n) + " argument");
  return spectral_norm(CMatrix<Real>(kron(a, h) + kron(CMatrix<Real>::Identity(n, n), k)));
}

template <typename Real = double>
struct InvariantWitness {
  CMatrix<Real> h;
  CMatrix<Real> k;
  Real value_a = 0;
  Real value_b = 0;
  std::size_t index = 0;
};

template <typename Real = double>
struct InvariantComparison {
  bool match = true;
  /// max over samples of |f(A) - f(B)| / (1 + max(f(A), f(B))).
  Real max_gap = 0;
  std::optional<InvariantWitness<Real>> witness;
};

template <typename Real>
Real relative_gap(Real fa, Real fb) {
  return std::abs(fa - fb) / (Real(1) + std::max(fa, fb));
}

template <typename Real>
InvariantComparison<Real> invariants_match(const CMatrix<Real>& a, const CMatrix<Real>& b, const SamplePlan& plan,
                                           double tol = 1e-8) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("A and B must have the same dimensions");
  InvariantComparison<Real> out;
  for (std::size_t t = 0; t < plan.count; ++t) {
    const auto pair = sample_pair<Real>(plan, t);
    const Real fa = arveson_invariant(a, pair.h, pair.k);
    const Real fb = arveson_invariant(b, pair.h, pair.k);
    const Real gap = relative_gap(fa, fb);
    out.max_gap = std::max(out.max_gap, gap);
    if (gap > Real(tol) && !out.witness) out.witness = InvariantWitness<Real>{pair.h, pair.k, fa, fb, t};
  }
  out.match = !out.witness.has_value();
  return out;
}

/// Trace of one word in A and A^*; letters are 'A' for A and 'S' for A^*.
template <typename Real = double>
struct TraceWord {
  std::string letters;
  std::complex<Real> trace;
};

inline constexpr std::size_t kMaxSpechtWords = std::size_t(1) << 20;

/// tr w(A, A^*) for every nonempty word of length <= max_len, ordered by
/// length and then lexicographically with A before A^*. max_len = 0 selects
/// the default 2 n^2. The word count grows as 2^(max_len + 1); requests above
/// kMaxSpechtWords words raise CapacityError.
template <typename Real>
std::vector<TraceWord<Real>> specht_invariants(const CMatrix<Real>& a, int max_len = 0) {
  require_square(a, "trace-word argument");
  const Eigen::Index n = a.rows();
  if (max_len <= 0) max_len = static_cast<int>(2 * n * n);
  if (max_len >= 63 || (std::size_t(1) << (max_len + 1)) - 2 > kMaxSpechtWords)
    throw CapacityError("trace words up to length " + std::to_string(max_len) + " exceed " +
                        std::to_string(kMaxSpechtWords) + " words");
  const CMatrix<Real> letters[2] = {a, a.adjoint()};
  const char names[2] = {'A', 'S'};

  std::vector<TraceWord<Real>> out;
  std::vector<std::pair<std::string, CMatrix<Real>>> level{{"", CMatrix<Real>::Identity(n, n)}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::pair<std::string, CMatrix<Real>>> next;
    next.reserve(level.size() * 2);
    for (const auto& [word, product] : level)
      for (int l = 0; l < 2; ++l) {
        CMatrix<Real> extended = product * letters[l];
        out.push_back({word + names[l], extended.trace()});
        next.emplace_back(word + names[l], std::move(extended));
      }
    level = std::move(next);
  }
  return out;
}

/// Rotates U by a global phase so that its entry of largest modulus (first in
/// row-major order on ties) is real and positive.
template <typename Real>
CMatrix<Real> normalize_phase(const CMatrix<Real>& u) {
  Eigen::Index bi = 0, bj = 0;
  Real best = -1;
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j)
      if (std::abs(u(i, j)) > best) {
        best = std::abs(u(i, j));
        bi = i;
        bj = j;
      }
  if (!(best > Real(0))) return u;
  CMatrix<Real> out = u * (std::conj(u(bi, bj)) / best);
  out(bi, bj) = best;
  return out;
}

/// Basis of {S : AS = SB, A^*S = SB^*} as columns of vec(S).
template <typename Real>
CMatrix<Real> intertwiner_space(const CMatrix<Real>& a, const CMatrix<Real>& b, double tol = tolerance::kRank) {
  require_square(a, "A");
  if (b.rows() != a.rows() || b.cols() != a.cols()) throw DimensionError("A and B must have the same dimensions");
  const Eigen::Index n = a.rows();
  const CMatrix<Real> id = CMatrix<Real>::Identity(n, n);
  CMatrix<Real> system(2 * n * n, n * n);
  system << kron(id, a) - kron(b.transpose(), id), kron(id, a.adjoint()) - kron(b.conjugate(), id);
  return nullspace(system, tol);
}

/// Unitary U with B = U^* A U, read off the (one-dimensional) intertwiner
/// space when A is irreducible.
template <typename Real>
CMatrix<Real> recover_unitary(const CMatrix<Real>& a, const CMatrix<Real>& b, double tol = 1e-8) {
  const CMatrix<Real> space = intertwiner_space(a, b);
  const Eigen::Index n = a.rows();
  if (space.cols() == 0) throw NoIntertwiner("no S with AS = SB and A^*S = SB^*");
  if (space.cols() > 1)
    throw NotUnitarilySimilar("intertwiner space has dimension " + std::to_string(space.cols()) +
                              " (A is reducible)");
  const CMatrix<Real> s = unvec(space.col(0), n);
  const CMatrix<Real> gram = s.adjoint() * s;
  const Real scale = std::real(gram.trace()) / Real(n);
  const CMatrix<Real> id = CMatrix<Real>::Identity(n, n);
  if (!(scale > Real(0)) || (gram / scale - id).norm() > Real(tol))
    throw NotUnitarilySimilar("intertwiner is not a multiple of a unitary");
  const CMatrix<Real> u = normalize_phase(CMatrix<Real>(s / std::sqrt(scale)));
  const Real unitarity = (u.adjoint() * u - id).norm();
  const Real residual = (u.adjoint() * a * u - b).norm();
  if (unitarity > Real(1e-8) || residual > Real(tol) * (Real(1) + a.norm()))
    throw NotUnitarilySimilar("recovered unitary leaves residual " + std::to_string(double(residual)));
  return u;
}

/// The unitary U of a ucp map phi(X) = U^* X U, if phi is one.
template <typename Real>
CMatrix<Real> kadison_extract(const Superoperator<Real>& phi, double tol = 1e-8) {
  if (!is_ucp(phi, tol)) throw NotUCP("map is not unital completely positive");
  const KrausSet<Real> kraus = kraus_from_choi(choi(phi), tol);
  if (kraus.rank() != 1) throw NotConjugation("Kraus rank is " + std::to_string(kraus.rank()));
  const CMatrix<Real>& v = kraus.ops.front();
  const Eigen::Index n = phi.dim();
  if ((v.adjoint() * v - CMatrix<Real>::Identity(n, n)).norm() > Real(tol))
    throw NotConjugation("single Kraus operator is not unitary");
  return normalize_phase(v);
}

template <typename Real = double>
struct BoundaryReport {
  Real max_distance_to_identity = 0;
  std::optional<ChoiMatrix<Real>> counterexample;
  int feasible_runs = 0;
  int failed_runs = 0;
};

/// Searches for ucp maps fixing I and A from `trials` random PSD starts and
/// measures how far the feasible points found lie from the identity map.
template <typename Real>
BoundaryReport<Real> boundary_verify(const CMatrix<Real>& a, int trials, double tol = 1e-6,
                                     std::uint64_t seed = kDefaultSeed) {
  require_square(a, "A");
  const Eigen::Index n = a.rows();
  const CMatrix<Real> id = CMatrix<Real>::Identity(n, n);
  const ChoiMatrix<Real> identity_choi = choi(Superoperator<Real>::identity(n));
  FeasibilityOptions options;
  options.tol = 1e-10;

  BoundaryReport<Real> report;
  Real worst_counterexample = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, static_cast<std::uint64_t>(t));
    const ChoiMatrix<Real> start(n, random_psd<Real>(n * n, Real(n), rng));
    const auto result = ucp_feasibility<Real>({{id, id}, {a, a}}, start, options);
    if (!result.feasible) {
      ++report.failed_runs;
      continue;
    }
    ++report.feasible_runs;
    const Real d = (result.choi.c - identity_choi.c).norm();
    report.max_distance_to_identity = std::max(report.max_distance_to_identity, d);
    if (d > Real(tol) && d > worst_counterexample) {
      worst_counterexample = d;
      report.counterexample = result.choi;
    }
  }
  return report;
}

/// A ucp map phi with phi(A) = B (and so phi(A^*) = B^*), found by
/// feasibility search from the completely depolarizing map.
template <typename Real>
Superoperator<Real> build_ucp_between(const CMatrix<Real>& a, const CMatrix<Real>& b, double tol = 1e-7) {
  require_square(a, "A");
  if (b.rows() != a.rows() || b.cols() != a.cols()) throw DimensionError("A and B must have the same dimensions");
  const Eigen::Index n = a.rows();
  const CMatrix<Real> id = CMatrix<Real>::Identity(n, n);
  const ChoiMatrix<Real> start(n, CMatrix<Real>::Identity(n * n, n * n) / Real(n));
  FeasibilityOptions options;
  options.tol = tol;
  const auto result = ucp_feasibility<Real>({{id, id}, {a, b}, {a.adjoint(), b.adjoint()}}, start, options);
  if (!result.feasible)
    throw Infeasible("constraint residual " + std::to_string(double(result.residual)) + " after " +
                     std::to_string(result.iterations) + " iterations (" +
                     (result.stalled ? "stalled" : "iteration cap") + ")");
  return superop_from_choi(result.choi);
}

enum class Verdict { similar, not_similar, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::similar: return "similar";
    case Verdict::not_similar: return "not_similar";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

template <typename Real = double>
struct SimilarityReport {
  Verdict verdict = Verdict::inconclusive;
  std::optional<CMatrix<Real>> unitary;
  std::optional<InvariantWitness<Real>> witness;
  Real max_invariant_gap = 0;
  std::pair<Eigen::Index, Eigen::Index> commutant_dims{0, 0};
  SamplePlan plan;
  /// Why the verdict is inconclusive, when it is.
  std::string diagnostic;
};

template <typename Real>
SimilarityReport<Real> arveson_check(const CMatrix<Real>& a, const CMatrix<Real>& b, SamplePlan plan,
                                     double tol = 1e-8) {
  require_square(a, "A");
  if (b.rows() != a.rows() || b.cols() != a.cols()) throw DimensionError("A and B must have the same dimensions");
  if (plan.n == 0) plan.n = a.rows();
  if (plan.n != a.rows()) throw DimensionError("sample plan dimension differs from the matrices");

  SimilarityReport<Real> report;
  report.plan = plan;
  report.commutant_dims = {commutant_dimension(a), commutant_dimension(b)};

  auto comparison = invariants_match(a, b, plan, tol);
  report.max_invariant_gap = comparison.max_gap;
  if (!comparison.match) {
    report.verdict = Verdict::not_similar;
    report.witness = std::move(comparison.witness);
    return report;
  }
  if (report.commutant_dims.first != 1) {
    report.diagnostic = "invariants match but A is reducible (commutant dimension " +
                        std::to_string(report.commutant_dims.first) + ")";
    return report;
  }
  try {
    report.unitary = recover_unitary(a, b, tol);
    report.verdict = Verdict::similar;
  } catch (const NoIntertwiner& e) {
    report.diagnostic = std::string("invariants match but recovery failed: ") + e.what();
  } catch (const NotUnitarilySimilar& e) {
    report.diagnostic = std::string("invariants match but recovery failed: ") + e.what();
  }
  return report;
}

template <typename Real = double>
struct ProbeSample {
  std::size_t index = 0;
  Real value_a = 0;
  Real value_b = 0;
  Real gap = 0;
};

/// Invariant data for A = X (+) X against B = X (+) 0, on the sampled pairs
/// and on the companion pairs (-K, K).
template <typename Real = double>
struct RemarkProbe {
  CMatrix<Real> a;
  CMatrix<Real> b;
  SamplePlan plan;
  std::pair<Eigen::Index, Eigen::Index> commutant_dims{0, 0};
  std::vector<ProbeSample<Real>> sampled;
  std::vector<ProbeSample<Real>> opposite;
  Real max_gap_sampled = 0;
  Real max_gap_opposite = 0;
  bool invariants_matched = true;
};

template <typename Real>
RemarkProbe<Real> probe_remark(const CMatrix<Real>& x, SamplePlan plan, double tol = 1e-8) {
  require_square(x, "X");
  const Eigen::Index m = x.rows();
  RemarkProbe<Real> probe;
  probe.a = direct_sum(x, x);
  probe.b = direct_sum(x, CMatrix<Real>::Zero(m, m));
  plan.n = 2 * m;
  probe.plan = plan;
  probe.commutant_dims = {commutant_dimension(probe.a), commutant_dimension(probe.b)};
  for (std::size_t t = 0; t < plan.count; ++t) {
    const auto pair = sample_pair<Real>(plan, t);
    ProbeSample<Real> s{t, arveson_invariant(probe.a, pair.h, pair.k), arveson_invariant(probe.b, pair.h, pair.k)};
    s.gap = relative_gap(s.value_a, s.value_b);
    probe.max_gap_sampled = std::max(probe.max_gap_sampled, s.gap);
    probe.sampled.push_back(s);

    const CMatrix<Real> minus_k = -pair.k;
    ProbeSample<Real> o{t, arveson_invariant(probe.a, minus_k, pair.k), arveson_invariant(probe.b, minus_k, pair.k)};
    o.gap = relative_gap(o.value_a, o.value_b);
    probe.max_gap_opposite = std::max(probe.max_gap_opposite, o.gap);
    probe.opposite.push_back(o);
  }
  probe.invariants_matched = probe.max_gap_sampled <= Real(tol);
  return probe;
}

}  // namespace arveson
