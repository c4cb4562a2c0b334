#pragma once

// Reproducible random matrices.
//
// std::mt19937_64 output is fully specified by the standard, but the
// standard distributions are not; uniform and Gaussian draws are therefore
// derived from the raw engine output here so that seeded runs agree
// bit-for-bit across standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "arveson/linalg.hpp"

namespace arveson {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix64(seed ^ mix64(stream))) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * std::numbers::pi * v;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

template <typename Real = double>
CMatrix<Real> random_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  CMatrix<Real> out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      out(i, j) = std::complex<Real>(Real(re), Real(im));
    }
  return out;
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of R's diagonal absorbed into Q.
template <typename Real = double>
CMatrix<Real> random_unitary(Eigen::Index n, Rng& rng) {
  const CMatrix<Real> g = random_gaussian<Real>(n, n, rng);
  Eigen::HouseholderQR<CMatrix<Real>> qr(g);
  CMatrix<Real> q = qr.householderQ() * CMatrix<Real>::Identity(n, n);
  const CMatrix<Real> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<Real> d = r(k, k);
    if (std::abs(d) > Real(0)) q.col(k) *= d / std::abs(d);
  }
  return q;
}

template <typename Real = double>
CMatrix<Real> random_hermitian(Eigen::Index n, Rng& rng) {
  const CMatrix<Real> g = random_gaussian<Real>(n, n, rng);
  return (g + g.adjoint()) / Real(2);
}

/// Random positive semidefinite matrix G G^* scaled to the given trace.
template <typename Real = double>
CMatrix<Real> random_psd(Eigen::Index n, Real trace, Rng& rng) {
  const CMatrix<Real> g = random_gaussian<Real>(n, n, rng);
  CMatrix<Real> p = g * g.adjoint();
  p = (p + p.adjoint()).eval() / Real(2);
  return p * (trace / std::real(p.trace()));
}

}  // namespace arveson
