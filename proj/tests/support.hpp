#pragma once

// Test-only constructions: standard maps and random channels.

#include <Eigen/Eigenvalues>

#include <vector>

#include "arveson/cp_maps.hpp"
#include "arveson/random.hpp"
#include "arveson/similarity.hpp"

namespace arveson::testing {

using Map = Superoperator<double>;

inline ComplexMatrix mat(std::initializer_list<std::initializer_list<std::complex<double>>> rows) {
  ComplexMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (const auto& x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline ComplexMatrix unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

inline Map transpose_map(Eigen::Index n) {
  return Map::from_function(n, [](const ComplexMatrix& x) { return ComplexMatrix(x.transpose()); });
}

inline Map depolarizing(Eigen::Index n) {
  return Map::from_function(n, [n](const ComplexMatrix& x) {
    return ComplexMatrix(x.trace() / double(n) * ComplexMatrix::Identity(n, n));
  });
}

/// Keeps the diagonal blocks of sizes `blocks` and zeroes the rest.
inline Map block_pinching(std::vector<Eigen::Index> blocks) {
  Eigen::Index n = 0;
  for (auto b : blocks) n += b;
  return Map::from_function(n, [blocks, n](const ComplexMatrix& x) {
    ComplexMatrix y = ComplexMatrix::Zero(n, n);
    Eigen::Index at = 0;
    for (auto b : blocks) {
      y.block(at, at, b, b) = x.block(at, at, b, b);
      at += b;
    }
    return y;
  });
}

inline Map diagonal_pinching(Eigen::Index n) { return block_pinching(std::vector<Eigen::Index>(n, 1)); }

/// Random Kraus operators normalized so that sum V_j^* V_j = I.
inline std::vector<ComplexMatrix> random_unital_kraus(Eigen::Index n, int count, Rng& rng) {
  std::vector<ComplexMatrix> ops;
  ComplexMatrix s = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < count; ++j) {
    ops.push_back(random_gaussian<double>(n, n, rng));
    s += ops.back().adjoint() * ops.back();
  }
  const ComplexMatrix root_inv = hermitian_function(s, [](double l) { return 1.0 / std::sqrt(l); });
  for (auto& v : ops) v = (v * root_inv).eval();
  return ops;
}

/// A ucp map phi(X) = sum V_j^* X V_j. Kraus operators that are block
/// diagonal with respect to `blocks` (when given) make the map reducible.
inline Map random_ucp(Eigen::Index n, int count, Rng& rng, std::vector<Eigen::Index> blocks = {}) {
  std::vector<ComplexMatrix> ops;
  if (blocks.empty()) {
    ops = random_unital_kraus(n, count, rng);
  } else {
    ops.assign(count, ComplexMatrix::Zero(n, n));
    Eigen::Index at = 0;
    for (auto b : blocks) {
      const auto part = random_unital_kraus(b, count, rng);
      for (int j = 0; j < count; ++j) ops[j].block(at, at, b, b) = part[j];
      at += b;
    }
  }
  return superop_from_kraus(KrausSet<double>{ops}, n);
}

inline Map random_cp(Eigen::Index n, int count, Rng& rng) {
  std::vector<ComplexMatrix> ops;
  for (int j = 0; j < count; ++j) ops.push_back(random_gaussian<double>(n, n, rng));
  return superop_from_kraus(KrausSet<double>{ops}, n);
}

// Gaussian matrices are irreducible almost surely; the loop guards against
// the null event.
inline ComplexMatrix random_irreducible(Eigen::Index n, Rng& rng) {
  for (;;) {
    ComplexMatrix a = random_gaussian<double>(n, n, rng);
    if (n == 1 || is_irreducible(a)) return a;
  }
}

/// Smallest k in [1, limit] minimizing max |lambda^k - 1| over `phases`.
inline long diophantine_power(const std::vector<std::complex<double>>& phases, long limit, double& error) {
  long best = 1;
  error = std::numeric_limits<double>::infinity();
  std::vector<std::complex<double>> power(phases.size(), 1.0);
  for (long k = 1; k <= limit; ++k) {
    double worst = 0;
    for (std::size_t i = 0; i < phases.size(); ++i) {
      power[i] *= phases[i];
      power[i] /= std::abs(power[i]);
      worst = std::max(worst, std::abs(power[i] - 1.0));
    }
    if (worst < error) {
      error = worst;
      best = k;
    }
  }
  return best;
}

}  // namespace arveson::testing
