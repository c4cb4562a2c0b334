#include <doctest.h>

#include <numbers>

#include "arveson/cp_maps.hpp"
#include "support.hpp"

using namespace arveson;
using namespace arveson::testing;

namespace {

const std::complex<double> I1{0.0, 1.0};

double dist(const Map& a, const Map& b) { return distance(a, b); }

}  // namespace

TEST_SUITE("cp_maps") {
  TEST_CASE("conjugation_superop") {
    CHECK(dist(conjugation_superop(ComplexMatrix::Identity(3, 3)), Map::identity(3)) == 0.0);

    const Map flip = conjugation_superop(mat({{1.0, 0.0}, {0.0, -1.0}}));
    const ComplexMatrix x = mat({{1.0, 2.0}, {3.0, 4.0}});
    CHECK((flip(x) - mat({{1.0, -2.0}, {-3.0, 4.0}})).norm() == 0.0);

    Rng rng(11);
    const ComplexMatrix u = random_unitary<double>(3, rng);
    const ComplexMatrix y = random_gaussian<double>(3, 3, rng);
    const Map ad = conjugation_superop(u);
    CHECK((ad(y) - u.adjoint() * y * u).norm() <= 1e-12);
    CHECK((ad(ComplexMatrix::Identity(3, 3)) - ComplexMatrix::Identity(3, 3)).norm() <= 1e-12);
    CHECK(std::abs(ad(y).trace() - y.trace()) <= 1e-12);
    CHECK_THROWS_AS(conjugation_superop(ComplexMatrix::Zero(2, 3)), DimensionError);
  }

  TEST_CASE("choi matrices of standard maps") {
    const ChoiMatrix<double> id = choi(Map::identity(3));
    const ComplexVector omega = vec(ComplexMatrix::Identity(3, 3));
    // Sum of E_ij kron E_ij is |Omega><Omega| with Omega = sum e_i kron e_i,
    // and e_i kron e_i sits at index i n + i in either stacking.
    CHECK((id.c - omega * omega.adjoint()).norm() == 0.0);
    CHECK(numerical_rank(id.c) == 1);
    CHECK(std::real(id.c.trace()) == doctest::Approx(3.0));

    CHECK((choi(depolarizing(2)).c - ComplexMatrix::Identity(4, 4) / 2.0).norm() <= 1e-15);

    const ChoiMatrix<double> t = choi(transpose_map(2));
    ComplexMatrix swap = ComplexMatrix::Zero(4, 4);
    swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
    CHECK((t.c - swap).norm() == 0.0);
    CHECK(hermitian_eig(t.c).eigenvalues(0) == doctest::Approx(-1.0));

    // Block (i, j) is phi(E_ij).
    Rng rng(12);
    const Map phi = random_cp(3, 2, rng);
    const ChoiMatrix<double> c = choi(phi);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK((c.c.block(3 * i, 3 * j, 3, 3) - phi(unit(3, i, j))).norm() <= 1e-12);
    CHECK(dist(superop_from_choi(c), phi) <= 1e-12);
  }

  TEST_CASE("kraus_from_choi") {
    const KrausSet<double> one = kraus_from_choi(choi(Map::identity(2)));
    REQUIRE(one.rank() == 1);
    const ComplexMatrix v = one.ops[0];
    CHECK((v.adjoint() * v - ComplexMatrix::Identity(2, 2)).norm() <= 1e-12);
    CHECK(std::abs(std::abs(v(0, 0)) - 1.0) <= 1e-12);

    // The completely depolarizing map has Choi I/n: all n^2 eigenvalues equal.
    for (int n : {2, 3}) CHECK(kraus_from_choi(choi(depolarizing(n))).rank() == std::size_t(n * n));

    CHECK_THROWS_AS(kraus_from_choi(choi(transpose_map(2))), NotCompletelyPositive);

    Rng rng(13);
    for (int t = 0; t < 10; ++t) {
      const Map phi = random_cp(3, 1 + t % 4, rng);
      const KrausSet<double> k = kraus_from_choi(choi(phi));
      CHECK(k.rank() == std::size_t(1 + t % 4));
      CHECK(dist(superop_from_kraus(k, 3), phi) <= 1e-8 * (1 + spectral_norm(phi.matrix())));
    }
  }

  TEST_CASE("is_ucp") {
    Rng rng(14);
    CHECK(is_ucp(conjugation_superop(random_unitary<double>(3, rng))));
    CHECK_FALSE(is_ucp(conjugation_superop(ComplexMatrix(2.0 * ComplexMatrix::Identity(2, 2)))));
    CHECK_FALSE(is_ucp(transpose_map(2)));
    CHECK(is_ucp(random_ucp(3, 3, rng)));
    CHECK(is_ucp(depolarizing(3)));
  }

  TEST_CASE("estimate_norm") {
    Rng rng(15);
    CHECK(estimate_norm(random_ucp(3, 2, rng)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(estimate_norm(Map(2, 3.0 * ComplexMatrix::Identity(4, 4))) == doctest::Approx(3.0));
  }

  TEST_CASE("cesaro_average") {
    Rng rng(16);
    const Map omega = random_ucp(2, 2, rng);
    CHECK(dist(cesaro_average(omega, 1), Map::identity(2)) == 0.0);
    CHECK_THROWS_AS(cesaro_average(omega, 0), InvalidArgument);

    // For an idempotent E: (1/m)(id + (m-1)E), at distance ||id - E|| / m.
    const Map pinch = diagonal_pinching(2);
    const Map gap = Map::identity(2) - pinch;
    for (long m : {1L, 7L, 100L})
      CHECK(std::abs(dist(cesaro_average(pinch, m), pinch) - spectral_norm(gap.matrix()) / double(m)) <= 1e-14);

    // Conjugation by diag(1, -1) averaged over an even number of steps
    // telescopes to the diagonal pinching.
    const Map flip = conjugation_superop(mat({{1.0, 0.0}, {0.0, -1.0}}));
    for (long m : {2L, 10L, 64L}) CHECK(dist(cesaro_average(flip, m), pinch) <= 1e-14);

    const auto many = cesaro_averages(omega, {1, 10, 100});
    REQUIRE(many.size() == 3);
    CHECK(dist(many[1], cesaro_average(omega, 10)) <= 1e-14);
    CHECK(dist(many[2], cesaro_average(omega, 100)) <= 1e-13);
  }

  TEST_CASE("ergodic_projection") {
    CHECK(dist(ergodic_projection(Map::identity(3)).omega, Map::identity(3)) <= 1e-12);

    // Conjugation by diag(1, e^i): the Cesaro oracle at m = 1e5 agrees with
    // the pinching within 1e-4, and the exact projection is the pinching.
    const Map rot = conjugation_superop(mat({{1.0, 0.0}, {0.0, std::exp(I1)}}));
    const auto e = ergodic_projection(rot);
    CHECK(dist(e.omega, diagonal_pinching(2)) <= 1e-10);
    CHECK(dist(cesaro_average(rot, 100000), e.omega) <= 1e-4);
    CHECK(e.fixed_basis.size() == 2);

    // Unique fixed line: the trace state.
    Rng rng(17);
    const Map mixing = random_ucp(3, 3, rng);
    const auto t = ergodic_projection(mixing);
    CHECK(t.fixed_basis.size() == 1);
    CHECK(dist(cesaro_average(mixing, 20000), t.omega) <= 1e-3);
    const Map dep = depolarizing(3);
    CHECK(dist(ergodic_projection(dep).omega, dep) <= 1e-10);

    CHECK_THROWS_AS(ergodic_projection(Map(2, 0.5 * ComplexMatrix::Identity(4, 4))), NoFixedPoint);
    // Fixed points exist but the map expands: X -> X + x_21 E_11 has norm > 1.
    const Map shear = Map::from_function(2, [](const ComplexMatrix& x) {
      ComplexMatrix y = x;
      y(0, 0) += 2.0 * x(1, 0);
      return y;
    });
    CHECK_THROWS_AS(ergodic_projection(shear), DecompositionFailure);
  }

  TEST_CASE("peripheral spectrum and expectation") {
    CHECK(dist(peripheral_expectation(Map::identity(2)), Map::identity(2)) <= 1e-12);

    // Ad(U) with U = U_2 (+) 1 after a block pinching: the peripheral part
    // is Ad(U) on the block-diagonal algebra, so the limit of a
    // well-chosen power subsequence is the block pinching itself.
    Rng rng(18);
    ComplexMatrix u = ComplexMatrix::Identity(3, 3);
    u.block(0, 0, 2, 2) = random_unitary<double>(2, rng);
    const Map pinch = block_pinching({2, 1});
    const Map omega = conjugation_superop(u) * pinch;
    CHECK(is_ucp(omega));

    const auto spectrum = peripheral_spectrum(omega);
    std::vector<std::complex<double>> phases;
    for (const auto& c : spectrum) {
      CHECK(c.semisimple());
      phases.push_back(c.value);
    }
    const Map limit = peripheral_expectation(omega);
    CHECK(dist(limit * limit, limit) <= 1e-9);
    CHECK(dist(limit, pinch) <= 1e-8);

    // Diophantine oracle: omega^k for the k <= 2e4 with all lambda^k
    // closest to 1.
    double error = 0;
    const long k = diophantine_power(phases, 20000, error);
    CHECK(error < 1e-2);
    CHECK(dist(omega.power(static_cast<unsigned>(k)), limit) <= 10 * error + 1e-9);

    // Strictly contractive away from the fixed line: both limits agree.
    const Map mixing = random_ucp(2, 3, rng);
    CHECK(dist(peripheral_expectation(mixing), ergodic_projection(mixing).omega) <= 1e-8);

    // A Jordan block at eigenvalue 1 is rejected.
    ComplexMatrix jordan = ComplexMatrix::Identity(4, 4);
    jordan(0, 3) = 1.0;
    CHECK_THROWS_AS(peripheral_expectation(Map(2, jordan)), PeripheralDefect);
  }

  TEST_CASE("Choi-Effros product and module property") {
    const auto id = make_conditional_expectation(Map::identity(2));
    Rng rng(19);
    const ComplexMatrix x = random_gaussian<double>(2, 2, rng);
    const ComplexMatrix y = random_gaussian<double>(2, 2, rng);
    CHECK((choi_effros_product(id, x, y) - x * y).norm() <= 1e-12);
    CHECK(module_property_check(id, x, y) == 0.0);

    const auto diag = make_conditional_expectation(diagonal_pinching(3));
    const ComplexMatrix d1 = mat({{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, {0.0, 0.0, I1}});
    const ComplexMatrix d2 = mat({{3.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, 2.0}});
    CHECK((choi_effros_product(diag, d1, d2) - d1 * d2).norm() <= 1e-14);
    const ComplexMatrix z = random_gaussian<double>(3, 3, rng);
    CHECK(module_property_check(diag, d1, z) <= 1e-10);
    CHECK_THROWS_AS(choi_effros_product(diag, z, d1), NotInRange);

    // Block pinching onto M_2 (+) M_1: the product is blockwise.
    const Map blocks = block_pinching({2, 1});
    const auto blockwise = make_conditional_expectation(blocks);
    const ComplexMatrix b1 = blocks(random_gaussian<double>(3, 3, rng));
    const ComplexMatrix b2 = blocks(random_gaussian<double>(3, 3, rng));
    ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
    expected.block(0, 0, 2, 2) = b1.block(0, 0, 2, 2) * b2.block(0, 0, 2, 2);
    expected(2, 2) = b1(2, 2) * b2(2, 2);
    CHECK((choi_effros_product(blockwise, b1, b2) - expected).norm() <= 1e-12);

    const auto trace = make_conditional_expectation(depolarizing(3));
    CHECK(module_property_check(trace, ComplexMatrix(ComplexMatrix::Identity(3, 3)), z) <= 1e-14);

    CHECK_THROWS_AS(make_conditional_expectation(Map(2, 0.5 * ComplexMatrix::Identity(4, 4))),
                    DecompositionFailure);
  }

  TEST_CASE("superoperator algebra") {
    Rng rng(20);
    const Map a = random_cp(2, 2, rng);
    const Map b = random_cp(2, 2, rng);
    const ComplexMatrix x = random_gaussian<double>(2, 2, rng);
    CHECK(((a * b)(x) - a(b(x))).norm() <= 1e-12 * (1 + x.norm()));
    CHECK(((a + b)(x) - a(x) - b(x)).norm() <= 1e-12 * (1 + x.norm()));
    CHECK(dist(a.power(3), a * a * a) <= 1e-10 * spectral_norm(a.matrix()) * spectral_norm(a.matrix()) *
                                             spectral_norm(a.matrix()));
    CHECK_THROWS_AS(a * Map::identity(3), DimensionError);
    CHECK_THROWS_AS(Map(2, ComplexMatrix::Identity(3, 3)), DimensionError);
  }
}
