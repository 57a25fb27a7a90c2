#include "oracles.hpp"

using namespace qinst;

TEST_CASE("kron matches the index formula") {
  Rng r(1);
  const Matrix a = r.ginibre(2, 3), b = r.ginibre(3, 2);
  CHECK(max_abs(kron(a, b) - oracle::kron(a, b)) < 1e-15);
  CHECK(kron(a, b).rows() == 6);
  CHECK(kron(a, b).cols() == 6);
}

TEST_CASE("partial trace against loops") {
  Rng r(2);
  for (auto [d1, d2] : {std::pair<Index, Index>{2, 3}, {3, 2}, {1, 4}, {4, 1}}) {
    const Matrix m = r.ginibre(d1 * d2, d1 * d2);
    CHECK(max_abs(partial_trace(m, d1, d2, Keep::First) - oracle::trace_second(m, d1, d2)) < 1e-14);
    CHECK(max_abs(partial_trace(m, d1, d2, Keep::Second) - oracle::trace_first(m, d1, d2)) < 1e-14);
  }
}

TEST_CASE("partial trace of a product keeps the factor times the other trace") {
  const Matrix a = oracle::real({{1, 2}, {3, 4}});
  const Matrix b = oracle::real({{5, 0, 0}, {0, 6, 0}, {0, 0, 7}});
  CHECK(max_abs(partial_trace(kron(a, b), 2, 3, Keep::First) - 18.0 * a) < 1e-14);
  CHECK(max_abs(partial_trace(kron(a, b), 2, 3, Keep::Second) - 5.0 * b) < 1e-14);
}

TEST_CASE("psd_sqrt") {
  SUBCASE("diagonal") {
    const Matrix q = psd_sqrt(oracle::diag({4, 9, 0}));
    CHECK(max_abs(q - oracle::diag({2, 3, 0})) < 1e-14);
  }
  SUBCASE("rank-one projector is its own root") {
    const Matrix p = oracle::plus();
    CHECK(max_abs(psd_sqrt(p) - p) < 1e-14);
  }
  SUBCASE("small negative eigenvalue is clamped") {
    CHECK(max_abs(psd_sqrt(oracle::diag({1, -1e-12})) - oracle::diag({1, 0})) < 1e-14);
  }
  SUBCASE("negative matrix rejected") { CHECK_ERROR_KIND(psd_sqrt(oracle::diag({1, -0.5})), ErrorKind::NotPSD); }
  SUBCASE("non-Hermitian rejected") {
    CHECK_ERROR_KIND(psd_sqrt(oracle::real({{1, 1}, {0, 1}})), ErrorKind::NotHermitian);
  }
}

TEST_CASE("psd_inv_sqrt") {
  CHECK(max_abs(psd_inv_sqrt(oracle::diag({4, 0.25})) - oracle::diag({0.5, 2})) < 1e-14);
  CHECK_ERROR_KIND(psd_inv_sqrt(oracle::diag({1, 0})), ErrorKind::SingularNormalizer);
}

TEST_CASE("hermitian_eig sorts ascending and reconstructs") {
  const Matrix x = oracle::pauli_x();
  const auto e = hermitian_eig(x);
  CHECK(e.values(0) == doctest::Approx(-1.0));
  CHECK(e.values(1) == doctest::Approx(1.0));
  CHECK(max_abs(e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint() - x) < 1e-14);
}

TEST_CASE("random generators") {
  Rng r(7);
  SUBCASE("states are states") {
    const Matrix s = random_state(3, r);
    CHECK(std::abs(s.trace() - 1.0) < 1e-12);
    CHECK(min_eigenvalue(s) > -1e-12);
    CHECK(max_abs(s - s.adjoint()) < 1e-14);
  }
  SUBCASE("POVMs sum to identity") {
    const auto e = random_povm(3, 4, r);
    Matrix sum = Matrix::Zero(3, 3);
    for (const auto& m : e) {
      sum += m;
      CHECK(min_eigenvalue(m) > -1e-12);
    }
    CHECK(max_abs(sum - identity(3)) < 1e-12);
  }
  SUBCASE("instrument Kraus grids are trace preserving overall") {
    const KrausGrid g = random_instrument(2, 3, 3, 2, r);
    Matrix sum = Matrix::Zero(2, 2);
    for (const auto& row : g)
      for (const auto& k : row) sum += k.adjoint() * k;
    CHECK(max_abs(sum - identity(2)) < 1e-12);
  }
  SUBCASE("unitaries are unitary") {
    const Matrix u = random_unitary(4, r);
    CHECK(max_abs(u.adjoint() * u - identity(4)) < 1e-12);
  }
  SUBCASE("simplex points") {
    const RealVector p = random_simplex(5, r);
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p.minCoeff() >= 0.0);
  }
  SUBCASE("same seed, same draws") {
    CHECK(max_abs(random_state(3, 99) - random_state(3, 99)) == 0.0);
  }
  SUBCASE("zero dimension rejected") { CHECK_ERROR_KIND(random_state(0, r), ErrorKind::DimMismatch); }
}

TEST_CASE("tolerances must be positive") {
  CHECK_NOTHROW(Tolerances{}.validate());
  CHECK_ERROR_KIND(Tolerances::uniform(0.0).validate(), ErrorKind::InvariantViolation);
}
