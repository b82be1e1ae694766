#include "rcmc/basis.hpp"
#include "rcmc/rng.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace rcmc;
using rcmc::testutil::random_matrix;

namespace {

std::vector<std::pair<MatrixSpace, BasisKind>> all_space_kinds(int n, int n2) {
  return {
      {MatrixSpace::real_sym(n), BasisKind::CorrelationEntrywise},
      {MatrixSpace::hermitian(n), BasisKind::CorrelationEntrywise},
      {MatrixSpace::real_rect(n, n2), BasisKind::RectangularEntrywise},
      {MatrixSpace::complex_rect(n, n2), BasisKind::RectangularEntrywise},
  };
}

}  // namespace

TEST_CASE("space dimensions") {
  CHECK(MatrixSpace::real_sym(5).dim() == 15);
  CHECK(MatrixSpace::hermitian(5).dim() == 25);
  CHECK(MatrixSpace::real_rect(2, 3).dim() == 6);
  CHECK(MatrixSpace::complex_rect(2, 3).dim() == 12);
  CHECK_THROWS_AS(MatrixSpace(Field::Real, Symmetry::Symmetric, 2, 3), std::invalid_argument);
}

TEST_CASE("pauli basis n=2: d = 4, d1 = 1, identity element") {
  auto basis = make_basis(MatrixSpace::hermitian(2), BasisKind::Pauli, FixedPattern::trace());
  CHECK(basis->dim() == 4);
  CHECK(basis->d1() == 1);
  Mat id = basis->element(0);
  CHECK((id - Mat::Identity(2, 2) / std::sqrt(2.0)).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("correlation basis n=2: d = 3, all-diagonal fixing gives d1 = 2") {
  auto basis = make_basis(MatrixSpace::real_sym(2), BasisKind::CorrelationEntrywise, FixedPattern::all_diagonal(2));
  CHECK(basis->dim() == 3);
  CHECK(basis->d1() == 2);
}

TEST_CASE("rectangular basis 2x3 with nothing fixed: d = 6, d1 = 0") {
  auto basis = make_basis(MatrixSpace::real_rect(2, 3), BasisKind::RectangularEntrywise, FixedPattern::none());
  CHECK(basis->dim() == 6);
  CHECK(basis->d1() == 0);
  for (int k = 0; k < 6; ++k) {
    Mat T = basis->element(k);
    CHECK(T.cwiseAbs().sum() == doctest::Approx(1.0));  // one unit entry
  }
}

TEST_CASE("basis construction errors") {
  CHECK_THROWS(make_basis(MatrixSpace::hermitian(3), BasisKind::Pauli, FixedPattern::trace()));
  CHECK_THROWS(make_basis(MatrixSpace::real_sym(4), BasisKind::CorrelationEntrywise,
                          FixedPattern::of_entries({{0, 7}})));
  CHECK_THROWS(make_basis(MatrixSpace::real_sym(4), BasisKind::CorrelationEntrywise,
                          FixedPattern::of_entries({{1, 1}, {1, 1}})));
  CHECK_THROWS(make_basis(MatrixSpace::real_rect(3, 3), BasisKind::CorrelationEntrywise, FixedPattern::none()));
}

TEST_CASE("coeffs: off-diagonal coefficient is sqrt(2) a") {
  auto basis = make_basis(MatrixSpace::real_sym(2), BasisKind::CorrelationEntrywise, FixedPattern::none());
  double a = 0.37;
  Mat X = Mat::Zero(2, 2);
  X(0, 1) = a;
  X(1, 0) = a;
  // canonical order: two diagonal elements, then the (0,1) pair element
  Vec c = basis->coeffs_all(X);
  CHECK(c[2] == doctest::Approx(std::sqrt(2.0) * a).epsilon(1e-14));
}

TEST_CASE("coeffs of a basis element and of zero") {
  for (auto& [space, kind] : all_space_kinds(4, 3)) {
    auto basis = make_basis(space, kind, FixedPattern::none());
    for (int k = 0; k < basis->dim(); k += 3) {
      Vec c = basis->coeffs_all(basis->element(k));
      for (int j = 0; j < basis->dim(); ++j)
        CHECK(c[j] == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-12));
    }
    Vec z = basis->coeffs_all(space.zero());
    CHECK(z.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("synthesize: unit vector reproduces the element; full round trip") {
  Rng rng(12);
  for (auto& [space, kind] : all_space_kinds(5, 4)) {
    auto basis = make_basis(space, kind, FixedPattern::none());
    Vec e = Vec::Zero(basis->dim());
    e[1] = 1.0;
    CHECK((basis->synthesize_all(e) - basis->element(1)).norm() < 1e-14);
    Mat X = random_matrix(space, rng);
    Mat back = basis->synthesize_all(basis->coeffs_all(X));
    CHECK((back - X).norm() < 1e-12 * (1.0 + X.norm()));
  }
}

TEST_CASE("coeffs/synthesize are mutually adjoint on 20 random pairs") {
  Rng rng(13);
  for (auto& [space, kind] : all_space_kinds(4, 5)) {
    auto basis = make_basis(space, kind, FixedPattern::none());
    std::vector<int> pi;
    for (int k = 0; k < basis->dim(); k += 2) pi.push_back(k);
    for (int trial = 0; trial < 20; ++trial) {
      Mat X = random_matrix(space, rng);
      Vec v = testutil::random_vec(static_cast<int>(pi.size()), rng);
      double lhs = inner(basis->synthesize(pi, v), X);
      double rhs = v.dot(basis->coeffs(X, pi));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("length mismatch raises") {
  auto basis = make_basis(MatrixSpace::real_sym(3), BasisKind::CorrelationEntrywise, FixedPattern::none());
  std::vector<int> pi{0, 1};
  CHECK_THROWS_AS(basis->synthesize(pi, Vec::Zero(3)), std::invalid_argument);
  CHECK_THROWS(basis->coeffs(Mat::Zero(2, 2), pi));
}

TEST_CASE("project: P_alpha extracts the diagonal for the correlation basis") {
  Rng rng(14);
  auto basis =
      make_basis(MatrixSpace::real_sym(5), BasisKind::CorrelationEntrywise, FixedPattern::all_diagonal(5));
  Mat X = random_matrix(MatrixSpace::real_sym(5), rng);
  Mat Pa = basis->project_alpha(X);
  CHECK((Pa - Mat(X.diagonal().asDiagonal())).norm() < 1e-13);
  // idempotence and completeness
  CHECK((basis->project_alpha(Pa) - Pa).norm() < 1e-13);
  CHECK((basis->project_alpha(X) + basis->project_beta(X) - X).norm() < 1e-12);
}

TEST_CASE("orthonormality: gram matrix is the identity for every kind, n <= 8") {
  for (int n : {2, 3, 5, 8}) {
    for (auto& [space, kind] : all_space_kinds(n, std::max(2, n - 1))) {
      auto basis = make_basis(space, kind, FixedPattern::none());
      RealMat G = basis->gram();
      CHECK((G - RealMat::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  for (int n : {2, 4, 8}) {
    auto basis = make_basis(MatrixSpace::hermitian(n), BasisKind::Pauli, FixedPattern::trace());
    RealMat G = basis->gram();
    CHECK((G - RealMat::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pauli elements are Hermitian, unit norm, traceless off alpha") {
  auto basis = make_basis(MatrixSpace::hermitian(8), BasisKind::Pauli, FixedPattern::trace());
  for (int k = 0; k < basis->dim(); ++k) {
    Mat T = basis->element(k);
    CHECK((T - T.adjoint()).norm() < 1e-14);
    CHECK(T.norm() == doctest::Approx(1.0).epsilon(1e-13));
    if (k >= basis->d1()) CHECK(std::abs(T.trace()) < 1e-13);
  }
}

TEST_CASE("pauli fast transform agrees with per-word coefficients") {
  Rng rng(15);
  auto basis = make_basis(MatrixSpace::hermitian(8), BasisKind::Pauli, FixedPattern::trace());
  Mat X = random_matrix(MatrixSpace::hermitian(8), rng);
  Vec fast = basis->coeffs_all(X);
  for (int k = 0; k < basis->dim(); ++k) CHECK(fast[k] == doctest::Approx(basis->coeff(X, k)).epsilon(1e-12));
  // inverse path
  Vec v = testutil::random_vec(basis->dim(), rng);
  Mat A = basis->synthesize_all(v);
  Mat B = MatrixSpace::hermitian(8).zero();
  for (int k = 0; k < basis->dim(); ++k) basis->axpy(v[k], k, B);
  CHECK((A - B).norm() < 1e-12 * (1.0 + B.norm()));
}

TEST_CASE("q_beta: uniform weights reduce to scaled beta projections") {
  Rng rng(16);
  auto basis =
      make_basis(MatrixSpace::real_sym(6), BasisKind::CorrelationEntrywise, FixedPattern::all_diagonal(6));
  const int d2 = basis->d2();
  Vec p = Vec::Zero(basis->dim());
  for (int k = basis->d1(); k < basis->dim(); ++k) p[k] = 1.0 / d2;
  Mat X = random_matrix(MatrixSpace::real_sym(6), rng);
  CHECK((basis->q_beta(p, X, false) - basis->project_beta(X) / d2).norm() < 1e-12);
  CHECK((basis->q_beta(p, X, true) - double(d2) * basis->project_beta(X)).norm() < 1e-10);
}

TEST_CASE("operator relations: Q Qdag = P_beta, P_beta Q = Q, Qdag kills alpha elements") {
  Rng rng(17);
  for (auto& [space, kind] : all_space_kinds(5, 4)) {
    FixedPattern pat = FixedPattern::of_entries({{0, 0}, {1, 2}});
    auto basis = make_basis(space, kind, pat);
    // a non-uniform probability over beta
    Vec p = Vec::Zero(basis->dim());
    double total = 0;
    for (int k = basis->d1(); k < basis->dim(); ++k) {
      p[k] = 1.0 + (k % 5);
      total += p[k];
    }
    for (int k = basis->d1(); k < basis->dim(); ++k) p[k] /= total;
    for (int trial = 0; trial < 5; ++trial) {
      Mat X = random_matrix(space, rng);
      Mat QQd = basis->q_beta(p, basis->q_beta(p, X, true), false);
      CHECK((QQd - basis->project_beta(X)).norm() < 1e-11 * (1.0 + X.norm()));
      Mat QdQ = basis->q_beta(p, basis->q_beta(p, X, false), true);
      CHECK((QdQ - basis->project_beta(X)).norm() < 1e-11 * (1.0 + X.norm()));
      Mat PQ = basis->project_beta(basis->q_beta(p, X, false));
      CHECK((PQ - basis->q_beta(p, X, false)).norm() < 1e-12 * (1.0 + X.norm()));
    }
    for (int j = 0; j < basis->d1(); ++j)
      CHECK(basis->q_beta(p, basis->element(j), true).norm() < 1e-12);
  }
}

TEST_CASE("q_beta rejects nonpositive probabilities") {
  auto basis = make_basis(MatrixSpace::real_sym(3), BasisKind::CorrelationEntrywise, FixedPattern::none());
  Vec p = Vec::Zero(basis->dim());
  p[0] = 1.0;  // zero elsewhere on beta
  CHECK_THROWS_AS(basis->q_beta(p, Mat::Zero(3, 3), false), std::invalid_argument);
}

TEST_CASE("alpha elements come first, in declaration order") {
  FixedPattern pat = FixedPattern::of_entries({{2, 2}, {0, 1}});
  auto basis = make_basis(MatrixSpace::real_sym(4), BasisKind::CorrelationEntrywise, pat);
  CHECK(basis->d1() == 2);
  CHECK(basis->descriptor(0).tag == BasisElement::Tag::Diag);
  CHECK(basis->descriptor(0).i == 2);
  CHECK(basis->descriptor(1).tag == BasisElement::Tag::SymRe);
  CHECK(basis->descriptor(1).i == 0);
  CHECK(basis->descriptor(1).j == 1);
}

TEST_CASE("complex off-diagonal fixing pins both the real and imaginary element") {
  FixedPattern pat = FixedPattern::of_entries({{0, 1}});
  auto basis = make_basis(MatrixSpace::hermitian(3), BasisKind::CorrelationEntrywise, pat);
  CHECK(basis->d1() == 2);
  auto rect = make_basis(MatrixSpace::complex_rect(2, 2), BasisKind::RectangularEntrywise, pat);
  CHECK(rect->d1() == 2);
}
