#include "rcmc/datagen.hpp"

#include "rcmc/spectral.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace rcmc;

TEST_CASE("gen_truth: correlation has unit diagonal, PSD, exact rank") {
  GenSpec spec{GenKind::Correlation, 30, 4, 2, 3.0, 11};
  GroundTruth t = gen_truth(spec);
  for (int i = 0; i < 30; ++i) CHECK(t.Xbar(i, i).real() == 1.0);
  SpectralDecomposition dec = decompose(t.Xbar, true);
  CHECK(dec.lambda.minCoeff() > -1e-12);
  CHECK(numerical_rank(dec.sigma, 1e-10) == 4);
}

TEST_CASE("gen_truth: density has unit trace, PSD, exact rank, complex entries") {
  GenSpec spec{GenKind::Density, 16, 3, 1, 2.0, 12};
  GroundTruth t = gen_truth(spec);
  CHECK(t.Xbar.real().trace() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.Xbar.imag().cwiseAbs().maxCoeff() > 0.0);
  SpectralDecomposition dec = decompose(t.Xbar, true);
  CHECK(dec.lambda.minCoeff() > -1e-12);
  CHECK(numerical_rank(dec.sigma, 1e-10) == 3);
}

TEST_CASE("gen_truth: covariance keeps the factor Gram matrix; weight boosts the top eigenvalue") {
  GenSpec spec{GenKind::Covariance, 20, 3, 1, 4.0, 13};
  GroundTruth t = gen_truth(spec);
  SpectralDecomposition dec = decompose(t.Xbar, true);
  CHECK(numerical_rank(dec.sigma, 1e-10) == 3);
  CHECK(dec.sigma[0] > 4.0 * dec.sigma[1]);  // weight^2 = 16 separation, loosely
}

TEST_CASE("gen_truth: determinism per seed; weight = 1 equals the unweighted construction") {
  GenSpec a{GenKind::Correlation, 12, 3, 2, 2.0, 5};
  CHECK((gen_truth(a).Xbar - gen_truth(a).Xbar).norm() == 0.0);
  GenSpec w1{GenKind::Covariance, 12, 3, 1, 1.0, 5};
  GenSpec w1k3{GenKind::Covariance, 12, 3, 3, 1.0, 5};
  CHECK((gen_truth(w1).Xbar - gen_truth(w1k3).Xbar).norm() == 0.0);  // scaling by 1 is a no-op
}

TEST_CASE("gen_truth: invalid specs") {
  CHECK_THROWS_AS(gen_truth({GenKind::Density, 12, 2, 1, 2.0, 1}), std::invalid_argument);  // not 2^l
  CHECK_THROWS_AS(gen_truth({GenKind::Correlation, 5, 6, 1, 2.0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(gen_truth({GenKind::Correlation, 5, 2, 3, 2.0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(gen_truth({GenKind::Correlation, 5, 2, 1, 0.5, 1}), std::invalid_argument);
}

TEST_CASE("relerr: exactness, floor, and scaling") {
  Rng rng(14);
  Mat X = testutil::random_psd(5, 2, false, rng);
  CHECK(relerr(X, X) == 0.0);
  CHECK(relerr(2.0 * X, X) == doctest::Approx(1.0).epsilon(1e-12));
  Mat E = Mat::Zero(3, 3);
  E(0, 0) = 1e-8;
  CHECK(relerr(E, Mat::Zero(3, 3)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fidelity: identical states, orthogonal projectors, diagonal closed form") {
  Mat rho1 = Mat::Zero(2, 2);
  rho1(0, 0) = 1.0;
  CHECK(fidelity(rho1, rho1) == doctest::Approx(1.0).epsilon(1e-12));
  Mat rho2 = Mat::Zero(2, 2);
  rho2(1, 1) = 1.0;
  CHECK(fidelity(rho1, rho2) == doctest::Approx(0.0).epsilon(1e-12));

  // commuting diagonal states: (sum sqrt(p_i q_i))^2
  Vec p(3), q(3);
  p << 0.5, 0.3, 0.2;
  q << 0.2, 0.2, 0.6;
  Mat P = p.cast<cxd>().asDiagonal();
  Mat Q = q.cast<cxd>().asDiagonal();
  double expect = std::pow((p.cwiseProduct(q)).cwiseSqrt().sum(), 2);
  CHECK(fidelity(P, Q) == doctest::Approx(expect).epsilon(1e-10));
  CHECK(fidelity(Q, P) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("fidelity: symmetry on random states; materially non-PSD input rejected") {
  Rng rng(15);
  for (int t = 0; t < 5; ++t) {
    Mat A = testutil::random_psd(6, 3, true, rng);
    A /= A.real().trace();
    Mat B = testutil::random_psd(6, 2, true, rng);
    B /= B.real().trace();
    CHECK(fidelity(A, B) == doctest::Approx(fidelity(B, A)).epsilon(1e-10));
    double f = fidelity(A, B);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-9);
  }
  Mat bad = Mat::Identity(3, 3);
  bad(0, 0) = -0.5;
  CHECK_THROWS_AS(fidelity(bad, Mat::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("pattern_fix: counts, determinism, error paths") {
  FixedPattern all = pattern_fix(GenKind::Correlation, 6, 6, 0, 1);
  CHECK(all.entries.size() == 6);
  for (auto [i, j] : all.entries) CHECK(i == j);

  FixedPattern none = pattern_fix(GenKind::Correlation, 6, 0, 0, 1);
  CHECK(none.entries.empty());

  FixedPattern mixed = pattern_fix(GenKind::Covariance, 8, 3, 5, 2);
  int diag = 0, off = 0;
  for (auto [i, j] : mixed.entries) (i == j ? diag : off)++;
  CHECK(diag == 3);
  CHECK(off == 5);
  FixedPattern again = pattern_fix(GenKind::Covariance, 8, 3, 5, 2);
  CHECK(mixed.entries == again.entries);

  CHECK(pattern_fix(GenKind::Density, 8, 0, 0, 3).trace_only);
  CHECK_THROWS_AS(pattern_fix(GenKind::Density, 8, 1, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(pattern_fix(GenKind::Correlation, 4, 5, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(pattern_fix(GenKind::Correlation, 4, 0, 7, 3), std::invalid_argument);
}

TEST_CASE("pattern_fix feeds make_basis with valid unique entries") {
  FixedPattern pat = pattern_fix(GenKind::Correlation, 10, 5, 8, 9);
  auto basis = make_basis(MatrixSpace::real_sym(10), BasisKind::CorrelationEntrywise, pat);
  CHECK(basis->d1() == 13);
}

TEST_CASE("truth dump writes CSV and metadata") {
  GenSpec spec{GenKind::Density, 8, 2, 1, 2.0, 21};
  GroundTruth t = gen_truth(spec);
  std::filesystem::create_directories("/tmp/rcmc_test_truth");
  write_truth("/tmp/rcmc_test_truth/x", t, spec);
  CHECK(std::filesystem::exists("/tmp/rcmc_test_truth/x.csv"));
  CHECK(std::filesystem::exists("/tmp/rcmc_test_truth/x_im.csv"));
  std::ifstream meta("/tmp/rcmc_test_truth/x.meta.json");
  std::string body((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
  CHECK(body.find("\"kind\": \"density\"") != std::string::npos);
  CHECK(body.find("mt19937_64") != std::string::npos);
}
