#include "rcmc/spectral.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace rcmc;
using rcmc::testutil::random_matrix;

TEST_CASE("decompose: diagonal rectangular matrix gets reordered") {
  Mat X = Mat::Zero(2, 2);
  X(0, 0) = 1.0;
  X(1, 1) = 3.0;
  SpectralDecomposition dec = decompose(X, false);
  CHECK(dec.sigma[0] == doctest::Approx(3.0));
  CHECK(dec.sigma[1] == doctest::Approx(1.0));
  CHECK((dec.reconstruct() - X).norm() < 1e-12);
}

TEST_CASE("decompose symmetric: |lambda| ordering and sign vector") {
  Mat X = Mat::Zero(2, 2);
  X(0, 0) = 2.0;
  X(1, 1) = -5.0;
  SpectralDecomposition dec = decompose(X, true);
  CHECK(dec.lambda[0] == doctest::Approx(-5.0));
  CHECK(dec.lambda[1] == doctest::Approx(2.0));
  CHECK(dec.s[0] == -1.0);
  CHECK(dec.s[1] == 1.0);
  CHECK(dec.sigma[0] == doctest::Approx(5.0));
  CHECK((dec.reconstruct() - X).norm() < 1e-13);
}

TEST_CASE("decompose: random 6x4 reconstructs to 1e-10") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Mat X = random_matrix(MatrixSpace::real_rect(6, 4), rng);
    SpectralDecomposition dec = decompose(X, false);
    CHECK((dec.reconstruct() - X).norm() < 1e-10 * X.norm());
    for (int i = 1; i < 4; ++i) CHECK(dec.sigma[i] <= dec.sigma[i - 1] + 1e-14);
  }
  Mat H = random_matrix(MatrixSpace::hermitian(6), rng);
  SpectralDecomposition dec = decompose(H, true);
  CHECK((dec.reconstruct() - H).norm() < 1e-10 * H.norm());
}

TEST_CASE("decompose rejects non-finite input") {
  Mat X = Mat::Zero(2, 2);
  X(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(decompose(X, false), std::invalid_argument);
}

TEST_CASE("phi identities") {
  for (double tau : {0.5, 1.0, 2.0, 5.0}) {
    for (double eps : {0.01, 0.02, 0.05, 0.1}) {
      CHECK(phi(0.0, tau, eps) == 0.0);
      CHECK(phi(1.0, tau, eps) == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(phi(eps, tau, eps) == doctest::Approx((1.0 + std::pow(eps, tau)) / 2.0).epsilon(1e-14));
    }
  }
  CHECK(phi(0.1, 2.0, 0.1) == doctest::Approx(0.505).epsilon(1e-12));
  Rng rng(32);
  for (int t = 0; t < 50; ++t) {
    double x = 3.0 * rng.gaussian();
    CHECK(phi(-x, 2.0, 0.05) == doctest::Approx(-phi(x, 2.0, 0.05)).epsilon(1e-14));
  }
}

TEST_CASE("phi shape: concave for tau <= 1, inflection at ((tau-1)/(tau+1))^(1/tau) eps for tau > 1") {
  const double h = 1e-5;
  auto second = [&](double t, double tau, double eps) {
    return (phi(t + h, tau, eps) - 2.0 * phi(t, tau, eps) + phi(t - h, tau, eps)) / (h * h);
  };
  for (double tau : {0.5, 1.0}) {
    for (double t = 0.02; t < 1.0; t += 0.05) CHECK(second(t, tau, 0.1) <= 1e-4);
  }
  for (double tau : {2.0, 3.0}) {
    double eps = 0.1;
    double inflection = std::pow((tau - 1.0) / (tau + 1.0), 1.0 / tau) * eps;
    CHECK(second(inflection * 0.8, tau, eps) > 0.0);
    CHECK(second(inflection * 1.2, tau, eps) < 0.0);
  }
}

TEST_CASE("f_vector: zero vector, ties, and the phi(eps) identity") {
  RankCorrectionFn fn = RankCorrectionFn::phi_family(2.0, 0.1);
  CHECK(f_vector(Vec::Zero(3), fn).cwiseAbs().maxCoeff() == 0.0);
  Vec tied(2);
  tied << 5.0, 5.0;
  Vec f = f_vector(tied, fn);
  CHECK(f[0] == doctest::Approx(1.0));
  CHECK(f[1] == doctest::Approx(1.0));
  Vec s(2);
  s << 1.0, 0.1;
  Vec f2 = f_vector(s, fn);
  CHECK(f2[1] == doctest::Approx((1.0 + 0.01) / 2.0).epsilon(1e-12));
  CHECK(f_vector(s, RankCorrectionFn::zero()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(f_vector(s, RankCorrectionFn::known_rank(1)), std::invalid_argument);
}

TEST_CASE("f_i vanishes with x_i; signed-permutation equivariance (exhaustive n = 3)") {
  RankCorrectionFn fn = RankCorrectionFn::phi_family(2.0, 0.05);
  Vec x(3);
  x << 2.0, 0.0, 0.5;
  Vec f = f_vector(x, fn);
  CHECK(f[1] == 0.0);
  Vec y(3);
  y << 1.7, 0.3, 0.9;
  Vec fy = f_vector(y, fn);
  int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (auto& pm : perms) {
    for (int signs = 0; signs < 8; ++signs) {
      Vec yp(3), expect(3);
      for (int i = 0; i < 3; ++i) {
        double s = (signs >> i) & 1 ? -1.0 : 1.0;
        yp[i] = s * y[pm[i]];
        expect[i] = s * fy[pm[i]];
      }
      CHECK((f_vector(yp, fn) - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("apply_spectral: zero function, unit values, and the symmetric sign formula") {
  Rng rng(34);
  Mat X = random_matrix(MatrixSpace::real_rect(5, 4), rng);
  CHECK(apply_spectral(X, RankCorrectionFn::zero(), false).norm() == 0.0);

  // all singular values equal: F(X) = sum of u_i v_i^T over the spectrum
  Mat D = Mat::Zero(3, 3);
  D(0, 0) = 2.0;
  D(1, 1) = 2.0;
  D(2, 2) = 2.0;
  Mat F = apply_spectral(D, RankCorrectionFn::phi_family(2.0, 0.05), false);
  CHECK((F - Mat::Identity(3, 3)).norm() < 1e-12);

  // symmetric diag(2, -2): F = diag(1, -1)
  Mat S = Mat::Zero(2, 2);
  S(0, 0) = 2.0;
  S(1, 1) = -2.0;
  Mat Fs = apply_spectral(S, RankCorrectionFn::phi_family(2.0, 0.05), true);
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = 1.0;
  expect(1, 1) = -1.0;
  CHECK((Fs - expect).norm() < 1e-12);
}

TEST_CASE("apply_spectral is decomposition independent on a degenerate spectrum") {
  // X = diag(3, 1, 1): rotate the tied pair and compare
  Mat X = Mat::Zero(3, 3);
  X(0, 0) = 3.0;
  X(1, 1) = 1.0;
  X(2, 2) = 1.0;
  RankCorrectionFn fn = RankCorrectionFn::phi_family(2.0, 0.1);
  SpectralDecomposition dec = decompose(X, true);
  Mat F1 = apply_spectral(dec, fn);
  double c = std::cos(0.7), s = std::sin(0.7);
  Mat Q = Mat::Identity(3, 3);
  Q(1, 1) = c;
  Q(1, 2) = -s;
  Q(2, 1) = s;
  Q(2, 2) = c;
  SpectralDecomposition rot = dec;
  rot.U = dec.U * Q;
  rot.V = dec.V * Q;  // signs all +1 here
  CHECK((rot.reconstruct() - X).norm() < 1e-13);
  Mat F2 = apply_spectral(rot, fn);
  CHECK((F1 - F2).norm() < 1e-12);
}

TEST_CASE("apply_spectral has spectral norm at most 1 for the phi family") {
  Rng rng(35);
  RankCorrectionFn fn = RankCorrectionFn::phi_family(2.0, 0.02);
  for (int t = 0; t < 10; ++t) {
    Mat X = random_matrix(MatrixSpace::real_rect(6, 5), rng);
    CHECK(spectral_norm(apply_spectral(X, fn, false)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("known_rank_correction: leading projector, idempotence for PSD, degenerate gap error") {
  Mat X = Mat::Zero(2, 2);
  X(0, 0) = 2.0;
  X(1, 1) = 1.0;
  Mat F = known_rank_correction(X, 1, true);
  Mat e11 = Mat::Zero(2, 2);
  e11(0, 0) = 1.0;
  CHECK((F - e11).norm() < 1e-13);

  Rng rng(36);
  Mat P = testutil::random_psd(6, 3, false, rng);
  Mat Fp = known_rank_correction(P, 3, true);
  CHECK((Fp * Fp - Fp).norm() < 1e-10);
  CHECK(spectral_norm(Fp) == doctest::Approx(1.0).epsilon(1e-10));

  Mat tie = Mat::Zero(3, 3);
  tie(0, 0) = 2.0;
  tie(1, 1) = 1.0;
  tie(2, 2) = 1.0;
  CHECK_THROWS(known_rank_correction(tie, 2, true));
  CHECK_THROWS_AS(known_rank_correction(tie, 0, true), std::invalid_argument);
}

TEST_CASE("phi family approaches the known-rank correction as eps drops") {
  Rng rng(37);
  Mat Xbar = testutil::random_psd(6, 2, false, rng);
  Mat target = known_rank_correction(Xbar, 2, true);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.2, 0.1, 0.05, 0.01}) {
    double gap = (apply_spectral(Xbar, RankCorrectionFn::phi_family(2.0, eps), true) - target).norm();
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("numerical rank thresholding") {
  Vec s(4);
  s << 1.0, 1e-3, 1e-7, 0.0;
  CHECK(numerical_rank(s, 1e-6) == 2);
  CHECK(numerical_rank(Vec::Zero(3), 1e-6) == 0);
}

TEST_CASE("correction matrix assembly") {
  Rng rng(38);
  Mat Xt = testutil::random_psd(4, 2, false, rng);
  Mat F = apply_spectral(Xt, RankCorrectionFn::phi_family(2.0, 0.05), true);
  CorrectionMatrix c = CorrectionMatrix::build(F, Xt, 0.5);
  CHECK((c.G - (F + 0.5 * Xt)).norm() < 1e-14);
  CHECK(c.xtilde_sqnorm == doctest::Approx(Xt.squaredNorm()));
  CHECK_THROWS_AS(CorrectionMatrix::build(F, Xt, -1.0), std::invalid_argument);
}
