#include "rcmc/sampling.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace rcmc;
using rcmc::testutil::random_matrix;

namespace {

BasisPtr corr_basis(int n) {
  return make_basis(MatrixSpace::real_sym(n), BasisKind::CorrelationEntrywise, FixedPattern::all_diagonal(n));
}

}  // namespace

TEST_CASE("scheme validation") {
  auto basis = corr_basis(4);
  CHECK_NOTHROW(SamplingScheme::make_uniform(basis));
  Vec p = Vec::Zero(basis->dim());
  p[0] = 0.5;  // mass on alpha
  p[basis->d1()] = 0.5;
  CHECK_THROWS_AS(SamplingScheme(basis, p), std::invalid_argument);
}

TEST_CASE("sample_indices: multiplicities concentrate for uniform sampling over 3 indices") {
  // d2 = 3 free elements, m = 3000: each count lands in [800, 1200]
  auto basis = make_basis(MatrixSpace::real_sym(2), BasisKind::CorrelationEntrywise, FixedPattern::none());
  REQUIRE(basis->d2() == 3);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SampleSet s = sample_indices(scheme, 3000, seed);
    REQUIRE(s.observed.size() == 3);
    for (int c : s.multiplicity) {
      CHECK(c >= 800);
      CHECK(c <= 1200);
    }
  }
}

TEST_CASE("sample_indices: m = 0 rejected; same seed gives the same multiset") {
  auto basis = corr_basis(5);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  CHECK_THROWS_AS(sample_indices(scheme, 0, 1), std::invalid_argument);
  SampleSet a = sample_indices(scheme, 200, 42);
  SampleSet b = sample_indices(scheme, 200, 42);
  CHECK(a.omega == b.omega);
  SampleSet c = sample_indices(scheme, 200, 43);
  CHECK(a.omega != c.omega);
}

TEST_CASE("non-uniform sampling hits beta only and respects the distribution") {
  auto basis = corr_basis(4);
  Vec p = Vec::Zero(basis->dim());
  double total = 0;
  for (int k = basis->d1(); k < basis->dim(); ++k) {
    p[k] = k;  // increasing weights
    total += p[k];
  }
  p /= total;
  SamplingScheme scheme(basis, p);
  CHECK_FALSE(scheme.uniform);
  SampleSet s = sample_indices(scheme, 20000, 9);
  for (int k : s.omega) CHECK(k >= basis->d1());
  // heaviest index sampled more than the lightest, with large margin
  CHECK(s.multiplicity.back() > 2 * s.multiplicity.front());
}

TEST_CASE("observe: noiseless observations are exact basis coefficients") {
  Rng rng(2);
  auto basis = corr_basis(5);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  Mat X = random_matrix(MatrixSpace::real_sym(5), rng);
  SampleSet s = sample_indices(scheme, 50, 7);
  ObservationSet obs = observe(*basis, X, s, 0.0, NoiseKind::Gaussian, 3);
  for (int i = 0; i < 50; ++i) CHECK(obs.y[i] == basis->coeff(X, s.omega[static_cast<size_t>(i)]));
}

TEST_CASE("observe: pure noise has mean about 0 and variance about 1") {
  auto basis = corr_basis(8);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  SampleSet s = sample_indices(scheme, 20000, 11);
  ObservationSet obs = observe(*basis, Mat::Zero(8, 8), s, 1.0, NoiseKind::Gaussian, 5);
  double mean = obs.y.mean();
  double var = (obs.y.array() - mean).square().sum() / (obs.y.size() - 1);
  CHECK(std::abs(mean) < 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("observe: negative nu rejected; fixed seed reproducible") {
  auto basis = corr_basis(4);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  SampleSet s = sample_indices(scheme, 30, 1);
  CHECK_THROWS_AS(observe(*basis, Mat::Zero(4, 4), s, -0.1, NoiseKind::Gaussian, 1), std::invalid_argument);
  ObservationSet a = observe(*basis, Mat::Zero(4, 4), s, 0.5, NoiseKind::Gaussian, 77);
  ObservationSet b = observe(*basis, Mat::Zero(4, 4), s, 0.5, NoiseKind::Gaussian, 77);
  CHECK((a.y - b.y).norm() == 0.0);
}

TEST_CASE("observe_with_level calibrates the realized relative noise exactly") {
  Rng rng(3);
  auto basis = corr_basis(6);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  Mat X = random_matrix(MatrixSpace::real_sym(6), rng);
  SampleSet s = sample_indices(scheme, 100, 4);
  ObservationSet obs = observe_with_level(*basis, X, s, 0.1, NoiseKind::Gaussian, 5);
  Vec clean = apply_sampling(*basis, X, s);
  CHECK((obs.y - clean).norm() / clean.norm() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("custom sub-exponential noise goes through the pluggable generator") {
  auto basis = corr_basis(4);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  SampleSet s = sample_indices(scheme, 500, 8);
  // centered unit-variance exponential
  NoiseGenerator expo = [](Rng& r) { return -std::log(1.0 - r.uniform()) - 1.0; };
  ObservationSet obs = observe(*basis, Mat::Zero(4, 4), s, 1.0, NoiseKind::CustomSubexponential, 6, expo);
  CHECK(std::abs(obs.y.mean()) < 0.2);
  CHECK_THROWS_AS(observe(*basis, Mat::Zero(4, 4), s, 1.0, NoiseKind::CustomSubexponential, 6),
                  std::invalid_argument);
}

TEST_CASE("apply_sampling is linear; adjoint identity holds") {
  Rng rng(4);
  auto basis = corr_basis(5);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  SampleSet s = sample_indices(scheme, 40, 2);
  Mat X = random_matrix(MatrixSpace::real_sym(5), rng);
  Mat Y = random_matrix(MatrixSpace::real_sym(5), rng);
  Vec lin = apply_sampling(*basis, 2.0 * X - 3.0 * Y, s);
  Vec sep = 2.0 * apply_sampling(*basis, X, s) - 3.0 * apply_sampling(*basis, Y, s);
  CHECK((lin - sep).cwiseAbs().maxCoeff() < 1e-12);
  for (int trial = 0; trial < 10; ++trial) {
    Vec v = testutil::random_vec(s.m(), rng);
    Mat Z = random_matrix(MatrixSpace::real_sym(5), rng);
    CHECK(inner(adjoint_sampling(*basis, v, s), Z) ==
          doctest::Approx(v.dot(apply_sampling(*basis, Z, s))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(adjoint_sampling(*basis, Vec::Zero(3), s), std::invalid_argument);
}

TEST_CASE("aggregation: (1/m) R* R picks up multiplicities coefficientwise") {
  Rng rng(5);
  auto basis = corr_basis(4);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  SampleSet s = sample_indices(scheme, 25, 3);
  Mat X = random_matrix(MatrixSpace::real_sym(4), rng);
  Mat M = adjoint_sampling(*basis, apply_sampling(*basis, X, s), s) / double(s.m());
  Vec got = basis->coeffs_all(M);
  Vec expect = Vec::Zero(basis->dim());
  for (size_t t = 0; t < s.observed.size(); ++t)
    expect[s.observed[t]] = double(s.multiplicity[t]) / s.m() * basis->coeff(X, s.observed[t]);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solver gradient identity: (1/m) R*(R(X)-y) matches the aggregated form") {
  Rng rng(6);
  auto basis = corr_basis(5);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  Mat Xbar = random_matrix(MatrixSpace::real_sym(5), rng);
  SampleSet s = sample_indices(scheme, 60, 12);
  ObservationSet obs = observe(*basis, Xbar, s, 0.3, NoiseKind::Gaussian, 13);
  Mat X = random_matrix(MatrixSpace::real_sym(5), rng);
  Mat grad = adjoint_sampling(*basis, Vec(apply_sampling(*basis, X, s) - obs.y), s) / double(s.m());
  Vec g = basis->coeffs_all(grad);
  for (size_t t = 0; t < s.observed.size(); ++t) {
    int k = s.observed[t];
    double expect = (s.multiplicity[t] * basis->coeff(X, k) - obs.sums[t]) / s.m();
    CHECK(g[k] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("(1/m) R* R converges to Q_beta (Monte-Carlo, m = 1e5)") {
  Rng rng(7);
  auto basis = corr_basis(6);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  Mat X = random_matrix(MatrixSpace::real_sym(6), rng);
  SampleSet s = sample_indices(scheme, 100000, 21);
  Mat avg = adjoint_sampling(*basis, apply_sampling(*basis, X, s), s) / double(s.m());
  Mat expect = scheme.q_beta(X);
  CHECK((avg - expect).norm() / expect.norm() < 0.05);
}

TEST_CASE("depolarize") {
  Mat X = Mat::Zero(2, 2);
  X(0, 0) = 1.0;
  CHECK((depolarize(X, 0.0) - X).norm() == 0.0);
  CHECK((depolarize(X, 1.0) - Mat::Identity(2, 2) * 0.5).norm() < 1e-15);
  Mat half = depolarize(X, 0.5);
  CHECK(half(0, 0).real() == doctest::Approx(0.75));
  CHECK(half(1, 1).real() == doctest::Approx(0.25));
  CHECK_THROWS_AS(depolarize(X, 1.5), std::invalid_argument);
}

TEST_CASE("observations CSV round trip") {
  Rng rng(8);
  auto basis = corr_basis(4);
  SamplingScheme scheme = SamplingScheme::make_uniform(basis);
  Mat X = random_matrix(MatrixSpace::real_sym(4), rng);
  SampleSet s = sample_indices(scheme, 20, 5);
  ObservationSet obs = observe(*basis, X, s, 0.2, NoiseKind::Gaussian, 9);
  std::stringstream ss;
  write_observations_csv(ss, obs);
  ObservationSet back = read_observations_csv(ss);
  CHECK(back.samples.omega == obs.samples.omega);
  CHECK((back.y - obs.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.nu == obs.nu);
  CHECK(back.seed == obs.seed);
}
