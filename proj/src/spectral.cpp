#include "rcmc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rcmc {

namespace {

bool all_finite(const Mat& X) { return X.allFinite(); }

bool nearly_real(const Mat& X) {
  return X.imag().cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

Mat SpectralDecomposition::reconstruct() const {
  const auto n = sigma.size();
  return U.leftCols(n) * sigma.asDiagonal() * V.leftCols(n).adjoint();
}

SpectralDecomposition decompose(const Mat& X, bool symmetric) {
  if (!all_finite(X)) throw std::invalid_argument("decompose: non-finite input");
  SpectralDecomposition dec;
  dec.symmetric = symmetric;
  if (symmetric) {
    const int n = static_cast<int>(X.rows());
    if (X.cols() != n) throw std::invalid_argument("decompose: symmetric flag on a non-square matrix");
    Vec lam(n);
    Mat P(n, n);
    if (nearly_real(X)) {
      Eigen::SelfAdjointEigenSolver<RealMat> es(X.real());
      if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
      lam = es.eigenvalues();
      P = es.eigenvectors().cast<cxd>();
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> es(X);
      if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
      lam = es.eigenvalues();
      P = es.eigenvectors();
    }
    // Order by |lambda| descending; ties: positive value first, then the
    // original (ascending-eigenvalue) position.
    std::vector<int> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      double aa = std::abs(lam[a]), ab = std::abs(lam[b]);
      if (aa != ab) return aa > ab;
      if ((lam[a] >= 0) != (lam[b] >= 0)) return lam[a] >= 0;
      return a < b;
    });
    dec.lambda.resize(n);
    dec.s.resize(n);
    dec.sigma.resize(n);
    dec.U.resize(n, n);
    // Round-off-negative zeros take the +1 sign so that PSD inputs get
    // V2 = U2 exactly on the null block.
    const double zero_level = 1e-14 * lam.cwiseAbs().maxCoeff();
    for (int t = 0; t < n; ++t) {
      double lv = lam[idx[static_cast<size_t>(t)]];
      dec.lambda[t] = lv;
      dec.s[t] = lv < -zero_level ? -1.0 : 1.0;
      dec.sigma[t] = std::abs(lv);
      dec.U.col(t) = P.col(idx[static_cast<size_t>(t)]);
    }
    dec.V = dec.U * dec.s.cast<cxd>().asDiagonal();
    return dec;
  }

  if (nearly_real(X)) {
    Eigen::BDCSVD<RealMat> svd(X.real(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    dec.sigma = svd.singularValues();
    dec.U = svd.matrixU().cast<cxd>();
    dec.V = svd.matrixV().cast<cxd>();
  } else {
    Eigen::BDCSVD<Mat> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
    dec.sigma = svd.singularValues();
    dec.U = svd.matrixU();
    dec.V = svd.matrixV();
  }
  return dec;
}

SpectralDecomposition decompose(const Mat& X) {
  bool symmetric = X.rows() == X.cols() && (X - X.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + X.cwiseAbs().maxCoeff());
  return decompose(symmetric ? hermitize(X) : X, symmetric);
}

RankCorrectionFn RankCorrectionFn::known_rank(int r) {
  if (r < 1) throw std::invalid_argument("known-rank correction requires r >= 1");
  return {KnownRank{r}};
}

RankCorrectionFn RankCorrectionFn::phi_family(double tau, double eps) {
  if (!(tau > 0) || !(eps > 0)) throw std::invalid_argument("phi family requires tau > 0 and eps > 0");
  return {PhiParams{tau, eps}};
}

double phi(double t, double tau, double eps) {
  if (t == 0.0) return 0.0;
  double at = std::abs(t);
  double num = std::pow(at, tau);
  double den = num + std::pow(eps, tau);
  double v = (1.0 + std::pow(eps, tau)) * num / den;
  return t < 0 ? -v : v;
}

Vec f_vector(const Vec& sigma, const RankCorrectionFn& fn) {
  const auto n = sigma.size();
  if (fn.is_zero()) return Vec::Zero(n);
  if (fn.is_known_rank()) throw std::invalid_argument("f_vector: known-rank correction has no pointwise f");
  const auto& p = std::get<PhiParams>(fn.kind);
  Vec f = Vec::Zero(n);
  double top = sigma.size() > 0 ? sigma.cwiseAbs().maxCoeff() : 0.0;  // ||x||_inf (= sigma_1 when sorted)
  if (top < 1e-14) return f;
  for (Eigen::Index i = 0; i < n; ++i) f[i] = phi(sigma[i] / top, p.tau, p.eps);
  return f;
}

Mat apply_spectral(const SpectralDecomposition& dec, const RankCorrectionFn& fn) {
  Vec f = f_vector(dec.sigma, fn);
  const auto n = dec.sigma.size();
  return dec.U.leftCols(n) * f.asDiagonal() * dec.V.leftCols(n).adjoint();
}

Mat apply_spectral(const Mat& X, const RankCorrectionFn& fn, bool symmetric) {
  if (fn.is_known_rank()) throw std::invalid_argument("apply_spectral: use known_rank_correction");
  if (fn.is_zero()) return Mat::Zero(X.rows(), X.cols());
  return apply_spectral(decompose(X, symmetric), fn);
}

Mat apply_spectral(const Mat& X, const RankCorrectionFn& fn) {
  if (fn.is_known_rank()) throw std::invalid_argument("apply_spectral: use known_rank_correction");
  if (fn.is_zero()) return Mat::Zero(X.rows(), X.cols());
  return apply_spectral(decompose(X), fn);
}

Mat known_rank_correction(const Mat& X, int r, bool symmetric) {
  const int n = static_cast<int>(std::min(X.rows(), X.cols()));
  if (r < 1 || r > n) throw std::invalid_argument("known_rank_correction: r out of range");
  SpectralDecomposition dec = decompose(X, symmetric);
  double top = dec.sigma[0];
  double gap = r < n ? dec.sigma[r - 1] - dec.sigma[r] : dec.sigma[r - 1];
  if (!(top > 0) || gap / top < 1e-10)
    throw std::runtime_error("known_rank_correction: degenerate spectrum at the requested rank");
  return dec.U.leftCols(r) * dec.V.leftCols(r).adjoint();
}

Mat known_rank_correction(const Mat& X, int r) {
  bool symmetric = X.rows() == X.cols() && (X - X.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + X.cwiseAbs().maxCoeff());
  return known_rank_correction(symmetric ? hermitize(X) : X, r, symmetric);
}

CorrectionMatrix CorrectionMatrix::none(const MatrixSpace& space) {
  return {space.zero(), 0.0, 0.0};
}

CorrectionMatrix CorrectionMatrix::build(const Mat& f_of_xtilde, const Mat& x_tilde, double gamma) {
  if (gamma < 0) throw std::invalid_argument("CorrectionMatrix: gamma must be nonnegative");
  CorrectionMatrix c;
  c.G = f_of_xtilde + gamma * x_tilde;
  c.gamma = gamma;
  c.xtilde_sqnorm = x_tilde.squaredNorm();
  return c;
}

int numerical_rank(const Vec& sigma, double rel_tol) {
  if (sigma.size() == 0) return 0;
  double top = sigma[0];
  if (!(top > 0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] > rel_tol * top) ++r;
  return r;
}

double spectral_norm(const Mat& X) {
  if (X.rows() == 0 || X.cols() == 0) return 0.0;
  if (nearly_real(X)) {
    Eigen::BDCSVD<RealMat> svd(X.real());
    return svd.singularValues()[0];
  }
  Eigen::BDCSVD<Mat> svd(X);
  return svd.singularValues()[0];
}

double nuclear_norm(const Mat& X) {
  if (X.rows() == 0 || X.cols() == 0) return 0.0;
  if (nearly_real(X)) {
    Eigen::BDCSVD<RealMat> svd(X.real());
    return svd.singularValues().sum();
  }
  Eigen::BDCSVD<Mat> svd(X);
  return svd.singularValues().sum();
}

}  // namespace rcmc
