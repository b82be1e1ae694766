#include "rcmc/datagen.hpp"

#include "rcmc/spectral.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace rcmc {

std::string to_string(GenKind kind) {
  switch (kind) {
    case GenKind::Correlation: return "correlation";
    case GenKind::Covariance: return "covariance";
    case GenKind::Density: return "density";
  }
  return "correlation";
}

GenKind gen_kind_from_string(const std::string& s) {
  if (s == "correlation") return GenKind::Correlation;
  if (s == "covariance") return GenKind::Covariance;
  if (s == "density") return GenKind::Density;
  throw std::invalid_argument("unknown generator kind: " + s);
}

void GenSpec::validate() const {
  if (n < 1 || r < 1 || r > n) throw std::invalid_argument("GenSpec: need 1 <= r <= n");
  if (k < 1 || k > r) throw std::invalid_argument("GenSpec: need 1 <= k <= r");
  if (!(weight >= 1.0)) throw std::invalid_argument("GenSpec: weight must be at least 1");
  if (kind == GenKind::Density && !is_power_of_two(n))
    throw std::invalid_argument("GenSpec: density requires n to be a power of two");
}

GroundTruth gen_truth(const GenSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int n = spec.n, r = spec.r;
  Mat M(n, r);
  // Row-major fill; for the density (complex) case the real matrix is drawn
  // first and the imaginary one second, matching two separate randn calls.
  if (spec.kind == GenKind::Density) {
    RealMat re(n, r), im(n, r);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < r; ++j) re(i, j) = rng.gaussian();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < r; ++j) im(i, j) = rng.gaussian();
    M.real() = re;
    M.imag() = im;
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < r; ++j) M(i, j) = rng.gaussian();
  }
  M.leftCols(spec.k) *= spec.weight;
  Mat X = M * M.adjoint();
  X = hermitize(X);
  switch (spec.kind) {
    case GenKind::Correlation: {
      Vec d = X.real().diagonal();
      Vec scale = d.array().rsqrt();
      X = scale.cast<cxd>().asDiagonal() * X * scale.cast<cxd>().asDiagonal();
      for (int i = 0; i < n; ++i) X(i, i) = 1.0;
      break;
    }
    case GenKind::Covariance:
      break;
    case GenKind::Density: {
      double tr = X.real().trace();
      X /= tr;
      break;
    }
  }
  return {std::move(X), r, spec.kind};
}

double relerr(const Mat& X, const Mat& Xbar) {
  return (X - Xbar).norm() / std::max(1e-8, Xbar.norm());
}

namespace {

Mat psd_sqrt(const Mat& X, const char* what) {
  Mat H = hermitize(X);
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  Vec lam = es.eigenvalues();
  double top = std::max(lam.cwiseAbs().maxCoeff(), 1.0);
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < -1e-9 * top) throw std::invalid_argument(std::string(what) + ": materially non-PSD input");
    lam[i] = std::sqrt(std::max(0.0, lam[i]));
  }
  return es.eigenvectors() * lam.cast<cxd>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const Mat& Xhat, const Mat& Xbar) {
  if (Xhat.rows() != Xbar.rows() || Xhat.cols() != Xbar.cols() || Xhat.rows() != Xhat.cols())
    throw std::invalid_argument("fidelity: shape mismatch");
  Mat A = psd_sqrt(Xhat, "fidelity");
  Mat B = psd_sqrt(Xbar, "fidelity");
  double nn = nuclear_norm(A * B);
  return nn * nn;
}

FixedPattern pattern_fix(GenKind kind, int n, int diag_count, int offdiag_count, std::uint64_t seed) {
  if (kind == GenKind::Density) {
    if (diag_count != 0 || offdiag_count != 0)
      throw std::invalid_argument("pattern_fix: density fixes only the trace");
    return FixedPattern::trace();
  }
  if (diag_count < 0 || diag_count > n) throw std::invalid_argument("pattern_fix: diag count out of range");
  const long long pairs = static_cast<long long>(n) * (n - 1) / 2;
  if (offdiag_count < 0 || offdiag_count > pairs)
    throw std::invalid_argument("pattern_fix: off-diagonal count out of range");
  Rng rng(seed);
  FixedPattern pat;
  // Partial Fisher-Yates over the diagonal indices.
  std::vector<int> diag(static_cast<size_t>(n));
  std::iota(diag.begin(), diag.end(), 0);
  for (int t = 0; t < diag_count; ++t) {
    int pick = t + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - t)));
    std::swap(diag[static_cast<size_t>(t)], diag[static_cast<size_t>(pick)]);
    pat.entries.emplace_back(diag[static_cast<size_t>(t)], diag[static_cast<size_t>(t)]);
  }
  // And over the enumerated i<j pairs.
  std::vector<long long> pair_idx(static_cast<size_t>(pairs));
  std::iota(pair_idx.begin(), pair_idx.end(), 0LL);
  for (int t = 0; t < offdiag_count; ++t) {
    long long pick = t + static_cast<long long>(rng.uniform_int(static_cast<std::uint64_t>(pairs - t)));
    std::swap(pair_idx[static_cast<size_t>(t)], pair_idx[static_cast<size_t>(pick)]);
    long long e = pair_idx[static_cast<size_t>(t)];
    // invert the row-major enumeration of i<j
    int i = 0;
    long long cum = 0;
    while (cum + (n - 1 - i) <= e) {
      cum += n - 1 - i;
      ++i;
    }
    int j = i + 1 + static_cast<int>(e - cum);
    pat.entries.emplace_back(i, j);
  }
  return pat;
}

void write_truth(const std::string& path_prefix, const GroundTruth& truth, const GenSpec& spec) {
  auto write_part = [&](const std::string& path, const RealMat& part) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    char buf[64];
    for (Eigen::Index i = 0; i < part.rows(); ++i) {
      for (Eigen::Index j = 0; j < part.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", part(i, j));
        os << buf << (j + 1 < part.cols() ? "," : "");
      }
      os << "\n";
    }
  };
  const bool complex_valued = truth.Xbar.imag().cwiseAbs().maxCoeff() != 0.0;
  write_part(path_prefix + ".csv", truth.Xbar.real());
  if (complex_valued) write_part(path_prefix + "_im.csv", truth.Xbar.imag());
  nlohmann::json meta;
  meta["kind"] = to_string(spec.kind);
  meta["n"] = spec.n;
  meta["r"] = spec.r;
  meta["weight"] = spec.weight;
  meta["k"] = spec.k;
  meta["seed"] = spec.seed;
  meta["rng"] = Rng::algorithm();
  meta["complex"] = complex_valued;
  std::ofstream ms(path_prefix + ".meta.json");
  if (!ms) throw std::runtime_error("cannot write " + path_prefix + ".meta.json");
  ms << meta.dump(2) << "\n";
}

}  // namespace rcmc
