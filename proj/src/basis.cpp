#include "rcmc/basis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

namespace rcmc {

namespace {

constexpr double kSqrt2Inv = 0.70710678118654752440;

int pauli_log2(int n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("pauli basis requires n to be a power of two");
  return std::countr_zero(static_cast<unsigned>(n));
}

// Bit masks of the qubit positions where the word has sigma_1/sigma_2 (xmask)
// and sigma_2/sigma_3 (flipmask); n2count counts sigma_2 digits.
struct PauliWordInfo {
  unsigned xmask = 0;
  unsigned flipmask = 0;
  cxd base{1.0, 0.0};
};

PauliWordInfo pauli_word_info(int code, int l) {
  PauliWordInfo w;
  int n2 = 0;
  for (int t = 0; t < l; ++t) {
    int s = (code >> (2 * (l - 1 - t))) & 3;
    unsigned bit = 1u << (l - 1 - t);
    if (s == 1 || s == 2) w.xmask |= bit;
    if (s == 2 || s == 3) w.flipmask |= bit;
    if (s == 2) ++n2;
  }
  static const cxd minus_i_pow[4] = {cxd(1, 0), cxd(0, -1), cxd(-1, 0), cxd(0, 1)};
  w.base = minus_i_pow[n2 % 4];
  return w;
}

}  // namespace

BasisSystem::BasisSystem(MatrixSpace space, BasisKind kind, const FixedPattern& pattern)
    : space_(space), kind_(kind) {
  const int n1 = space_.n1, n2 = space_.n2;
  std::vector<BasisElement> canonical;
  canonical.reserve(static_cast<size_t>(space_.dim()));

  auto expand_entry = [&](int i, int j, std::vector<BasisElement>& out) {
    // One matrix entry -> the element(s) whose coefficients determine it.
    if (space_.is_symmetric()) {
      if (i == j) {
        out.push_back({BasisElement::Tag::Diag, i, i});
      } else {
        if (i > j) std::swap(i, j);
        out.push_back({BasisElement::Tag::SymRe, i, j});
        if (!space_.is_real()) out.push_back({BasisElement::Tag::SymIm, i, j});
      }
    } else {
      out.push_back({BasisElement::Tag::RectRe, i, j});
      if (!space_.is_real()) out.push_back({BasisElement::Tag::RectIm, i, j});
    }
  };

  switch (kind_) {
    case BasisKind::CorrelationEntrywise: {
      if (!space_.is_symmetric())
        throw std::invalid_argument("correlation-entrywise basis requires a symmetric space");
      if (pattern.trace_only)
        throw std::invalid_argument("trace-only pattern is not valid for the correlation basis");
      for (int i = 0; i < n1; ++i) canonical.push_back({BasisElement::Tag::Diag, i, i});
      for (int i = 0; i < n1; ++i)
        for (int j = i + 1; j < n1; ++j) {
          canonical.push_back({BasisElement::Tag::SymRe, i, j});
          if (!space_.is_real()) canonical.push_back({BasisElement::Tag::SymIm, i, j});
        }
      break;
    }
    case BasisKind::Pauli: {
      if (!space_.is_symmetric() || space_.is_real())
        throw std::invalid_argument("pauli basis requires a Hermitian space");
      pauli_l_ = pauli_log2(n1);
      if (!pattern.entries.empty())
        throw std::invalid_argument("pauli basis supports only the trace-only fixed pattern");
      const int d = n1 * n1;
      for (int code = 0; code < d; ++code) canonical.push_back({BasisElement::Tag::PauliWord, code, 0});
      break;
    }
    case BasisKind::RectangularEntrywise: {
      if (space_.is_symmetric())
        throw std::invalid_argument("rectangular-entrywise basis requires a rectangular space");
      if (pattern.trace_only)
        throw std::invalid_argument("trace-only pattern is not valid for the rectangular basis");
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
          canonical.push_back({BasisElement::Tag::RectRe, i, j});
          if (!space_.is_real()) canonical.push_back({BasisElement::Tag::RectIm, i, j});
        }
      break;
    }
  }

  // Alpha first, in declaration order; beta keeps canonical order.
  std::vector<BasisElement> alpha;
  if (kind_ == BasisKind::Pauli) {
    if (pattern.trace_only) alpha.push_back({BasisElement::Tag::PauliWord, 0, 0});
  } else {
    std::set<std::pair<int, int>> seen;
    for (auto [i, j] : pattern.entries) {
      if (i < 0 || j < 0 || i >= n1 || j >= n2) throw std::invalid_argument("fixed index out of range");
      if (space_.is_symmetric() && i > j) std::swap(i, j);
      if (!seen.insert({i, j}).second) throw std::invalid_argument("duplicate fixed entry");
      expand_entry(i, j, alpha);
    }
  }

  auto key = [](const BasisElement& e) { return std::tuple(e.tag, e.i, e.j); };
  std::set<std::tuple<BasisElement::Tag, int, int>> alpha_keys;
  for (const auto& e : alpha) alpha_keys.insert(key(e));

  elements_ = alpha;
  for (const auto& e : canonical)
    if (!alpha_keys.count(key(e))) elements_.push_back(e);
  d1_ = static_cast<int>(alpha.size());

  if (static_cast<int>(elements_.size()) != space_.dim())
    throw std::logic_error("basis element count does not match the space dimension");
}

double BasisSystem::coeff(const Mat& X, int k) const {
  const BasisElement& e = elements_[static_cast<size_t>(k)];
  switch (e.tag) {
    case BasisElement::Tag::Diag:
      return X(e.i, e.i).real();
    case BasisElement::Tag::SymRe:
      return std::sqrt(2.0) * X(e.i, e.j).real();
    case BasisElement::Tag::SymIm:
      return std::sqrt(2.0) * X(e.i, e.j).imag();
    case BasisElement::Tag::RectRe:
      return X(e.i, e.j).real();
    case BasisElement::Tag::RectIm:
      return X(e.i, e.j).imag();
    case BasisElement::Tag::PauliWord: {
      const int n = space_.n1;
      PauliWordInfo w = pauli_word_info(e.i, pauli_l_);
      cxd acc(0, 0);
      for (int row = 0; row < n; ++row) {
        int col = row ^ static_cast<int>(w.xmask);
        double sign = std::popcount(static_cast<unsigned>(row) & w.flipmask) & 1 ? -1.0 : 1.0;
        acc += sign * X(col, row);
      }
      return (w.base * acc).real() / std::sqrt(static_cast<double>(n));
    }
  }
  return 0.0;
}

void BasisSystem::axpy(double v, int k, Mat& X) const {
  const BasisElement& e = elements_[static_cast<size_t>(k)];
  switch (e.tag) {
    case BasisElement::Tag::Diag:
      X(e.i, e.i) += v;
      return;
    case BasisElement::Tag::SymRe:
      X(e.i, e.j) += v * kSqrt2Inv;
      X(e.j, e.i) += v * kSqrt2Inv;
      return;
    case BasisElement::Tag::SymIm:
      X(e.i, e.j) += cxd(0, v * kSqrt2Inv);
      X(e.j, e.i) -= cxd(0, v * kSqrt2Inv);
      return;
    case BasisElement::Tag::RectRe:
      X(e.i, e.j) += v;
      return;
    case BasisElement::Tag::RectIm:
      X(e.i, e.j) += cxd(0, v);
      return;
    case BasisElement::Tag::PauliWord: {
      const int n = space_.n1;
      PauliWordInfo w = pauli_word_info(e.i, pauli_l_);
      const double scale = v / std::sqrt(static_cast<double>(n));
      for (int row = 0; row < n; ++row) {
        int col = row ^ static_cast<int>(w.xmask);
        double sign = std::popcount(static_cast<unsigned>(row) & w.flipmask) & 1 ? -1.0 : 1.0;
        X(row, col) += scale * sign * w.base;
      }
      return;
    }
  }
}

Mat BasisSystem::element(int k) const {
  Mat X = space_.zero();
  axpy(1.0, k, X);
  return X;
}

Vec BasisSystem::coeffs(const Mat& X, std::span<const int> pi) const {
  space_.check_member(X);
  Vec out(pi.size());
  for (size_t t = 0; t < pi.size(); ++t) {
    int k = pi[t];
    if (k < 0 || k >= dim()) throw std::out_of_range("basis index out of range");
    out[static_cast<Eigen::Index>(t)] = coeff(X, k);
  }
  return out;
}

CoefficientVector BasisSystem::coeffs_cv(const Mat& X, std::span<const int> pi) const {
  return {coeffs(X, pi), std::vector<int>(pi.begin(), pi.end())};
}

Vec BasisSystem::coeffs_alpha(const Mat& X) const {
  space_.check_member(X);
  Vec out(d1_);
  for (int k = 0; k < d1_; ++k) out[k] = coeff(X, k);
  return out;
}

Vec BasisSystem::coeffs_beta(const Mat& X) const {
  space_.check_member(X);
  Vec out(d2());
  for (int k = d1_; k < dim(); ++k) out[k - d1_] = coeff(X, k);
  return out;
}

namespace {

// Full Pauli-word coefficient transform: c_w = Tr(W_w X) for all 4^l words,
// computed factor by factor in O(n^2 log n). Output is indexed by word code.
void pauli_forward(const Mat& X, int l, std::vector<cxd>& out) {
  const int n = 1 << l;
  std::vector<cxd> buf(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) buf[static_cast<size_t>(i) * n + j] = X(i, j);
  // At step t the array is indexed by (w_prefix, b_row, b_col) where w_prefix
  // has 4^t codes and b_row/b_col run over the remaining (l-t) qubits.
  std::vector<cxd> next(buf.size());
  for (int t = 0; t < l; ++t) {
    const int words = 1 << (2 * t);
    const int mrow = 1 << (l - t);  // remaining row size (this qubit is its MSB)
    const int half = mrow >> 1;
    for (int w = 0; w < words; ++w) {
      const cxd* src = buf.data() + static_cast<size_t>(w) * mrow * mrow;
      cxd* dst = next.data() + static_cast<size_t>(w) * 4 * half * half;
      for (int a = 0; a < half; ++a)
        for (int b = 0; b < half; ++b) {
          // Blocks X_{rc} with r,c the leading bits of the remaining indices.
          cxd x00 = src[static_cast<size_t>(a) * mrow + b];
          cxd x01 = src[static_cast<size_t>(a) * mrow + (b + half)];
          cxd x10 = src[static_cast<size_t>(a + half) * mrow + b];
          cxd x11 = src[static_cast<size_t>(a + half) * mrow + (b + half)];
          const size_t idx = static_cast<size_t>(a) * half + b;
          const size_t block = static_cast<size_t>(half) * half;
          dst[0 * block + idx] = x00 + x11;            // sigma_0
          dst[1 * block + idx] = x01 + x10;            // sigma_1
          dst[2 * block + idx] = cxd(0, 1) * (x01 - x10);  // sigma_2: Tr contraction
          dst[3 * block + idx] = x00 - x11;            // sigma_3
        }
    }
    std::swap(buf, next);
  }
  out = std::move(buf);
}

// Inverse: X = sum_w c_w W_w (unnormalized; caller scales by 1/n overall
// together with the 1/sqrt(n) element normalization).
void pauli_inverse(const std::vector<cxd>& c, int l, Mat& X) {
  const int n = 1 << l;
  std::vector<cxd> buf(c);
  std::vector<cxd> next(buf.size());
  for (int t = l - 1; t >= 0; --t) {
    const int words = 1 << (2 * t);
    const int half = 1 << (l - 1 - t);
    const int mrow = half * 2;
    for (int w = 0; w < words; ++w) {
      const cxd* src = buf.data() + static_cast<size_t>(w) * 4 * half * half;
      cxd* dst = next.data() + static_cast<size_t>(w) * mrow * mrow;
      const size_t block = static_cast<size_t>(half) * half;
      for (int a = 0; a < half; ++a)
        for (int b = 0; b < half; ++b) {
          const size_t idx = static_cast<size_t>(a) * half + b;
          cxd m0 = src[0 * block + idx];
          cxd m1 = src[1 * block + idx];
          cxd m2 = src[2 * block + idx];
          cxd m3 = src[3 * block + idx];
          dst[static_cast<size_t>(a) * mrow + b] = m0 + m3;
          dst[static_cast<size_t>(a) * mrow + (b + half)] = m1 - cxd(0, 1) * m2;
          dst[static_cast<size_t>(a + half) * mrow + b] = m1 + cxd(0, 1) * m2;
          dst[static_cast<size_t>(a + half) * mrow + (b + half)] = m0 - m3;
        }
    }
    std::swap(buf, next);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X(i, j) = buf[static_cast<size_t>(i) * n + j];
}

}  // namespace

Vec BasisSystem::coeffs_all(const Mat& X) const {
  space_.check_member(X);
  Vec out(dim());
  if (kind_ == BasisKind::Pauli) {
    std::vector<cxd> c;
    pauli_forward(X, pauli_l_, c);
    const double scale = 1.0 / std::sqrt(static_cast<double>(space_.n1));
    for (int k = 0; k < dim(); ++k) out[k] = scale * c[static_cast<size_t>(elements_[static_cast<size_t>(k)].i)].real();
    return out;
  }
  for (int k = 0; k < dim(); ++k) out[k] = coeff(X, k);
  return out;
}

Mat BasisSystem::synthesize(std::span<const int> pi, const Vec& v) const {
  if (static_cast<size_t>(v.size()) != pi.size()) throw std::invalid_argument("coefficient length mismatch");
  Mat X = space_.zero();
  for (size_t t = 0; t < pi.size(); ++t) {
    int k = pi[t];
    if (k < 0 || k >= dim()) throw std::out_of_range("basis index out of range");
    axpy(v[static_cast<Eigen::Index>(t)], k, X);
  }
  return X;
}

Mat BasisSystem::synthesize(const CoefficientVector& v) const {
  return synthesize(std::span<const int>(v.index_set), v.values);
}

Mat BasisSystem::synthesize_alpha(const Vec& v) const {
  if (v.size() != d1_) throw std::invalid_argument("coefficient length mismatch");
  Mat X = space_.zero();
  for (int k = 0; k < d1_; ++k) axpy(v[k], k, X);
  return X;
}

Mat BasisSystem::synthesize_all(const Vec& v) const {
  if (v.size() != dim()) throw std::invalid_argument("coefficient length mismatch");
  if (kind_ == BasisKind::Pauli) {
    const int n = space_.n1;
    std::vector<cxd> c(static_cast<size_t>(n) * n, cxd(0, 0));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < dim(); ++k) c[static_cast<size_t>(elements_[static_cast<size_t>(k)].i)] = scale * v[k];
    Mat X = space_.zero();
    pauli_inverse(c, pauli_l_, X);
    return X;
  }
  Mat X = space_.zero();
  for (int k = 0; k < dim(); ++k) axpy(v[k], k, X);
  return X;
}

Mat BasisSystem::project(const Mat& X, std::span<const int> pi) const {
  return synthesize(pi, coeffs(X, pi));
}

Mat BasisSystem::project_alpha(const Mat& X) const { return synthesize_alpha(coeffs_alpha(X)); }

Mat BasisSystem::project_beta(const Mat& X) const {
  // P_beta = I - P_alpha; cheaper than a beta-indexed pass when d1 << d2.
  space_.check_member(X);
  return X - project_alpha(X);
}

void BasisSystem::validate_probability(const Vec& p) const {
  if (p.size() != dim()) throw std::invalid_argument("probability vector length mismatch");
  double sum = 0;
  for (int k = 0; k < dim(); ++k) {
    if (in_alpha(k)) {
      if (p[k] != 0.0) throw std::invalid_argument("probability must be zero on alpha");
    } else if (!(p[k] > 0.0)) {
      throw std::invalid_argument("nonpositive probability on beta");
    }
    sum += p[k];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to one");
}

Mat BasisSystem::q_beta(const Vec& p, const Mat& X, bool dagger) const {
  space_.check_member(X);
  validate_probability(p);
  Mat out = space_.zero();
  for (int k = d1_; k < dim(); ++k) {
    double w = dagger ? 1.0 / p[k] : p[k];
    axpy(w * coeff(X, k), k, out);
  }
  return out;
}

void BasisSystem::second_moment_diagonals(const Vec& p, Vec& row_load, Vec& col_load) const {
  validate_probability(p);
  row_load = Vec::Zero(space_.n1);
  col_load = Vec::Zero(space_.n2);
  const double n = space_.n1;
  for (int k = d1_; k < dim(); ++k) {
    const BasisElement& e = elements_[static_cast<size_t>(k)];
    const double pk = p[k];
    switch (e.tag) {
      case BasisElement::Tag::Diag:
        row_load[e.i] += pk;
        col_load[e.i] += pk;
        break;
      case BasisElement::Tag::SymRe:
      case BasisElement::Tag::SymIm:
        row_load[e.i] += 0.5 * pk;
        row_load[e.j] += 0.5 * pk;
        col_load[e.i] += 0.5 * pk;
        col_load[e.j] += 0.5 * pk;
        break;
      case BasisElement::Tag::RectRe:
      case BasisElement::Tag::RectIm:
        row_load[e.i] += pk;
        col_load[e.j] += pk;
        break;
      case BasisElement::Tag::PauliWord:
        row_load.array() += pk / n;
        col_load.array() += pk / n;
        break;
    }
  }
}

std::vector<int> BasisSystem::alpha_indices() const {
  std::vector<int> idx(static_cast<size_t>(d1_));
  for (int k = 0; k < d1_; ++k) idx[static_cast<size_t>(k)] = k;
  return idx;
}

std::vector<int> BasisSystem::beta_indices() const {
  std::vector<int> idx(static_cast<size_t>(d2()));
  for (int k = d1_; k < dim(); ++k) idx[static_cast<size_t>(k - d1_)] = k;
  return idx;
}

RealMat BasisSystem::gram() const {
  if (space_.n() > 64) throw std::invalid_argument("gram(): guarded to n <= 64");
  const int d = dim();
  RealMat G(d, d);
  std::vector<Mat> mats;
  mats.reserve(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) mats.push_back(element(k));
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) G(a, b) = G(b, a) = inner(mats[static_cast<size_t>(a)], mats[static_cast<size_t>(b)]);
  return G;
}

BasisPtr make_basis(const MatrixSpace& space, BasisKind kind, const FixedPattern& pattern) {
  return std::make_shared<BasisSystem>(space, kind, pattern);
}

std::string MatrixSpace::describe() const {
  std::string f = field == Field::Real ? "real" : "complex";
  std::string s = symmetry == Symmetry::Rectangular ? "rectangular" : (field == Field::Real ? "symmetric" : "hermitian");
  return f + " " + s + " " + std::to_string(n1) + "x" + std::to_string(n2);
}

}  // namespace rcmc
