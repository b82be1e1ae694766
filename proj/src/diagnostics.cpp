#include "rcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace rcmc {

Mat TangentSpace::apply_T(const Mat& X) const {
  Mat A = U1 * (U1.adjoint() * X);
  Mat B = (X * V1) * V1.adjoint();
  return A + B - U1 * (U1.adjoint() * X * V1) * V1.adjoint();
}

Mat TangentSpace::apply_Tperp(const Mat& X) const {
  if (U2.cols() == 0 || V2.cols() == 0) return Mat::Zero(X.rows(), X.cols());
  return U2 * (U2.adjoint() * X * V2) * V2.adjoint();
}

TangentSpace tangent_projections(const Mat& Xbar, int r, bool symmetric, double gap_tol) {
  const int n = static_cast<int>(std::min(Xbar.rows(), Xbar.cols()));
  if (r < 1 || r > n) throw std::invalid_argument("tangent_projections: r out of range");
  SpectralDecomposition dec = decompose(symmetric ? hermitize(Xbar) : Xbar, symmetric);
  double top = dec.sigma[0];
  double gap = r < n ? dec.sigma[r - 1] - dec.sigma[r] : dec.sigma[r - 1];
  if (!(top > 0) || gap / top < gap_tol)
    throw std::runtime_error("tangent_projections: degenerate spectral gap at r");
  TangentSpace ts;
  ts.r = r;
  ts.U1 = dec.U.leftCols(r);
  ts.U2 = dec.U.rightCols(Xbar.rows() - r);
  ts.V1 = dec.V.leftCols(r);
  ts.V2 = dec.V.rightCols(Xbar.cols() - r);
  return ts;
}

AmBm compute_am_bm(const TangentSpace& ts, const Mat& G) {
  AmBm out;
  if (G.squaredNorm() == 0.0) {
    // Zero correction: ||U1 V1^H|| is exactly 1 for any r >= 1.
    out.am = 1.0;
    out.bm = 1.0;
    out.assumption_ok = true;
    return out;
  }
  out.am = spectral_norm(ts.U1 * ts.V1.adjoint() - ts.apply_T(G));
  double tperp = spectral_norm(ts.apply_Tperp(G));
  out.bm = 1.0 - tperp;
  out.assumption_ok = tperp < 1.0;
  return out;
}

MuConstants mu_constants(const SamplingScheme& scheme) {
  const BasisSystem& basis = *scheme.basis;
  MuConstants mu;
  double pmin = 1.0;
  for (int k = basis.d1(); k < basis.dim(); ++k) pmin = std::min(pmin, scheme.p[k]);
  mu.mu1 = 1.0 / (basis.d2() * pmin);
  Vec row_load, col_load;
  basis.second_moment_diagonals(scheme.p, row_load, col_load);
  mu.mu2 = basis.space().n() * std::max(row_load.maxCoeff(), col_load.maxCoeff());
  return mu;
}

RhoRecipe rho_recipe(double kappa, double nu, double bm, double mu2, int m, int n, int n1, int n2,
                     double c_star) {
  if (!(kappa > 1)) throw std::invalid_argument("rho_recipe: kappa must exceed 1");
  if (!(bm > 0)) throw std::runtime_error("rho_recipe: assumption violated (b_m <= 0)");
  if (!(c_star > 0)) throw std::invalid_argument("rho_recipe: C* must be positive");
  if (nu < 0) throw std::invalid_argument("rho_recipe: negative nu");
  RhoRecipe out;
  out.rho = (kappa * nu / bm) * c_star * std::sqrt(2.0 * mu2 * std::log(static_cast<double>(n1 + n2)) / (static_cast<double>(m) * n));
  out.valid = out.rho > 0;
  return out;
}

BoundProfile bound_profile(const BoundProfileInputs& in) {
  if (!(in.bm > 0)) throw std::runtime_error("bound_profile: assumption violated (b_m <= 0)");
  if (!(in.kappa > 1)) throw std::invalid_argument("bound_profile: kappa must exceed 1");
  BoundProfile out;
  out.mu1 = in.mu1;
  out.mu2 = in.mu2;
  out.kappa = in.kappa;
  out.am = in.am;
  out.bm = in.bm;
  out.am_over_bm = in.am / in.bm;
  const double n = std::min(in.n1, in.n2);
  const double logn = std::log(static_cast<double>(in.n1 + in.n2));
  double kk = in.kappa / (in.kappa - 1.0);
  out.branch_main = ((1.0 + in.kappa * out.am_over_bm) * (1.0 + in.kappa * out.am_over_bm) * in.nu * in.nu +
                     kk * kk * (1.0 + out.am_over_bm) * (1.0 + out.am_over_bm) * in.c * in.c) *
                    in.mu1 * in.mu1 * in.mu2 * in.d2 * in.r * logn / (in.m * n);
  out.branch_small = in.c * in.c * in.mu1 * std::sqrt(logn / in.m);
  out.bound_order_term = std::max(out.branch_main, out.branch_small);
  RhoRecipe rec = rho_recipe(in.kappa, in.nu, in.bm, in.mu2, in.m, static_cast<int>(n), in.n1, in.n2, in.c_star);
  out.rho_suggested = rec.rho;
  return out;
}

BlockBasis::BlockBasis(Field field, Symmetry sym, int a, int b) : field_(field), sym_(sym), a_(a), b_(b) {
  if (a < 0 || b < 0) throw std::invalid_argument("BlockBasis: negative dimension");
  if (sym_ == Symmetry::Symmetric && a != b) throw std::invalid_argument("BlockBasis: symmetric block must be square");
  if (sym_ == Symmetry::Symmetric)
    dim_ = field_ == Field::Real ? a * (a + 1) / 2 : a * a;
  else
    dim_ = field_ == Field::Real ? a * b : 2 * a * b;
}

Mat BlockBasis::element(int idx) const {
  if (idx < 0 || idx >= dim_) throw std::out_of_range("BlockBasis: index out of range");
  Mat E = Mat::Zero(a_, b_);
  if (sym_ == Symmetry::Symmetric) {
    if (idx < a_) {
      E(idx, idx) = 1.0;
      return E;
    }
    int t = idx - a_;
    const int per_pair = field_ == Field::Real ? 1 : 2;
    int pair = t / per_pair, which = t % per_pair;
    // row-major enumeration of i < j
    int i = 0, cum = 0;
    while (cum + (a_ - 1 - i) <= pair) {
      cum += a_ - 1 - i;
      ++i;
    }
    int j = i + 1 + (pair - cum);
    const double s = 0.70710678118654752440;
    if (which == 0) {
      E(i, j) = s;
      E(j, i) = s;
    } else {
      E(i, j) = cxd(0, s);
      E(j, i) = cxd(0, -s);
    }
    return E;
  }
  const int per_entry = field_ == Field::Real ? 1 : 2;
  int entry = idx / per_entry, which = idx % per_entry;
  int i = entry / b_, j = entry % b_;
  E(i, j) = which == 0 ? cxd(1, 0) : cxd(0, 1);
  return E;
}

Vec BlockBasis::coords(const Mat& M) const {
  if (M.rows() != a_ || M.cols() != b_) throw std::invalid_argument("BlockBasis: shape mismatch");
  Vec v(dim_);
  if (sym_ == Symmetry::Symmetric) {
    int t = 0;
    for (int i = 0; i < a_; ++i) v[t++] = M(i, i).real();
    const double s = std::sqrt(2.0);
    for (int i = 0; i < a_; ++i)
      for (int j = i + 1; j < a_; ++j) {
        v[t++] = s * M(i, j).real();
        if (field_ == Field::Complex) v[t++] = s * M(i, j).imag();
      }
    return v;
  }
  int t = 0;
  for (int i = 0; i < a_; ++i)
    for (int j = 0; j < b_; ++j) {
      v[t++] = M(i, j).real();
      if (field_ == Field::Complex) v[t++] = M(i, j).imag();
    }
  return v;
}

namespace {

BlockBasis domain_blocks(const MatrixSpace& space, int rows, int cols) {
  return BlockBasis(space.field, space.symmetry, rows, cols);
}

constexpr double kDenseGuard = 4e6;  // on the block dimensions (n1-r)(n2-r)

void check_guard(const TangentSpace& ts, const MatrixSpace& space) {
  double n1r = space.n1 - ts.r, n2r = space.n2 - ts.r;
  if (n1r * n2r > kDenseGuard) throw std::runtime_error("dense certificate operators: size guard exceeded");
}

}  // namespace

RealMat build_B1_dense(const TangentSpace& ts, const SamplingScheme& scheme) {
  const MatrixSpace& space = scheme.basis->space();
  check_guard(ts, space);
  const BasisSystem& basis = *scheme.basis;
  BlockBasis dom = domain_blocks(space, ts.r, ts.r);
  BlockBasis ran = domain_blocks(space, space.n1 - ts.r, space.n2 - ts.r);
  if (scheme.uniform) {
    // Qdag = d2 (I - P_alpha) and U2^H U1 = 0, so only the alpha compression
    // survives: B1 = -d2 T S^T with T, S the compressed alpha elements.
    const double d2 = basis.d2();
    RealMat T(ran.dim(), basis.d1()), S(dom.dim(), basis.d1());
    for (int k = 0; k < basis.d1(); ++k) {
      Mat Th = basis.element(k);
      T.col(k) = ran.coords(ts.U2.adjoint() * Th * ts.V2);
      S.col(k) = dom.coords(ts.U1.adjoint() * Th * ts.V1);
    }
    return RealMat(-d2 * T * S.transpose());
  }
  RealMat B1(ran.dim(), dom.dim());
  for (int j = 0; j < dom.dim(); ++j) {
    Mat Y = dom.element(j);
    Mat W = scheme.q_beta_dagger(ts.U1 * Y * ts.V1.adjoint());
    B1.col(j) = ran.coords(ts.U2.adjoint() * W * ts.V2);
  }
  return B1;
}

RealMat build_B2_dense(const TangentSpace& ts, const SamplingScheme& scheme, B2Method method) {
  const MatrixSpace& space = scheme.basis->space();
  check_guard(ts, space);
  const BasisSystem& basis = *scheme.basis;
  BlockBasis ran = domain_blocks(space, space.n1 - ts.r, space.n2 - ts.r);
  if (method == B2Method::Columnwise) {
    if (scheme.uniform) {
      // B2 = d2 (I - T T^T) with T_col_k = coords(U2^H Theta_k V2), k in alpha.
      const double d2 = basis.d2();
      RealMat T(ran.dim(), std::max(basis.d1(), 1));
      T.setZero();
      for (int k = 0; k < basis.d1(); ++k) T.col(k) = ran.coords(ts.U2.adjoint() * basis.element(k) * ts.V2);
      RealMat B2 = RealMat::Identity(ran.dim(), ran.dim());
      B2.noalias() -= T * T.transpose();
      return RealMat(d2 * B2);
    }
    RealMat B2(ran.dim(), ran.dim());
    for (int j = 0; j < ran.dim(); ++j) {
      Mat Z = ran.element(j);
      Mat W = scheme.q_beta_dagger(ts.U2 * Z * ts.V2.adjoint());
      B2.col(j) = ran.coords(ts.U2.adjoint() * W * ts.V2);
    }
    return B2;
  }
  // Assembled quadratic form: B2 = C^T C with C_{kj} = <Theta_k, U2 E_j V2^H>/sqrt(p_k).
  RealMat C(basis.d2(), ran.dim());
  for (int j = 0; j < ran.dim(); ++j) {
    Mat Mj = ts.U2 * ran.element(j) * ts.V2.adjoint();
    Vec cb = basis.coeffs_beta(Mj);
    for (int t = 0; t < basis.d2(); ++t) C(t, j) = cb[t] / std::sqrt(scheme.p[basis.d1() + t]);
  }
  return C.transpose() * C;
}

Vec ghat(const Mat& Xbar, int r, const RankCorrectionFn& fn, bool symmetric) {
  if (fn.is_known_rank()) return Vec::Zero(r);
  SpectralDecomposition dec = decompose(symmetric ? hermitize(Xbar) : Xbar, symmetric);
  Vec f = f_vector(dec.sigma, fn);
  return Vec::Ones(r) - f.head(r);
}

namespace {

// The rectangular-case machinery on a symmetric space needs V2 = U2, which
// holds exactly when Xbar is positive semidefinite.
void require_psd_point(const Mat& Xbar, const char* what) {
  SpectralDecomposition dc = decompose(hermitize(Xbar), true);
  if (dc.lambda.size() > 0 && dc.lambda.minCoeff() < -1e-10 * std::max(dc.sigma[0], 1e-300))
    throw std::invalid_argument(std::string(what) + ": indefinite symmetric matrix is not supported");
}

}  // namespace

NondegeneracyReport check_nondegeneracy(const Mat& Xbar, int r, const BasisSystem& basis, bool psd) {
  const MatrixSpace& space = basis.space();
  space.check_member(Xbar);
  if (!psd && space.is_symmetric()) require_psd_point(Xbar, "check_nondegeneracy");
  NondegeneracyReport rep;
  const int d1 = basis.d1();
  if (d1 == 0) {
    rep.nondegenerate = true;  // R_alpha onto R^0 is trivially surjective
    rep.margin = rep.margin_rel = 1.0;
    return rep;
  }
  TangentSpace ts = tangent_projections(Xbar, r, psd || space.is_symmetric());
  // Orthonormal basis of the linearity space {H : U2^H H V2 = 0}: with
  // H = U B V^H, B ranges over blocks with the bottom-right corner zero.
  std::vector<Mat> lin_basis;
  Mat U(space.n1, space.n1), V(space.n2, space.n2);
  U << ts.U1, ts.U2;
  V << ts.V1, ts.V2;
  if (psd) {
    // Hermitian H = P C P^H with C Hermitian, C22 = 0.
    BlockBasis full(space.field, Symmetry::Symmetric, space.n1, space.n1);
    for (int idx = 0; idx < full.dim(); ++idx) {
      Mat C = full.element(idx);
      bool bottom = true;
      for (int i = 0; i < space.n1 && bottom; ++i)
        for (int j = 0; j < space.n1 && bottom; ++j)
          if (C(i, j) != cxd(0, 0) && (i < r || j < r)) bottom = false;
      if (bottom) continue;
      lin_basis.push_back(U * C * U.adjoint());
    }
  } else {
    BlockBasis full(space.field, space.symmetry, space.n1, space.n2);
    for (int idx = 0; idx < full.dim(); ++idx) {
      Mat B = full.element(idx);
      bool bottom = true;
      for (int i = 0; i < space.n1 && bottom; ++i)
        for (int j = 0; j < space.n2 && bottom; ++j)
          if (B(i, j) != cxd(0, 0) && (i < r || j < r)) bottom = false;
      if (bottom) continue;
      lin_basis.push_back(U * B * V.adjoint());
    }
  }
  const int dim = static_cast<int>(lin_basis.size());
  if (static_cast<double>(d1) * dim > 4e6) throw std::runtime_error("check_nondegeneracy: size guard exceeded");
  rep.map_rows = d1;
  rep.map_cols = dim;
  RealMat A(d1, dim);
  for (int j = 0; j < dim; ++j) A.col(j) = basis.coeffs_alpha(lin_basis[static_cast<size_t>(j)]);
  Eigen::SelfAdjointEigenSolver<RealMat> es(A * A.transpose());
  double lmin = es.eigenvalues().minCoeff();
  double lmax = es.eigenvalues().maxCoeff();
  rep.margin = std::sqrt(std::max(0.0, lmin));
  rep.margin_rel = lmax > 0 ? rep.margin / std::sqrt(lmax) : 0.0;
  rep.nondegenerate = rep.margin_rel >= 1e-10;
  return rep;
}

namespace {

ConsistencyReport check_consistency_impl(const Mat& Xbar, int r, const SamplingScheme& scheme,
                                         const RankCorrectionFn& fn, bool psd) {
  const BasisSystem& basis = *scheme.basis;
  const MatrixSpace& space = basis.space();
  space.check_member(Xbar);
  if (psd && !space.is_symmetric()) throw std::invalid_argument("check_consistency_psd: symmetric space required");

  if (!psd && space.is_symmetric()) require_psd_point(Xbar, "check_consistency_rect");

  ConsistencyReport rep;
  bool symmetric = psd || space.is_symmetric();
  TangentSpace ts = tangent_projections(Xbar, r, symmetric);
  rep.ghat = ghat(Xbar, r, fn, symmetric);
  rep.nondegeneracy = check_nondegeneracy(Xbar, r, basis, psd);
  rep.B1_matrix = build_B1_dense(ts, scheme);
  rep.B2_matrix = build_B2_dense(ts, scheme, B2Method::Columnwise);

  BlockBasis dom(space.field, space.symmetry, r, r);
  BlockBasis ran(space.field, space.symmetry, space.n1 - r, space.n2 - r);
  Mat Dg = Mat::Zero(r, r);
  for (int i = 0; i < r; ++i) Dg(i, i) = rep.ghat[i];
  Vec rhs = rep.B1_matrix * dom.coords(Dg);

  Eigen::LDLT<RealMat> ldlt(rep.B2_matrix);
  Vec D = ldlt.vectorD();
  double dmax = D.cwiseAbs().maxCoeff();
  rep.b2_singular = ldlt.info() != Eigen::Success || !(dmax > 0) || D.minCoeff() <= 1e-12 * dmax;
  if (rep.b2_singular && !rep.nondegeneracy.nondegenerate) {
    rep.verdict = Verdict::NoVerdict;
    rep.certificate_value = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  Vec sol = ldlt.solve(rhs);

  Mat block = Mat::Zero(space.n1 - r, space.n2 - r);
  for (int j = 0; j < ran.dim(); ++j) block += sol[j] * ran.element(j);

  if (!psd) {
    rep.certificate_block = block;
    rep.certificate_value = spectral_norm(block);
    const double band = 1e-9;
    if (rep.certificate_value < 1.0 - band)
      rep.verdict = Verdict::Consistent;
    else if (rep.certificate_value <= 1.0 + band)
      rep.verdict = Verdict::Inconclusive;
    else
      rep.verdict = Verdict::Violated;
    return rep;
  }

  Mat Lambda = hermitize(Mat::Identity(space.n1 - r, space.n1 - r) + block);
  rep.certificate_block = Lambda;
  Eigen::SelfAdjointEigenSolver<Mat> es(Lambda);
  rep.certificate_value = es.eigenvalues().minCoeff();
  const double band = 1e-9;
  if (rep.certificate_value > band)
    rep.verdict = Verdict::Consistent;
  else if (rep.certificate_value >= -band)
    rep.verdict = Verdict::Inconclusive;
  else
    rep.verdict = Verdict::Violated;
  return rep;
}

}  // namespace

ConsistencyReport check_consistency_rect(const Mat& Xbar, int r, const SamplingScheme& scheme,
                                         const RankCorrectionFn& fn) {
  return check_consistency_impl(Xbar, r, scheme, fn, false);
}

ConsistencyReport check_consistency_psd(const Mat& Xbar, int r, const SamplingScheme& scheme,
                                        const RankCorrectionFn& fn) {
  return check_consistency_impl(Xbar, r, scheme, fn, true);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "CONSISTENT";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    case Verdict::Violated: return "VIOLATED";
    case Verdict::NoVerdict: return "NO-VERDICT";
  }
  return "NO-VERDICT";
}

void write_report(std::ostream& os, const ConsistencyReport& rep) {
  os << "verdict: " << to_string(rep.verdict) << "\n";
  os << "certificate_value: " << rep.certificate_value << "\n";
  os << "b2_singular: " << (rep.b2_singular ? "yes" : "no") << "\n";
  os << "nondegenerate: " << (rep.nondegeneracy.nondegenerate ? "yes" : "no") << "\n";
  os << "nondegeneracy_margin: " << rep.nondegeneracy.margin << "\n";
  os << "nondegeneracy_margin_rel: " << rep.nondegeneracy.margin_rel << "\n";
  os << "ghat:";
  for (Eigen::Index i = 0; i < rep.ghat.size(); ++i) os << " " << rep.ghat[i];
  os << "\n";
}

}  // namespace rcmc
