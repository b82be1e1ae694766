#pragma once

#include "rcmc/basis.hpp"
#include "rcmc/sampling.hpp"
#include "rcmc/spectral.hpp"
#include "rcmc/types.hpp"

#include <iosfwd>
#include <string>

namespace rcmc {

/// Tangent-space blocks of a rank-r matrix: U = [U1 U2], V = [V1 V2].
/// P_T(X) = U1 U1^H X + X V1 V1^H - U1 U1^H X V1 V1^H, P_Tperp = U2 U2^H X V2 V2^H.
struct TangentSpace {
  Mat U1, U2, V1, V2;
  int r = 0;

  Mat apply_T(const Mat& X) const;
  Mat apply_Tperp(const Mat& X) const;
};

TangentSpace tangent_projections(const Mat& Xbar, int r, bool symmetric, double gap_tol = 1e-10);

/// a_m = ||U1 V1^H - P_T(G)||, b_m = 1 - ||P_Tperp(G)|| for G = F(Xt) + gamma Xt.
/// `assumption_ok` flags ||P_Tperp(G)|| < 1 (required by the error bounds).
struct AmBm {
  double am = 0.0;
  double bm = 0.0;
  bool assumption_ok = false;
};

AmBm compute_am_bm(const TangentSpace& ts, const Mat& G);

/// mu1 = 1/(d2 min_k p_k); mu2 = n max(||sum p_k Theta Theta^H||, ||sum p_k Theta^H Theta||).
struct MuConstants {
  double mu1 = 1.0;
  double mu2 = 1.0;
};

MuConstants mu_constants(const SamplingScheme& scheme);

/// rho_m = (kappa nu / b_m) C* sqrt(2 mu2 log(n1+n2) / (m n)). C* is the
/// unspecified theoretical constant, exposed as a parameter (default 1).
/// nu = 0 makes the recipe degenerate (rho must be positive for the solver);
/// the result is flagged invalid in that case.
struct RhoRecipe {
  double rho = 0.0;
  bool valid = false;
};

RhoRecipe rho_recipe(double kappa, double nu, double bm, double mu2, int m, int n, int n1, int n2,
                     double c_star = 1.0);

struct BoundProfileInputs {
  double am = 0.0, bm = 1.0;
  double kappa = 2.0;
  double nu = 0.0;
  double c = 1.0;
  double mu1 = 1.0, mu2 = 1.0;
  int d2 = 0, r = 0, n1 = 0, n2 = 0, m = 0;
  double c_star = 1.0;
};

/// The order terms of the recovery error bound, with unit constants in place
/// of the unspecified numerical constant.
struct BoundProfile {
  double mu1 = 1.0, mu2 = 1.0;
  double kappa = 2.0;
  double rho_suggested = 0.0;
  double am = 0.0, bm = 1.0, am_over_bm = 0.0;
  double branch_main = 0.0;   // [(1+kappa a/b)^2 nu^2 + (kappa/(kappa-1))^2 (1+a/b)^2 c^2] mu1^2 mu2 d2 r log(n1+n2)/(m n)
  double branch_small = 0.0;  // c^2 mu1 sqrt(log(n1+n2)/m)
  double bound_order_term = 0.0;
  std::string note = "up to unspecified numerical constant C'";
};

BoundProfile bound_profile(const BoundProfileInputs& in);

/// Orthonormal coordinates on a small block matrix space (rectangular,
/// symmetric or Hermitian), used to densify the certificate operators.
class BlockBasis {
 public:
  BlockBasis(Field field, Symmetry sym, int a, int b);
  int dim() const { return dim_; }
  int rows() const { return a_; }
  int cols() const { return b_; }
  Mat element(int idx) const;
  Vec coords(const Mat& M) const;

 private:
  Field field_;
  Symmetry sym_;
  int a_, b_, dim_;
};

enum class B2Method { Columnwise, Gram };

/// Dense matrices for B1(Y) = U2^H Qdag(U1 Y V1^H) V2 and
/// B2(Z) = U2^H Qdag(U2 Z V2^H) V2 over the block-space coordinates.
RealMat build_B1_dense(const TangentSpace& ts, const SamplingScheme& scheme);
RealMat build_B2_dense(const TangentSpace& ts, const SamplingScheme& scheme,
                       B2Method method = B2Method::Columnwise);

/// ghat_i = 1 - f_i(sigma(Xbar)), i = 1..r; identically zero for known-rank.
Vec ghat(const Mat& Xbar, int r, const RankCorrectionFn& fn, bool symmetric);

enum class Verdict { Consistent, Inconclusive, Violated, NoVerdict };

std::string to_string(Verdict v);

struct NondegeneracyReport {
  bool nondegenerate = false;
  double margin = 0.0;      // smallest singular value of the restricted map
  double margin_rel = 0.0;  // relative to the largest
  int map_rows = 0, map_cols = 0;
};

/// Surjectivity of R_alpha restricted to the linearity space of the tangent
/// cone at Xbar ({H : U2^H H V2 = 0}, or {H in S^n : P2^H H P2 = 0} for the
/// PSD case).
NondegeneracyReport check_nondegeneracy(const Mat& Xbar, int r, const BasisSystem& basis, bool psd);

struct ConsistencyReport {
  RealMat B1_matrix;
  RealMat B2_matrix;
  Vec ghat;
  Mat certificate_block;     // Gamma_hat (rectangular) or Lambda_hat (PSD)
  double certificate_value;  // ||Gamma_hat|| or lambda_min(Lambda_hat)
  bool b2_singular = false;
  NondegeneracyReport nondegeneracy;
  Verdict verdict = Verdict::NoVerdict;
};

ConsistencyReport check_consistency_rect(const Mat& Xbar, int r, const SamplingScheme& scheme,
                                         const RankCorrectionFn& fn);
ConsistencyReport check_consistency_psd(const Mat& Xbar, int r, const SamplingScheme& scheme,
                                        const RankCorrectionFn& fn);

void write_report(std::ostream& os, const ConsistencyReport& rep);

}  // namespace rcmc
