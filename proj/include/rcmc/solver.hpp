#pragma once

#include "rcmc/basis.hpp"
#include "rcmc/sampling.hpp"
#include "rcmc/spectral.hpp"
#include "rcmc/types.hpp"

#include <optional>

namespace rcmc {

/// One instance of the rank-correction problem: minimize
///   1/(2m) ||y - R_Omega(X)||^2 + rho (||X||_* - <F(Xt),X> + gamma/2 ||X-Xt||_F^2)
/// subject to R_alpha(X) = fixed_values (rectangular case), with ||X||_*
/// replaced by <I,X> plus the PSD cone constraint in the psd case, and an
/// optional box ||R_beta(X)||_inf <= c. The nuclear-norm baseline is the
/// special case correction = none. `fixed_values` absent drops the equality
/// constraint (the trace-free baseline of the density experiments).
struct RcsProblem {
  BasisPtr basis;
  ObservationSet obs;
  std::optional<Vec> fixed_values;
  CorrectionMatrix correction;
  double rho = 0.0;
  bool psd = false;
  std::optional<double> bound_c;

  void validate() const;
};

struct SolverConfig {
  int max_iter = 2000;
  double tol_primal = 1e-7;  // relative
  double tol_dual = 1e-7;    // relative
  double admm_sigma = 1.0;
  bool sigma_adapt = true;
  double relax = 1.5;      // over-relaxation, valid in (0, 2)
  double rank_tol = 1e-6;  // relative to sigma_1
  int eval_every = 50;     // cadence of candidate evaluation

  void validate() const;
};

/// Splitting state kept across solves for warm starts (e.g. along a rho sweep).
struct SolveState {
  Mat Z, U;
  double sigma = 0.0;
  double rho = 0.0;  // rho the state was produced under (dual rescaling)
  bool valid = false;
};

struct SolveResult {
  Mat X_hat;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int numerical_rank = 0;
  Vec spectrum;
  bool converged = false;
  double alpha_violation = 0.0;
  double cone_violation = 0.0;
  double bound_violation = 0.0;
  double residual_ratio = 0.0;  // ||y - R_Omega(X_hat)|| / ||y||
  SolveState state;
};

SolveResult solve(const RcsProblem& problem, const SolverConfig& cfg = {}, const SolveState* warm = nullptr);

/// Singular value soft-threshold: prox of t ||.||_*.
Mat svt(const Mat& X, double t);

/// Prox of t Tr(.) + PSD indicator: project X - t I onto the cone.
Mat psd_prox(const Mat& X, double t);

/// Coefficientwise minimizer of the smooth ADMM block: given zu = coefficients
/// of Z - U, returns the full coefficient vector of the x-iterate. Exposed for
/// testing; `solve` uses the same code path.
Vec x_update(const RcsProblem& problem, const Vec& zu, double sigma);

/// Exact objective value of the problem at X (the indicator terms excluded;
/// feasibility is reported separately).
double objective_value(const Mat& X, const RcsProblem& problem);

/// KKT-based certificate at a candidate solution: least-squares multiplier
/// over alpha plus a nuclear-norm subgradient (rectangular) or a cone
/// multiplier (PSD); reports the stationarity residual and the subgradient /
/// multiplier admissibility.
struct OptimalityReport {
  double stationarity_residual = 0.0;
  double scale = 1.0;
  double subgradient_norm = 0.0;     // rectangular: ||Gamma_hat||
  double multiplier_lambda_min = 0.0;  // psd: lambda_min of the cone multiplier block
  double complementarity = 0.0;        // psd: |<X_hat, S_hat>|
  bool pass = false;
};

OptimalityReport check_optimality(const Mat& X_hat, const RcsProblem& problem, double tol = 1e-7,
                                  double rank_tol = 1e-6);

}  // namespace rcmc
