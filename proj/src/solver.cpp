#include "rcmc/solver.hpp"

#include <algorithm>
#include <cmath>

namespace rcmc {

namespace {

constexpr double kSigmaMin = 1e-4;
constexpr double kSigmaMax = 1e4;

struct Arrays {
  Vec g;     // <Theta_k, G> over all k
  Vec mult;  // multiplicity per global index
  Vec sums;  // observation sums per global index
  int m = 0;
};

Arrays precompute(const RcsProblem& p) {
  const BasisSystem& basis = *p.basis;
  Arrays a;
  a.g = basis.coeffs_all(p.correction.G);
  a.mult = Vec::Zero(basis.dim());
  a.sums = Vec::Zero(basis.dim());
  a.m = p.obs.samples.m();
  for (size_t t = 0; t < p.obs.samples.observed.size(); ++t) {
    int k = p.obs.samples.observed[t];
    a.mult[k] = p.obs.samples.multiplicity[t];
    a.sums[k] = p.obs.sums[t];
  }
  return a;
}

Vec x_update_impl(const RcsProblem& p, const Arrays& a, const Vec& zu, double sigma) {
  const BasisSystem& basis = *p.basis;
  const int d = basis.dim();
  const int d1 = basis.d1();
  const double m = static_cast<double>(a.m);
  const double rho = p.rho;
  const double rg = rho * p.correction.gamma;
  const bool enforce = p.fixed_values.has_value();
  Vec x(d);
  for (int k = 0; k < d; ++k) {
    if (enforce && k < d1) {
      x[k] = (*p.fixed_values)[k];
      continue;
    }
    double num = a.sums[k] / m + rho * a.g[k] + sigma * zu[k];
    double den = a.mult[k] / m + rg + sigma;
    double v = num / den;
    if (p.bound_c && k >= d1) v = std::clamp(v, -*p.bound_c, *p.bound_c);
    x[k] = v;
  }
  return x;
}

double datafit(const Vec& x_observed, const std::vector<int>& observed, const Arrays& a) {
  double acc = 0.0;
  for (size_t t = 0; t < observed.size(); ++t) {
    int k = observed[t];
    acc += a.mult[k] * x_observed[static_cast<Eigen::Index>(t)] * x_observed[static_cast<Eigen::Index>(t)] -
           2.0 * a.sums[k] * x_observed[static_cast<Eigen::Index>(t)];
  }
  return acc;
}

struct Candidate {
  Mat X;
  double objective = 0.0;
  Vec spectrum;  // prox-iterate spectrum: exactly thresholded, drives the rank
  double cone_violation = 0.0;
};

// Builds a feasible candidate from the prox iterate: alpha coefficients
// overwritten, beta box clamped, and (PSD case) a few alternating projection
// rounds to drive the cone violation to round-off. The reported spectrum is
// the prox iterate's own (its tail is exactly zero; the feasibility touch-up
// perturbs singular values only at the residual scale).
Candidate build_candidate(const Mat& Z, const Vec& z_spectrum, const RcsProblem& p, const Arrays& a) {
  const BasisSystem& basis = *p.basis;
  const int d1 = basis.d1();
  Candidate cand;
  cand.spectrum = z_spectrum;
  Vec xc = basis.coeffs_all(Z);
  auto impose = [&](Vec& v) {
    if (p.fixed_values)
      for (int k = 0; k < d1; ++k) v[k] = (*p.fixed_values)[k];
    if (p.bound_c)
      for (int k = d1; k < basis.dim(); ++k) v[k] = std::clamp(v[k], -*p.bound_c, *p.bound_c);
  };
  impose(xc);
  Mat X = basis.synthesize_all(xc);
  double nuclear = 0.0;
  if (p.psd) {
    SpectralDecomposition dec = decompose(X, true);
    double top = dec.sigma.size() > 0 ? dec.sigma[0] : 0.0;
    for (int round = 0; round < 16; ++round) {
      double lmin = dec.lambda.size() > 0 ? dec.lambda.minCoeff() : 0.0;
      if (lmin >= -1e-13 * std::max(top, 1.0)) break;
      Vec clipped = dec.lambda.cwiseMax(0.0);
      X = dec.P() * clipped.cast<cxd>().asDiagonal() * dec.P().adjoint();
      xc = basis.coeffs_all(X);
      impose(xc);
      X = basis.synthesize_all(xc);
      dec = decompose(X, true);
    }
    cand.cone_violation = std::max(0.0, -dec.lambda.minCoeff());
  } else {
    nuclear = nuclear_norm(X);
  }
  cand.X = std::move(X);
  Vec x_obs(static_cast<Eigen::Index>(p.obs.samples.observed.size()));
  for (size_t t = 0; t < p.obs.samples.observed.size(); ++t)
    x_obs[static_cast<Eigen::Index>(t)] = xc[p.obs.samples.observed[t]];
  double fit = (datafit(x_obs, p.obs.samples.observed, a) + p.obs.y_sqsum) / (2.0 * a.m);
  double reg = p.psd ? cand.X.real().trace() : nuclear;
  double lin = xc.dot(a.g);
  double prox = 0.5 * p.correction.gamma * (xc.squaredNorm() + p.correction.xtilde_sqnorm);
  cand.objective = fit + p.rho * (reg - lin + prox);
  return cand;
}

}  // namespace

void RcsProblem::validate() const {
  if (!basis) throw std::invalid_argument("RcsProblem: null basis");
  if (!(rho > 0)) throw std::invalid_argument("RcsProblem: rho must be positive");
  if (correction.gamma < 0) throw std::invalid_argument("RcsProblem: gamma must be nonnegative");
  if (obs.samples.m() < 1) throw std::invalid_argument("RcsProblem: no observations");
  basis->space().check_member(correction.G);
  if (psd) {
    if (!basis->space().is_symmetric()) throw std::invalid_argument("RcsProblem: psd flag requires a symmetric space");
    double drift = (correction.G - correction.G.adjoint()).cwiseAbs().maxCoeff();
    if (drift > 1e-9 * (1.0 + correction.G.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("RcsProblem: psd problem requires a Hermitian correction matrix");
  }
  if (fixed_values && fixed_values->size() != basis->d1())
    throw std::invalid_argument("RcsProblem: fixed coefficient length mismatch");
  if (bound_c && !(*bound_c > 0)) throw std::invalid_argument("RcsProblem: bound_c must be positive");
  for (int k : obs.samples.omega)
    if (k < basis->d1() || k >= basis->dim()) throw std::invalid_argument("RcsProblem: sampled index outside beta");
}

void SolverConfig::validate() const {
  if (max_iter < 1 || !(tol_primal > 0) || !(tol_dual > 0) || !(admm_sigma > 0) || !(rank_tol > 0) ||
      eval_every < 1)
    throw std::invalid_argument("SolverConfig: all parameters must be positive");
  if (!(relax > 0) || !(relax < 2)) throw std::invalid_argument("SolverConfig: relax must lie in (0, 2)");
}

Mat svt(const Mat& X, double t) {
  if (t < 0) throw std::invalid_argument("svt: negative threshold");
  if (t == 0.0) return X;
  const bool real = X.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real) {
    Eigen::BDCSVD<RealMat> svd(X.real(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vec s = (svd.singularValues().array() - t).max(0.0);
    return (svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose()).cast<cxd>();
  }
  Eigen::BDCSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vec s = (svd.singularValues().array() - t).max(0.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
}

Mat psd_prox(const Mat& X, double t) {
  if (t < 0) throw std::invalid_argument("psd_prox: negative threshold");
  if (X.rows() != X.cols()) throw std::invalid_argument("psd_prox: non-square input");
  double drift = (X - X.adjoint()).cwiseAbs().maxCoeff();
  if (drift > 1e-9 * (1.0 + X.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("psd_prox: input is not symmetric/Hermitian");
  Mat H = hermitize(X);
  const bool real = H.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real) {
    Eigen::SelfAdjointEigenSolver<RealMat> es(H.real());
    Vec lam = (es.eigenvalues().array() - t).max(0.0);
    return (es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose()).cast<cxd>();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  Vec lam = (es.eigenvalues().array() - t).max(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

Vec x_update(const RcsProblem& problem, const Vec& zu, double sigma) {
  problem.validate();
  if (zu.size() != problem.basis->dim()) throw std::invalid_argument("x_update: coefficient length mismatch");
  Arrays a = precompute(problem);
  return x_update_impl(problem, a, zu, sigma);
}

namespace {

// Prox evaluations that also hand back the (thresholded) spectrum, so the
// solver does not redecompose the iterate for rank reporting.
Mat svt_with_spectrum(const Mat& X, double t, Vec& spectrum) {
  const bool real = X.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real) {
    Eigen::BDCSVD<RealMat> svd(X.real(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    spectrum = (svd.singularValues().array() - t).max(0.0);
    return (svd.matrixU() * spectrum.asDiagonal() * svd.matrixV().transpose()).cast<cxd>();
  }
  Eigen::BDCSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  spectrum = (svd.singularValues().array() - t).max(0.0);
  return svd.matrixU() * spectrum.asDiagonal() * svd.matrixV().adjoint();
}

Mat psd_prox_with_spectrum(const Mat& X, double t, Vec& spectrum) {
  Mat H = hermitize(X);
  const bool real = H.imag().cwiseAbs().maxCoeff() == 0.0;
  Vec lam;
  Mat Z;
  if (real) {
    Eigen::SelfAdjointEigenSolver<RealMat> es(H.real());
    lam = (es.eigenvalues().array() - t).max(0.0);
    Z = (es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose()).cast<cxd>();
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    lam = (es.eigenvalues().array() - t).max(0.0);
    Z = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
  }
  spectrum = lam.reverse();  // nonincreasing
  return Z;
}

}  // namespace

double objective_value(const Mat& X, const RcsProblem& problem) {
  const BasisSystem& basis = *problem.basis;
  basis.space().check_member(X);
  Arrays a = precompute(problem);
  Vec x_obs(static_cast<Eigen::Index>(problem.obs.samples.observed.size()));
  for (size_t t = 0; t < problem.obs.samples.observed.size(); ++t)
    x_obs[static_cast<Eigen::Index>(t)] = basis.coeff(X, problem.obs.samples.observed[t]);
  double fit = (datafit(x_obs, problem.obs.samples.observed, a) + problem.obs.y_sqsum) / (2.0 * a.m);
  double reg = problem.psd ? X.real().trace() : nuclear_norm(X);
  double lin = inner(problem.correction.G, X);
  double prox = 0.5 * problem.correction.gamma * (X.squaredNorm() + problem.correction.xtilde_sqnorm);
  return fit + problem.rho * (reg - lin + prox);
}

SolveResult solve(const RcsProblem& problem, const SolverConfig& cfg, const SolveState* warm) {
  problem.validate();
  cfg.validate();
  const BasisSystem& basis = *problem.basis;
  const int d = basis.dim();
  Arrays a = precompute(problem);

  Mat Z, U;
  double sigma = cfg.admm_sigma;
  if (warm && warm->valid) {
    Z = warm->Z;
    // The Z-block dual scales with rho; keep it consistent across a sweep.
    U = warm->rho > 0 ? Mat((problem.rho / warm->rho) * warm->U) : warm->U;
    sigma = warm->sigma > 0 ? warm->sigma : cfg.admm_sigma;
  } else {
    Vec x0 = Vec::Zero(d);
    if (problem.fixed_values)
      for (int k = 0; k < basis.d1(); ++k) x0[k] = (*problem.fixed_values)[k];
    for (size_t t = 0; t < problem.obs.samples.observed.size(); ++t) {
      int k = problem.obs.samples.observed[t];
      x0[k] = problem.obs.sums[t] / problem.obs.samples.multiplicity[t];
    }
    Z = basis.synthesize_all(x0);
    if (problem.psd) Z = psd_prox(Z, 0.0);
    U = basis.space().zero();
  }
  sigma = std::clamp(sigma, kSigmaMin, kSigmaMax);

  const double abs_floor = 1e-14 * std::sqrt(static_cast<double>(basis.space().n1) * basis.space().n2);
  Candidate best;
  bool have_best = false;
  Vec z_spectrum;
  auto consider = [&](const Mat& Zc) {
    Candidate cand = build_candidate(Zc, z_spectrum, problem, a);
    if (!have_best || cand.objective < best.objective) {
      best = std::move(cand);
      have_best = true;
    }
  };

  Mat X = Z, Zprev;
  double pri = 0.0, dua = 0.0;
  int it = 0;
  bool converged = false;
  for (it = 1; it <= cfg.max_iter; ++it) {
    Vec zu = basis.coeffs_all(Z - U);
    Vec x = x_update_impl(problem, a, zu, sigma);
    X = basis.synthesize_all(x);
    Zprev = Z;
    Mat Xr = cfg.relax == 1.0 ? X : Mat(cfg.relax * X + (1.0 - cfg.relax) * Zprev);
    Mat W = Xr + U;
    Z = problem.psd ? psd_prox_with_spectrum(W, problem.rho / sigma, z_spectrum)
                    : svt_with_spectrum(W, problem.rho / sigma, z_spectrum);
    U += Xr - Z;
    pri = (X - Z).norm();
    // X-block stationarity violation; the relaxation adds the (relax-1) term.
    dua = cfg.relax == 1.0 ? sigma * (Z - Zprev).norm()
                           : sigma * ((cfg.relax - 1.0) * (X - Zprev) - (Z - Zprev)).norm();
    double eps_pri = cfg.tol_primal * std::max(X.norm(), Z.norm()) + abs_floor;
    double eps_dua = cfg.tol_dual * sigma * U.norm() + abs_floor;
    if (pri <= eps_pri && dua <= eps_dua) {
      converged = true;
      break;
    }
    if (cfg.sigma_adapt) {
      // Residual balancing on the relative residuals.
      double rp = pri / eps_pri, rd = dua / eps_dua;
      if (rp > 10.0 * rd && sigma < kSigmaMax) {
        sigma *= 2.0;
        U *= 0.5;
      } else if (rd > 10.0 * rp && sigma > kSigmaMin) {
        sigma *= 0.5;
        U *= 2.0;
      }
    }
    if (it % cfg.eval_every == 0) consider(Z);
  }
  if (it > cfg.max_iter) it = cfg.max_iter;
  consider(Z);

  SolveResult res;
  res.X_hat = best.X;
  res.objective = best.objective;
  res.iterations = it;
  res.primal_residual = pri;
  res.dual_residual = dua;
  res.spectrum = best.spectrum;
  res.numerical_rank = numerical_rank(best.spectrum, cfg.rank_tol);
  res.converged = converged;
  res.cone_violation = best.cone_violation;
  if (problem.fixed_values)
    res.alpha_violation = (basis.coeffs_alpha(best.X) - *problem.fixed_values).cwiseAbs().maxCoeff();
  if (problem.bound_c) {
    double mx = 0.0;
    Vec xc = basis.coeffs_all(best.X);
    for (int k = basis.d1(); k < d; ++k) mx = std::max(mx, std::abs(xc[k]));
    res.bound_violation = std::max(0.0, mx - *problem.bound_c);
  }
  Vec fitted = apply_sampling(basis, best.X, problem.obs.samples);
  double ynorm = problem.obs.y.norm();
  res.residual_ratio = ynorm > 0 ? (problem.obs.y - fitted).norm() / ynorm : 0.0;
  res.state.Z = Z;
  res.state.U = U;
  res.state.sigma = sigma;
  res.state.rho = problem.rho;
  res.state.valid = true;
  return res;
}

OptimalityReport check_optimality(const Mat& X_hat, const RcsProblem& problem, double tol, double rank_tol) {
  const BasisSystem& basis = *problem.basis;
  basis.space().check_member(X_hat);
  const int d1 = basis.d1();
  const double rho = problem.rho;
  Arrays a = precompute(problem);

  // Gradient of the smooth part, written through G:
  //   (1/m) R_Omega^*(R_Omega(X) - y) - rho G + rho gamma X  (+ rho I, psd case)
  Vec resid_obs(static_cast<Eigen::Index>(problem.obs.samples.observed.size()));
  Mat grad = basis.space().zero();
  for (size_t t = 0; t < problem.obs.samples.observed.size(); ++t) {
    int k = problem.obs.samples.observed[t];
    double xk = basis.coeff(X_hat, k);
    basis.axpy((a.mult[k] * xk - a.sums[k]) / a.m, k, grad);
  }
  Mat M = grad - rho * problem.correction.G + rho * problem.correction.gamma * X_hat;
  if (problem.psd) M += rho * Mat::Identity(M.rows(), M.cols());

  SpectralDecomposition dec = decompose(problem.psd || basis.space().is_symmetric() ? hermitize(X_hat) : X_hat,
                                        problem.psd || basis.space().is_symmetric());
  int r = numerical_rank(dec.sigma, rank_tol);
  const int n1 = basis.space().n1, n2 = basis.space().n2;
  Mat U1 = dec.U.leftCols(r), U2 = dec.U.rightCols(n1 - r);
  Mat V1 = dec.V.leftCols(r), V2 = dec.V.rightCols(n2 - r);

  OptimalityReport rep;
  const bool enforce = problem.fixed_values.has_value();

  if (!problem.psd) {
    // Stationarity: rho Ghat = R_alpha^*(eta) - M with Ghat = U1 V1^H + U2 Gamma V2^H.
    Mat N = M + rho * U1 * V1.adjoint();
    auto project_T = [&](const Mat& Y) {
      Mat A = U1 * (U1.adjoint() * Y);
      Mat B = (Y * V1) * V1.adjoint();
      return Mat(A + B - U1 * (U1.adjoint() * Y * V1) * V1.adjoint());
    };
    Mat R = -N;
    if (enforce && d1 > 0) {
      RealMat Gm(d1, d1);
      Vec rhs(d1);
      Vec pn = basis.coeffs_alpha(project_T(N));
      for (int l = 0; l < d1; ++l) {
        Mat col = project_T(basis.element(l));
        Gm.col(l) = basis.coeffs_alpha(col);
        rhs[l] = pn[l];
      }
      Vec eta = RealMat(Gm).completeOrthogonalDecomposition().solve(rhs);
      R = basis.synthesize_alpha(eta) - N;
    }
    rep.stationarity_residual = project_T(R).norm();
    if (n1 > r && n2 > r) rep.subgradient_norm = spectral_norm(U2.adjoint() * R * V2) / rho;
    rep.scale = std::max({1.0, rho, M.norm()});
    rep.pass = rep.stationarity_residual <= 10.0 * tol * rep.scale && rep.subgradient_norm <= 1.0 + 10.0 * tol;
    return rep;
  }

  // PSD case: S = M - R_alpha^*(eta) must equal P2 Lambda P2^H with Lambda PSD.
  Mat P2 = U2;
  auto anti = [&](const Mat& S) { return Mat(S - P2 * (P2.adjoint() * S * P2) * P2.adjoint()); };
  Mat S = M;
  if (enforce && d1 > 0) {
    RealMat Gm(d1, d1);
    Vec rhs = basis.coeffs_alpha(anti(M));
    for (int l = 0; l < d1; ++l) Gm.col(l) = basis.coeffs_alpha(anti(basis.element(l)));
    Vec eta = RealMat(Gm).completeOrthogonalDecomposition().solve(rhs);
    S = M - basis.synthesize_alpha(eta);
  }
  rep.stationarity_residual = anti(S).norm();
  if (n1 > r) {
    Mat Lam = hermitize(P2.adjoint() * S * P2);
    Eigen::SelfAdjointEigenSolver<Mat> es(Lam);
    rep.multiplier_lambda_min = es.eigenvalues().minCoeff();
  }
  rep.complementarity = std::abs(inner(X_hat, S));
  rep.scale = std::max({1.0, rho, M.norm()});
  double xscale = std::max(1.0, X_hat.norm());
  rep.pass = rep.stationarity_residual <= 10.0 * tol * rep.scale &&
             rep.multiplier_lambda_min >= -10.0 * tol * rep.scale &&
             rep.complementarity <= 10.0 * tol * rep.scale * xscale;
  return rep;
}

}  // namespace rcmc
