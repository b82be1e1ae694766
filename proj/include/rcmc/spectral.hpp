#pragma once

#include "rcmc/types.hpp"

#include <optional>
#include <variant>

namespace rcmc {

/// Ordered spectral system of a matrix. Rectangular: X = U Diag(sigma) V^H
/// with sigma nonincreasing and U, V square unitary. Symmetric/Hermitian:
/// eigenvalues ordered by |lambda_1| >= ... >= |lambda_n| with sign vector s,
/// sigma_i = |lambda_i|, U = P and V = P Diag(s), so the rectangular formula
/// X = U Diag(sigma) V^H covers both cases.
struct SpectralDecomposition {
  Vec sigma;  // length n = min(n1, n2), nonincreasing, nonnegative
  Mat U;      // n1 x n1
  Mat V;      // n2 x n2
  bool symmetric = false;
  Vec lambda;  // symmetric case only: |.|-ordered eigenvalues
  Vec s;       // symmetric case only: signs (+1 for lambda >= 0)

  const Mat& P() const { return U; }
  Mat reconstruct() const;
};

/// Decompose with deterministic ordering. For symmetric inputs, eigenvalue
/// ties in |lambda| put the positive value first, then the original index.
SpectralDecomposition decompose(const Mat& X, bool symmetric);

/// Infers symmetry from near-equality with the adjoint.
SpectralDecomposition decompose(const Mat& X);

struct PhiParams {
  double tau = 2.0;
  double eps = 0.02;
};

/// The rank-correction function family: zero, known-rank(r), or the scalar
/// phi family with parameters (tau, eps).
struct RankCorrectionFn {
  struct Zero {};
  struct KnownRank {
    int r;
  };
  std::variant<Zero, KnownRank, PhiParams> kind;

  static RankCorrectionFn zero() { return {Zero{}}; }
  static RankCorrectionFn known_rank(int r);
  static RankCorrectionFn phi_family(double tau, double eps);

  bool is_zero() const { return std::holds_alternative<Zero>(kind); }
  bool is_known_rank() const { return std::holds_alternative<KnownRank>(kind); }
  bool is_phi() const { return std::holds_alternative<PhiParams>(kind); }
};

/// phi(t) = sgn(t) (1+eps^tau) |t|^tau / (|t|^tau + eps^tau).
double phi(double t, double tau, double eps);

/// f_i = phi(sigma_i / sigma_1); f(0) = 0 (sigma_1 below 1e-14 counts as 0).
Vec f_vector(const Vec& sigma, const RankCorrectionFn& fn);

/// Spectral operator F(X) = U Diag(f(sigma(X))) V^H. Rejects the known-rank
/// variant (that one is `known_rank_correction`).
Mat apply_spectral(const Mat& X, const RankCorrectionFn& fn, bool symmetric);
Mat apply_spectral(const Mat& X, const RankCorrectionFn& fn);

/// Same, from an already-computed decomposition (also used to check that the
/// operator does not depend on the decomposition choice).
Mat apply_spectral(const SpectralDecomposition& dec, const RankCorrectionFn& fn);

/// F(X) = U_1 V_1^H over the leading r singular triplets; requires a spectral
/// gap at r (relative gap below 1e-10 is an error).
Mat known_rank_correction(const Mat& X, int r, bool symmetric);
Mat known_rank_correction(const Mat& X, int r);

/// G = F(X_tilde) + gamma_m X_tilde plus the pieces of the objective that the
/// solver needs (the F(X_tilde) part alone and ||X_tilde||_F^2).
struct CorrectionMatrix {
  Mat G;
  double gamma = 0.0;
  double xtilde_sqnorm = 0.0;

  static CorrectionMatrix none(const MatrixSpace& space);
  static CorrectionMatrix build(const Mat& f_of_xtilde, const Mat& x_tilde, double gamma);
};

/// #{sigma_i > tol * sigma_1}.
int numerical_rank(const Vec& sigma, double rel_tol);

}  // namespace rcmc
