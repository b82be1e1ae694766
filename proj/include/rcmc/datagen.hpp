#pragma once

#include "rcmc/basis.hpp"
#include "rcmc/rng.hpp"
#include "rcmc/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace rcmc {

enum class GenKind { Correlation, Covariance, Density };

std::string to_string(GenKind kind);
GenKind gen_kind_from_string(const std::string& s);

/// Synthetic ground-truth recipe: a Gaussian factor M (n x r), the first k
/// columns scaled by `weight`, then M M^H normalized per kind (unit diagonal
/// for correlation, trace one for density, as-is for covariance).
struct GenSpec {
  GenKind kind = GenKind::Correlation;
  int n = 100;
  int r = 5;
  int k = 1;
  double weight = 5.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  Mat Xbar;
  int r = 0;
  GenKind kind = GenKind::Correlation;
};

GroundTruth gen_truth(const GenSpec& spec);

/// ||X - Xbar||_F / max(1e-8, ||Xbar||_F).
double relerr(const Mat& X, const Mat& Xbar);

/// Squared fidelity ||Xhat^{1/2} Xbar^{1/2}||_*^2 between PSD matrices.
/// Eigenvalues in [-1e-9, 0) are clipped to zero; anything lower is an error.
double fidelity(const Mat& Xhat, const Mat& Xbar);

/// Random alpha pattern: diag_count diagonal entries plus offdiag_count
/// off-diagonal positions, deterministic per seed. Density supports only the
/// trace (counts must be zero).
FixedPattern pattern_fix(GenKind kind, int n, int diag_count, int offdiag_count, std::uint64_t seed);

/// Ground-truth dump: CSV matrix (re/im pair for complex) plus a JSON
/// metadata sidecar.
void write_truth(const std::string& path_prefix, const GroundTruth& truth, const GenSpec& spec);

}  // namespace rcmc
