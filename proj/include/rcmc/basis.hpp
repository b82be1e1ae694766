#pragma once

#include "rcmc/types.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace rcmc {

enum class BasisKind { CorrelationEntrywise, Pauli, RectangularEntrywise };

/// Compact descriptor of one orthonormal basis element.
///   Diag    : e_i e_i^T                       (symmetric spaces)
///   SymRe   : (e_i e_j^T + e_j e_i^T)/sqrt(2), i < j
///   SymIm   : (sqrt(-1)/sqrt(2))(e_i e_j^T - e_j e_i^T), i < j (Hermitian only)
///   RectRe  : e_i e_j^T
///   RectIm  : sqrt(-1) e_i e_j^T              (complex rectangular only)
///   PauliWord: (1/sqrt(n)) sigma_{s_1} x ... x sigma_{s_l}; `i` holds the
///              base-4 word code (digit 0 = first Kronecker factor = MSB pair)
struct BasisElement {
  enum class Tag : std::uint8_t { Diag, SymRe, SymIm, RectRe, RectIm, PauliWord };
  Tag tag;
  int i = 0;
  int j = 0;
};

/// Which coefficients are fixed (the alpha set), described in terms of the
/// construction: matrix entries for the entrywise bases, the identity-word
/// coefficient (the trace) for the Pauli basis.
struct FixedPattern {
  std::vector<std::pair<int, int>> entries;  // (i,j); i == j fixes a diagonal
  bool trace_only = false;

  static FixedPattern none() { return {}; }
  static FixedPattern trace() {
    FixedPattern p;
    p.trace_only = true;
    return p;
  }
  static FixedPattern all_diagonal(int n) {
    FixedPattern p;
    p.entries.reserve(n);
    for (int i = 0; i < n; ++i) p.entries.emplace_back(i, i);
    return p;
  }
  static FixedPattern of_entries(std::vector<std::pair<int, int>> e) {
    FixedPattern p;
    p.entries = std::move(e);
    return p;
  }
};

/// A coefficient vector together with the index set it was taken over.
struct CoefficientVector {
  Vec values;
  std::vector<int> index_set;
};

/// An orthonormal basis {Theta_1..Theta_d} of a matrix space with the
/// fixed/free index split. Global indices are ordered alpha first (in the
/// fixed pattern's declaration order), then beta in canonical row-major
/// order. Immutable after construction; basis elements are never stored as
/// dense matrices -- coefficients and synthesis run structurally.
class BasisSystem {
 public:
  BasisSystem(MatrixSpace space, BasisKind kind, const FixedPattern& pattern);

  const MatrixSpace& space() const { return space_; }
  BasisKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(elements_.size()); }
  int d1() const { return d1_; }
  int d2() const { return dim() - d1_; }
  bool in_alpha(int k) const { return k < d1_; }

  const BasisElement& descriptor(int k) const { return elements_[static_cast<size_t>(k)]; }

  /// <Theta_k, X>.
  double coeff(const Mat& X, int k) const;

  /// X += v * Theta_k.
  void axpy(double v, int k, Mat& X) const;

  /// Materialize Theta_k (one element only; O(n^2) memory).
  Mat element(int k) const;

  /// R_pi(X): coefficients over an index set, in the set's order.
  Vec coeffs(const Mat& X, std::span<const int> pi) const;
  CoefficientVector coeffs_cv(const Mat& X, std::span<const int> pi) const;
  Vec coeffs_alpha(const Mat& X) const;
  Vec coeffs_beta(const Mat& X) const;
  /// All d coefficients, in global index order (fast transform for Pauli).
  Vec coeffs_all(const Mat& X) const;

  /// R_pi^*(v) = sum_k v_k Theta_k.
  Mat synthesize(std::span<const int> pi, const Vec& v) const;
  Mat synthesize(const CoefficientVector& v) const;
  Mat synthesize_alpha(const Vec& v) const;
  Mat synthesize_all(const Vec& v) const;

  /// P_pi = R_pi^* R_pi.
  Mat project(const Mat& X, std::span<const int> pi) const;
  Mat project_alpha(const Mat& X) const;
  Mat project_beta(const Mat& X) const;

  /// Q_beta (dagger=false) and Q_beta^dagger (dagger=true) of Eq-style
  /// weighted projections; p is a probability vector over global indices
  /// (zero on alpha, positive on beta, summing to one).
  Mat q_beta(const Vec& p, const Mat& X, bool dagger) const;

  /// Diagonals of sum_k p_k Theta_k Theta_k^H and sum_k p_k Theta_k^H Theta_k
  /// over beta (both sums are diagonal for every supported element type).
  void second_moment_diagonals(const Vec& p, Vec& row_load, Vec& col_load) const;

  std::vector<int> alpha_indices() const;
  std::vector<int> beta_indices() const;

  /// Gram matrix of all elements (test utility; guarded to n <= 64).
  RealMat gram() const;

 private:
  void validate_probability(const Vec& p) const;

  MatrixSpace space_;
  BasisKind kind_;
  std::vector<BasisElement> elements_;
  int d1_ = 0;
  int pauli_l_ = 0;
};

using BasisPtr = std::shared_ptr<const BasisSystem>;

/// Construct one of the paper-style bases. `kind` must be consistent with the
/// space (correlation: symmetric space; pauli: Hermitian with n a power of
/// two; rectangular: rectangular space) and the pattern with the kind.
BasisPtr make_basis(const MatrixSpace& space, BasisKind kind, const FixedPattern& pattern);

}  // namespace rcmc
