#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace rcmc {

using Mat = Eigen::MatrixXcd;
using RealMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using cxd = std::complex<double>;

enum class Field { Real, Complex };
enum class Symmetry { Rectangular, Symmetric };

/// A real inner-product space of matrices: real/complex rectangular,
/// real symmetric or Hermitian (n1 == n2 for the symmetric case).
/// The inner product is <X,Y> = Re(Tr(X^H Y)).
struct MatrixSpace {
  Field field = Field::Real;
  Symmetry symmetry = Symmetry::Rectangular;
  int n1 = 0;
  int n2 = 0;

  MatrixSpace() = default;
  MatrixSpace(Field f, Symmetry s, int rows, int cols) : field(f), symmetry(s), n1(rows), n2(cols) {
    if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("MatrixSpace: dimensions must be positive");
    if (symmetry == Symmetry::Symmetric && n1 != n2)
      throw std::invalid_argument("MatrixSpace: symmetric space requires n1 == n2");
  }

  static MatrixSpace real_rect(int n1, int n2) { return {Field::Real, Symmetry::Rectangular, n1, n2}; }
  static MatrixSpace complex_rect(int n1, int n2) { return {Field::Complex, Symmetry::Rectangular, n1, n2}; }
  static MatrixSpace real_sym(int n) { return {Field::Real, Symmetry::Symmetric, n, n}; }
  static MatrixSpace hermitian(int n) { return {Field::Complex, Symmetry::Symmetric, n, n}; }

  int n() const { return std::min(n1, n2); }
  bool is_symmetric() const { return symmetry == Symmetry::Symmetric; }
  bool is_real() const { return field == Field::Real; }

  /// Real dimension d of the space.
  int dim() const {
    if (symmetry == Symmetry::Symmetric)
      return field == Field::Real ? n1 * (n1 + 1) / 2 : n1 * n1;
    return field == Field::Real ? n1 * n2 : 2 * n1 * n2;
  }

  bool contains_shape(const Mat& X) const { return X.rows() == n1 && X.cols() == n2; }

  void check_member(const Mat& X) const {
    if (!contains_shape(X)) throw std::invalid_argument("matrix shape does not match space");
  }

  Mat zero() const { return Mat::Zero(n1, n2); }

  std::string describe() const;
};

/// <X,Y> = Re(Tr(X^H Y)); real bilinear, positive definite.
inline double inner(const Mat& X, const Mat& Y) {
  return X.conjugate().cwiseProduct(Y).sum().real();
}

inline double fnorm(const Mat& X) { return X.norm(); }

/// Spectral norm via singular values (exact, not a power-method estimate).
double spectral_norm(const Mat& X);

/// Nuclear norm (sum of singular values).
double nuclear_norm(const Mat& X);

/// Symmetrize/hermitize: (X + X^H)/2. Used to clean round-off drift.
inline Mat hermitize(const Mat& X) { return 0.5 * (X + X.adjoint()); }

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace rcmc
