#pragma once

#include <optional>
#include <vector>

#include "hinftrack/matrix.hpp"
#include "hinftrack/tolerances.hpp"

namespace hinftrack {

/// Eigenvalues of a square matrix.
struct Spectrum {
  std::vector<Complex> eigenvalues;
  bool is_real_symmetric_source = false;

  std::size_t size() const { return eigenvalues.size(); }
  /// Real parts, in stored order. Meaningful when the source was symmetric.
  std::vector<double> real_values() const;
  double max_magnitude() const;
};

/// Eigenvalues and orthonormal eigenvectors (columns of `vectors`) of a
/// symmetric matrix, eigenvalues ascending.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations. The input is
/// symmetrized by averaging; asymmetry above `tol.symmetry` (relative to the
/// largest entry) is rejected.
SymmetricEigen eig_sym_decompose(const Matrix& m, const Tolerances& tol = default_tolerances());

/// Ascending real eigenvalues of a symmetric matrix.
Spectrum eig_sym(const Matrix& m, const Tolerances& tol = default_tolerances());

/// Eigenvalues of a general real matrix (balancing, Hessenberg reduction,
/// Francis double-shift QR). Complex pairs are stored adjacently, positive
/// imaginary part first. Throws NumericalError on non-convergence.
Spectrum eig_general(const Matrix& m, const Tolerances& tol = default_tolerances());

double spectral_radius(const Matrix& m, const Tolerances& tol = default_tolerances());

/// Singular values, descending, by one-sided Jacobi. Accurate in the relative
/// sense for each singular value on well-scaled inputs.
std::vector<double> singular_values(const CMatrix& m, const Tolerances& tol = default_tolerances());
std::vector<double> singular_values(const Matrix& m, const Tolerances& tol = default_tolerances());

double sv_max(const Matrix& m, const Tolerances& tol = default_tolerances());
double sv_max(const CMatrix& m, const Tolerances& tol = default_tolerances());

/// LU factorization with partial pivoting.
template <typename T>
class LuDecomposition {
 public:
  explicit LuDecomposition(BasicMatrix<T> a);

  /// 1-norm condition number, computed from the explicit inverse (the
  /// matrices handled here are small). Infinity for exactly singular input.
  double condition_estimate() const { return condition_; }
  bool singular() const { return singular_; }
  BasicMatrix<T> solve(const BasicMatrix<T>& b) const;
  T determinant() const;

 private:
  BasicMatrix<T> lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
  double condition_ = 0.0;
};

/// Solve A·X = B. Throws NumericalError (message carries the condition
/// estimate) when A is singular or worse conditioned than `tol.condition_limit`.
Matrix solve_linear(const Matrix& a, const Matrix& b, const Tolerances& tol = default_tolerances());
CMatrix solve_linear(const CMatrix& a, const CMatrix& b, const Tolerances& tol = default_tolerances());

Matrix inverse(const Matrix& a, const Tolerances& tol = default_tolerances());

/// Lower Cholesky factor of a symmetric positive definite matrix, or nullopt
/// if the factorization breaks down.
std::optional<Matrix> cholesky(const Matrix& a);

/// Largest and smallest eigenvalue of a symmetric matrix.
double lambda_max(const Matrix& m, const Tolerances& tol = default_tolerances());
double lambda_min(const Matrix& m, const Tolerances& tol = default_tolerances());

}  // namespace hinftrack
