#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>

#include "hinftrack/linalg.hpp"

namespace hinftrack {

namespace {

template <typename T>
std::vector<double> one_sided_jacobi(const BasicMatrix<T>& m, const Tolerances& tol) {
  if (!m.all_finite()) throw NumericalError("singular_values: non-finite entries");
  // Work on the orientation with at least as many rows as columns.
  BasicMatrix<T> w = m.rows() >= m.cols() ? m : m.adjoint();
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  if (cols == 0) return {};
  double total = 0.0;
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t k = 0; k < rows; ++k) total += std::norm(Complex(w(k, j)));
  // Columns below roundoff of the whole matrix cannot be orthogonalized further.
  const double negligible = DBL_EPSILON * DBL_EPSILON * total;

  bool converged = false;
  for (int sweep = 0; sweep < tol.svd_max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0;
        double beta = 0.0;
        T g{};
        for (std::size_t k = 0; k < rows; ++k) {
          alpha += std::norm(Complex(w(k, p)));
          beta += std::norm(Complex(w(k, q)));
          g += detail::conj(w(k, p)) * w(k, q);
        }
        const double gabs = std::abs(g);
        if (gabs == 0.0 || gabs <= DBL_EPSILON * std::sqrt(alpha * beta)) continue;
        if (std::min(alpha, beta) <= negligible) continue;
        converged = false;
        const T phase = g / gabs;
        const double zeta = (beta - alpha) / (2.0 * gabs);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t k = 0; k < rows; ++k) {
          const T xp = w(k, p);
          const T xq = w(k, q) * detail::conj(phase);
          w(k, p) = c * xp - s * xq;
          w(k, q) = s * xp + c * xq;
        }
      }
    }
  }
  if (!converged) throw NumericalError("singular_values: one-sided Jacobi did not converge");

  std::vector<double> sv(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < rows; ++k) s += std::norm(Complex(w(k, j)));
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

template <typename T>
double one_norm(const BasicMatrix<T>& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

template <typename T>
BasicMatrix<T> checked_solve(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                             const Tolerances& tol) {
  if (!a.is_square()) throw DimensionError("solve_linear: coefficient matrix is not square");
  if (a.rows() != b.rows()) throw DimensionError("solve_linear: right-hand side row count differs");
  if (!a.all_finite() || !b.all_finite()) throw NumericalError("solve_linear: non-finite entries");
  LuDecomposition<T> lu(a);
  if (lu.singular() || !(lu.condition_estimate() <= tol.condition_limit)) {
    std::ostringstream os;
    os << "solve_linear: matrix is singular or ill-conditioned (condition estimate "
       << lu.condition_estimate() << ")";
    throw NumericalError(os.str());
  }
  return lu.solve(b);
}

}  // namespace

std::vector<double> singular_values(const CMatrix& m, const Tolerances& tol) {
  return one_sided_jacobi(m, tol);
}

std::vector<double> singular_values(const Matrix& m, const Tolerances& tol) {
  return one_sided_jacobi(m, tol);
}

double sv_max(const Matrix& m, const Tolerances& tol) {
  const auto sv = singular_values(m, tol);
  return sv.empty() ? 0.0 : sv.front();
}

double sv_max(const CMatrix& m, const Tolerances& tol) {
  const auto sv = singular_values(m, tol);
  return sv.empty() ? 0.0 : sv.front();
}

template <typename T>
LuDecomposition<T>::LuDecomposition(BasicMatrix<T> a) : lu_(std::move(a)) {
  const std::size_t n = lu_.rows();
  perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  const double anorm = one_norm(lu_);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        piv = i;
      }
    }
    if (best == 0.0) {
      singular_ = true;
      condition_ = std::numeric_limits<double>::infinity();
      return;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
      sign_ = -sign_;
    }
    const T pivot = lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const T f = lu_(i, k) / pivot;
      lu_(i, k) = f;
      if (f == T{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
  const BasicMatrix<T> inv = solve(BasicMatrix<T>::identity(n));
  condition_ = n == 0 ? 1.0 : anorm * one_norm(inv);
  if (!std::isfinite(condition_)) condition_ = std::numeric_limits<double>::infinity();
}

template <typename T>
BasicMatrix<T> LuDecomposition<T>::solve(const BasicMatrix<T>& b) const {
  const std::size_t n = lu_.rows();
  if (b.rows() != n) throw DimensionError("LU solve: right-hand side row count differs");
  if (singular_) throw NumericalError("LU solve: matrix is singular");
  BasicMatrix<T> x(n, b.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) x(i, j) = b(perm_[i], j);
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      T s = x(i, j);
      for (std::size_t k = 0; k < i; ++k) s -= lu_(i, k) * x(k, j);
      x(i, j) = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      T s = x(ii, j);
      for (std::size_t k = ii + 1; k < n; ++k) s -= lu_(ii, k) * x(k, j);
      x(ii, j) = s / lu_(ii, ii);
    }
  }
  return x;
}

template <typename T>
T LuDecomposition<T>::determinant() const {
  if (singular_) return T{};
  T d = static_cast<double>(sign_);
  for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
  return d;
}

template class LuDecomposition<double>;
template class LuDecomposition<Complex>;

Matrix solve_linear(const Matrix& a, const Matrix& b, const Tolerances& tol) {
  return checked_solve(a, b, tol);
}

CMatrix solve_linear(const CMatrix& a, const CMatrix& b, const Tolerances& tol) {
  return checked_solve(a, b, tol);
}

Matrix inverse(const Matrix& a, const Tolerances& tol) {
  return solve_linear(a, Matrix::identity(a.rows()), tol);
}

std::optional<Matrix> cholesky(const Matrix& a) {
  if (!a.is_square()) throw DimensionError("cholesky: matrix is not square");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.5 * (a(i, j) + a(j, i));
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

}  // namespace hinftrack
