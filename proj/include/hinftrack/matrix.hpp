#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "hinftrack/error.hpp"
#include "hinftrack/simd.hpp"

namespace hinftrack {

using Complex = std::complex<double>;

namespace detail {
template <typename T>
inline double magnitude(const T& v) {
  return std::abs(v);
}
template <typename T>
inline bool finite(const T& v) {
  if constexpr (std::is_same_v<T, Complex>) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  } else {
    return std::isfinite(v);
  }
}
template <typename T>
inline T conj(const T& v) {
  if constexpr (std::is_same_v<T, Complex>) {
    return std::conj(v);
  } else {
    return v;
  }
}
}  // namespace detail

/// Dense row-major matrix over double or std::complex<double>.
template <typename T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Nested braces, one inner list per row.
  BasicMatrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static BasicMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static BasicMatrix column(std::span<const T> v) {
    BasicMatrix m(v.size(), 1);
    std::copy(v.begin(), v.end(), m.data_.begin());
    return m;
  }
  static BasicMatrix column(std::initializer_list<T> v) {
    return column(std::span<const T>(v.begin(), v.size()));
  }

  static BasicMatrix diagonal(std::span<const T> v) {
    BasicMatrix m(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m(i, i) = v[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  // Flat access, convenient for column vectors.
  T& operator[](std::size_t k) { return data_[k]; }
  const T& operator[](std::size_t k) const { return data_[k]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  BasicMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) {
      throw DimensionError("block out of range");
    }
    BasicMatrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
      std::copy_n(data_.begin() + (r0 + i) * cols_ + c0, nc, out.data_.begin() + i * nc);
    }
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const BasicMatrix& b) {
    if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_) {
      throw DimensionError("set_block out of range");
    }
    for (std::size_t i = 0; i < b.rows_; ++i) {
      std::copy_n(b.data_.begin() + i * b.cols_, b.cols_, data_.begin() + (r0 + i) * cols_ + c0);
    }
  }

  BasicMatrix transpose() const {
    BasicMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  // Conjugate transpose; identical to transpose() for real matrices.
  BasicMatrix adjoint() const {
    BasicMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = detail::conj((*this)(i, j));
    return t;
  }

  BasicMatrix& operator+=(const BasicMatrix& o) {
    require_same_shape(o, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  BasicMatrix& operator-=(const BasicMatrix& o) {
    require_same_shape(o, "-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  BasicMatrix& operator*=(T s) {
    if constexpr (std::is_same_v<T, double>) {
      simd::scale(s, data_);
    } else {
      for (auto& v : data_) v *= s;
    }
    return *this;
  }

  BasicMatrix operator-() const {
    BasicMatrix r(*this);
    for (auto& v : r.data_) v = -v;
    return r;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, detail::magnitude(v));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(Complex(v));
    return std::sqrt(s);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const T& v) { return detail::finite(v); });
  }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  void require_same_shape(const BasicMatrix& o, const char* what) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw DimensionError(std::string("shape mismatch in ") + what);
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using CMatrix = BasicMatrix<Complex>;

template <typename T>
BasicMatrix<T> operator+(BasicMatrix<T> a, const BasicMatrix<T>& b) {
  a += b;
  return a;
}
template <typename T>
BasicMatrix<T> operator-(BasicMatrix<T> a, const BasicMatrix<T>& b) {
  a -= b;
  return a;
}
template <typename T>
BasicMatrix<T> operator*(BasicMatrix<T> a, T s) {
  a *= s;
  return a;
}
template <typename T>
BasicMatrix<T> operator*(T s, BasicMatrix<T> a) {
  a *= s;
  return a;
}

Matrix operator*(const Matrix& a, const Matrix& b);
CMatrix operator*(const CMatrix& a, const CMatrix& b);

CMatrix to_complex(const Matrix& m);

/// Kronecker product; result is (a.rows·b.rows) × (a.cols·b.cols).
Matrix kron(const Matrix& a, const Matrix& b);

/// Vertically stack blocks that share a column count.
Matrix vstack(std::initializer_list<const Matrix*> blocks);
/// Horizontally stack blocks that share a row count.
Matrix hstack(std::initializer_list<const Matrix*> blocks);

double trace(const Matrix& m);

/// 2-norm of the flattened entries of a column (or any) matrix.
inline double norm2(const Matrix& v) { return v.frobenius_norm(); }

std::string to_string(const Matrix& m, int precision = 6);

}  // namespace hinftrack
