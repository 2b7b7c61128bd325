#include "hinftrack/matrix.hpp"

#include <iomanip>
#include <sstream>

namespace hinftrack {

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matrix product: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  simd::gemm(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("complex matrix product: inner dimensions differ");
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const Complex aip = a(i, p);
      if (aip == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aip * b(p, j);
    }
  }
  return c;
}

CMatrix to_complex(const Matrix& m) {
  CMatrix c(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.size(); ++k) c[k] = m[k];
  return c;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t p = 0; p < b.rows(); ++p) {
        for (std::size_t q = 0; q < b.cols(); ++q) {
          k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
      }
    }
  }
  return k;
}

Matrix vstack(std::initializer_list<const Matrix*> blocks) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool first = true;
  for (const Matrix* b : blocks) {
    if (first) {
      cols = b->cols();
      first = false;
    } else if (b->cols() != cols) {
      throw DimensionError("vstack: column counts differ");
    }
    rows += b->rows();
  }
  Matrix out(rows, cols);
  std::size_t r = 0;
  for (const Matrix* b : blocks) {
    out.set_block(r, 0, *b);
    r += b->rows();
  }
  return out;
}

Matrix hstack(std::initializer_list<const Matrix*> blocks) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool first = true;
  for (const Matrix* b : blocks) {
    if (first) {
      rows = b->rows();
      first = false;
    } else if (b->rows() != rows) {
      throw DimensionError("hstack: row counts differ");
    }
    cols += b->cols();
  }
  Matrix out(rows, cols);
  std::size_t c = 0;
  for (const Matrix* b : blocks) {
    out.set_block(0, c, *b);
    c += b->cols();
  }
  return out;
}

double trace(const Matrix& m) {
  if (!m.is_square()) throw DimensionError("trace of non-square matrix");
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

std::string to_string(const Matrix& m, int precision) {
  std::ostringstream os;
  os << std::setprecision(precision);
  os << '[';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) os << "; ";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ", ";
      os << m(i, j);
    }
  }
  os << ']';
  return os.str();
}

}  // namespace hinftrack
