#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "hinftrack/linalg.hpp"

namespace hinftrack {

std::vector<double> Spectrum::real_values() const {
  std::vector<double> out;
  out.reserve(eigenvalues.size());
  for (const auto& z : eigenvalues) out.push_back(z.real());
  return out;
}

double Spectrum::max_magnitude() const {
  double r = 0.0;
  for (const auto& z : eigenvalues) r = std::max(r, std::abs(z));
  return r;
}

namespace {

void require_square_finite(const Matrix& m, const char* who) {
  if (!m.is_square()) {
    throw DimensionError(std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
  if (!m.all_finite()) throw NumericalError(std::string(who) + ": non-finite entries");
}

}  // namespace

SymmetricEigen eig_sym_decompose(const Matrix& m, const Tolerances& tol) {
  require_square_finite(m, "eig_sym");
  const std::size_t n = m.rows();
  const double scale = m.max_abs();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol.symmetry * std::max(scale, 1.0)) {
        throw ModelError("eig_sym: matrix is not symmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
      a(i, j) = 0.5 * (m(i, j) + m(j, i));
    }
  }
  Matrix v = Matrix::identity(n);

  const double frob = a.frobenius_norm();
  bool converged = n <= 1 || frob == 0.0;
  for (int sweep = 0; sweep < tol.jacobi_max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= DBL_EPSILON * 1e-2 * frob) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Skip rotations that cannot change either diagonal entry.
        if (sweep > 3 && std::abs(apq) * 1e2 * DBL_EPSILON < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) > 1e-13 * frob) {
      throw NumericalError("eig_sym: Jacobi iteration did not converge");
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

Spectrum eig_sym(const Matrix& m, const Tolerances& tol) {
  const auto dec = eig_sym_decompose(m, tol);
  Spectrum s;
  s.is_real_symmetric_source = true;
  s.eigenvalues.assign(dec.values.begin(), dec.values.end());
  return s;
}

double lambda_max(const Matrix& m, const Tolerances& tol) {
  const auto dec = eig_sym_decompose(m, tol);
  return dec.values.empty() ? 0.0 : dec.values.back();
}

double lambda_min(const Matrix& m, const Tolerances& tol) {
  const auto dec = eig_sym_decompose(m, tol);
  return dec.values.empty() ? 0.0 : dec.values.front();
}

namespace {

// 1-based square work array; keeps the classical Hessenberg/QR recurrences
// readable.
class Work {
 public:
  explicit Work(const Matrix& m) : n_(m.rows()), d_((n_ + 1) * (n_ + 1), 0.0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) (*this)(i + 1, j + 1) = m(i, j);
  }
  double& operator()(std::size_t i, std::size_t j) { return d_[i * (n_ + 1) + j]; }
  std::size_t n() const { return n_; }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

void balance(Work& a) {
  constexpr double kRadix = 2.0;
  constexpr double kSqrdx = kRadix * kRadix;
  const std::size_t n = a.n();
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 1; i <= n; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      }
      if (c != 0.0 && r != 0.0) {
        double g = r / kRadix;
        double f = 1.0;
        const double s = c + r;
        while (c < g) {
          f *= kRadix;
          c *= kSqrdx;
        }
        g = r * kRadix;
        while (c > g) {
          f /= kRadix;
          c /= kSqrdx;
        }
        if ((c + r) / f < 0.95 * s) {
          done = false;
          g = 1.0 / f;
          for (std::size_t j = 1; j <= n; ++j) a(i, j) *= g;
          for (std::size_t j = 1; j <= n; ++j) a(j, i) *= f;
        }
      }
    }
  }
}

// Reduction to upper Hessenberg form by stabilized elementary similarity
// transformations.
void hessenberg(Work& a) {
  const std::size_t n = a.n();
  for (std::size_t m = 2; m < n; ++m) {
    double x = 0.0;
    std::size_t i = m;
    for (std::size_t j = m; j <= n; ++j) {
      if (std::abs(a(j, m - 1)) > std::abs(x)) {
        x = a(j, m - 1);
        i = j;
      }
    }
    if (i != m) {
      for (std::size_t j = m - 1; j <= n; ++j) std::swap(a(i, j), a(m, j));
      for (std::size_t j = 1; j <= n; ++j) std::swap(a(j, i), a(j, m));
    }
    if (x != 0.0) {
      for (i = m + 1; i <= n; ++i) {
        double y = a(i, m - 1);
        if (y != 0.0) {
          y /= x;
          a(i, m - 1) = y;
          for (std::size_t j = m; j <= n; ++j) a(i, j) -= y * a(m, j);
          for (std::size_t j = 1; j <= n; ++j) a(j, m) += y * a(j, i);
        }
      }
    }
  }
  // Discard the stored multipliers below the subdiagonal.
  for (std::size_t i = 3; i <= n; ++i)
    for (std::size_t j = 1; j + 1 < i; ++j) a(i, j) = 0.0;
}

double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
void hessenberg_qr(Work& a, std::vector<double>& wr, std::vector<double>& wi, int max_its) {
  const int n = static_cast<int>(a.n());
  wr.assign(n + 1, 0.0);
  wi.assign(n + 1, 0.0);
  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a(i, j));

  int nn = n;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;
  while (nn >= 1) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= DBL_EPSILON * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn--] = 0.0;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -(wi[nn] = z);
          }
          nn -= 2;
        } else {
          if (its == max_its) {
            throw NumericalError("eig_general: QR iteration did not converge");
          }
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            t += x;
            for (int i = 1; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= DBL_EPSILON * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
}

}  // namespace

Spectrum eig_general(const Matrix& m, const Tolerances& tol) {
  require_square_finite(m, "eig_general");
  Spectrum out;
  const std::size_t n = m.rows();
  if (n == 0) return out;
  if (n == 1) {
    out.eigenvalues = {Complex(m(0, 0), 0.0)};
    return out;
  }
  Work a(m);
  balance(a);
  hessenberg(a);
  std::vector<double> wr, wi;
  hessenberg_qr(a, wr, wi, tol.qr_max_iterations_per_eig);
  out.eigenvalues.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    if (!std::isfinite(wr[i]) || !std::isfinite(wi[i])) {
      throw NumericalError("eig_general: non-finite eigenvalue");
    }
    out.eigenvalues.emplace_back(wr[i], wi[i]);
  }
  // Conjugate pairs: positive imaginary part first.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (out.eigenvalues[i].imag() < 0.0 && out.eigenvalues[i + 1].imag() > 0.0 &&
        out.eigenvalues[i + 1] == std::conj(out.eigenvalues[i])) {
      std::swap(out.eigenvalues[i], out.eigenvalues[i + 1]);
      ++i;
    }
  }
  return out;
}

double spectral_radius(const Matrix& m, const Tolerances& tol) {
  return eig_general(m, tol).max_magnitude();
}

}  // namespace hinftrack
