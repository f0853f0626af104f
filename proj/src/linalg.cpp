#include "kh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace kh::linalg {

namespace {

double sign_of(double magnitude, double sign_source) {
  return sign_source >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

void require_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << who << ": expected a square matrix, got " << a.rows() << "x"
        << a.cols();
    throw DimensionError(msg.str());
  }
}

// Scales rows and columns by powers of two so that their norms are
// comparable; a similarity transform, eigenvalues are unchanged.
void balance(Matrix& a) {
  constexpr double radix = 2.0;
  constexpr double radix_sq = radix * radix;
  const std::size_t n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix_sq;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix_sq;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        const double inv = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= inv;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

// Solves (A - shift I) x = b in place by LU with partial pivoting. Exactly
// singular pivots are replaced by `tiny`, which is what inverse iteration
// wants.
void shifted_solve(const Matrix& a, std::complex<double> shift, double tiny,
                   std::vector<std::complex<double>>& b) {
  const std::size_t n = a.rows();
  ComplexMatrix lu(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) lu(i, j) = a(i, j);
  for (std::size_t i = 0; i < n; ++i) lu(i, i) -= shift;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      std::swap(b[k], b[piv]);
    }
    if (std::abs(lu(k, k)) < tiny) lu(k, k) = tiny;
    for (std::size_t i = k + 1; i < n; ++i) {
      const auto factor = lu(i, k) / lu(k, k);
      if (factor == std::complex<double>{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= factor * lu(k, j);
      b[i] -= factor * b[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    auto sum = b[k];
    for (std::size_t j = k + 1; j < n; ++j) sum -= lu(k, j) * b[j];
    b[k] = sum / lu(k, k);
  }
}

void normalize_phase(std::span<std::complex<double>> v) {
  double norm_sq = 0.0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    norm_sq += std::norm(v[i]);
    if (std::abs(v[i]) > std::abs(v[largest])) largest = i;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm == 0.0) return;
  const auto phase = std::abs(v[largest]) / v[largest];
  for (auto& x : v) x = x * phase / norm;
}

}  // namespace

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("multiply: inner dimensions do not agree");
  Matrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto out = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      const auto ak = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i) out[i] += ak[i] * bkj;
    }
  }
  return c;
}

ComplexMatrix multiply(const Matrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("multiply: inner dimensions do not agree");
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto out = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const auto bkj = b(k, j);
      const auto ak = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i) out[i] += ak[i] * bkj;
    }
  }
  return c;
}

Matrix transpose_multiply(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw DimensionError("transpose_multiply: row counts do not agree");
  Matrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    const auto bj = b.col(j);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const auto ai = a.col(i);
      c(i, j) = std::inner_product(ai.begin(), ai.end(), bj.begin(), 0.0);
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& x : a.data()) s += std::norm(x);
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

SymmetricEigen sym_eig(const Matrix& c, int max_sweeps) {
  require_square(c, "sym_eig");
  const std::size_t n = c.rows();
  const double scale = max_abs(c);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i)
      if (std::abs(c(i, j) - c(j, i)) > 1e-10 * scale)
        throw ContractError("sym_eig: input is not symmetric at (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");

  Matrix a = c;
  Matrix v = Matrix::identity(n);
  SymmetricEigen out;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < j; ++i) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  const double tol = std::numeric_limits<double>::epsilon() *
                     std::max(frobenius_norm(a), std::numeric_limits<double>::min());
  int sweep = 0;
  for (; sweep < max_sweeps && off_norm() > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = sign_of(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = cs * akp - sn * akq;
          a(k, q) = sn * akp + cs * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = cs * apk - sn * aqk;
          a(q, k) = sn * apk + cs * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = cs * vkp - sn * vkq;
          v(k, q) = sn * vkp + cs * vkq;
        }
      }
    }
  }
  if (off_norm() > tol)
    throw NumericalError("sym_eig: Jacobi iteration did not converge in " +
                         std::to_string(max_sweeps) + " sweeps (off-diagonal norm " +
                         std::to_string(off_norm()) + ")");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x) > a(y, y);
  });

  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    const auto src = v.col(order[k]);
    auto dst = out.vectors.col(k);
    std::size_t largest = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(src[i]) > std::abs(src[largest])) largest = i;
    const double flip = src[largest] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) dst[i] = flip * src[i];
  }
  out.sweeps = sweep;
  return out;
}

QrFactors qr_economy(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  if (m < k) {
    std::ostringstream msg;
    msg << "qr_economy: need rows >= cols, got " << m << "x" << k;
    throw DimensionError(msg.str());
  }

  Matrix work = a;
  // Householder vectors live below the diagonal of `work` with the leading
  // entry stored separately; beta_j = 2 / (v^T v).
  std::vector<double> lead(k, 0.0);
  std::vector<double> beta(k, 0.0);
  std::vector<double> diag(k, 0.0);

  for (std::size_t j = 0; j < k; ++j) {
    auto x = work.col(j).subspan(j);
    double norm_sq = 0.0;
    for (double xi : x) norm_sq += xi * xi;
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) {
      diag[j] = 0.0;
      continue;
    }
    const double alpha = -sign_of(norm, x[0]);
    const double v0 = x[0] - alpha;
    const double vtv = norm_sq - x[0] * x[0] + v0 * v0;
    lead[j] = v0;
    beta[j] = vtv > 0.0 ? 2.0 / vtv : 0.0;
    diag[j] = alpha;
    x[0] = v0;

    for (std::size_t c = j + 1; c < k; ++c) {
      auto y = work.col(c).subspan(j);
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      const double f = beta[j] * dot;
      for (std::size_t i = 0; i < x.size(); ++i) y[i] -= f * x[i];
    }
  }

  QrFactors out{Matrix(m, k), Matrix(k, k)};
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < j; ++i) out.r(i, j) = work(i, j);
    out.r(j, j) = diag[j];
  }

  // Q = H_0 H_1 ... H_{k-1} applied to the first k columns of I.
  for (std::size_t c = 0; c < k; ++c) out.q(c, c) = 1.0;
  for (std::size_t j = k; j-- > 0;) {
    if (beta[j] == 0.0) continue;
    const auto v = work.col(j).subspan(j);
    for (std::size_t c = j; c < k; ++c) {
      auto y = out.q.col(c).subspan(j);
      double dot = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * y[i];
      const double f = beta[j] * dot;
      for (std::size_t i = 0; i < v.size(); ++i) y[i] -= f * v[i];
    }
  }

  for (std::size_t j = 0; j < k; ++j) {
    if (out.r(j, j) >= 0.0) continue;
    for (std::size_t c = j; c < k; ++c) out.r(j, c) = -out.r(j, c);
    for (double& q : out.q.col(j)) q = -q;
  }
  return out;
}

Matrix tri_solve(const Matrix& r, const Matrix& b, double rank_tol) {
  require_square(r, "tri_solve");
  const std::size_t n = r.rows();
  if (b.rows() != n)
    throw DimensionError("tri_solve: right-hand side has " +
                         std::to_string(b.rows()) + " rows, expected " +
                         std::to_string(n));
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(r(i, i)));
  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::abs(r(i, i)) > rank_tol * max_diag) || max_diag == 0.0) {
      std::ostringstream msg;
      msg << "tri_solve: pivot " << i << " is " << r(i, i)
          << ", below rank tolerance " << rank_tol << " * " << max_diag;
      throw SingularMatrixError(msg.str(), i);
    }
  }

  Matrix x = b;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    auto col = x.col(c);
    for (std::size_t i = n; i-- > 0;) {
      double s = col[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= r(i, j) * col[j];
      col[i] = s / r(i, i);
    }
  }
  return x;
}

Matrix hessenberg(const Matrix& a) {
  require_square(a, "hessenberg");
  const std::size_t n = a.rows();
  Matrix h = a;
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double norm_sq = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) norm_sq += h(i, k) * h(i, k);
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) continue;
    const double x0 = h(k + 1, k);
    const double alpha = -sign_of(norm, x0);
    std::fill(v.begin(), v.end(), 0.0);
    v[k + 1] = x0 - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = h(i, k);
    const double vtv = norm_sq - x0 * x0 + v[k + 1] * v[k + 1];
    if (vtv == 0.0) continue;
    const double beta = 2.0 / vtv;

    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) dot += v[i] * h(i, j);
      const double f = beta * dot;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= f * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
      const double f = beta * dot;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= f * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
  return h;
}

std::vector<std::complex<double>> hessenberg_qr_eigenvalues(Matrix h) {
  require_square(h, "hessenberg_qr_eigenvalues");
  const int n = static_cast<int>(h.rows());
  std::vector<double> wr(n + 1, 0.0);
  std::vector<double> wi(n + 1, 0.0);
  // 1-based view keeps the classic index arithmetic of the algorithm intact.
  auto a = [&h](int i, int j) -> double& { return h(i - 1, j - 1); };

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
        if (std::abs(a(l, l - 1)) + s == s) {
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
            wi[nn - 1] = z;
            wi[nn] = -z;
          }
          nn -= 2;
        } else {
          if (its == kMaxQrIterations)
            throw NumericalError(
                "hessenberg_qr_eigenvalues: no convergence after " +
                std::to_string(kMaxQrIterations) + " iterations on eigenvalue " +
                std::to_string(nn - 1) + " of " + std::to_string(n));
          if (its > 0 && its % 10 == 0) {
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
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                            std::abs(a(m + 1, m + 1)));
            if (u + v == v) break;
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

  std::vector<std::complex<double>> out(n);
  for (int i = 0; i < n; ++i) out[i] = {wr[i + 1], wi[i + 1]};
  return out;
}

ComplexEigenPairs nonsym_eig(const Matrix& a) {
  require_square(a, "nonsym_eig");
  const std::size_t n = a.rows();
  for (double x : a.data())
    if (!std::isfinite(x)) throw NumericalError("nonsym_eig: non-finite input");

  ComplexEigenPairs out;
  if (n == 0) return out;

  Matrix balanced = a;
  balance(balanced);
  out.values = hessenberg_qr_eigenvalues(hessenberg(balanced));

  std::stable_sort(out.values.begin(), out.values.end(),
                   [](const auto& x, const auto& y) {
                     const double mx = std::abs(x);
                     const double my = std::abs(y);
                     if (mx != my) return mx > my;
                     return x.imag() > y.imag();
                   });

  const double fro = frobenius_norm(a);
  const double anorm = fro > 0.0 ? fro : 1.0;
  const double tiny = std::numeric_limits<double>::epsilon() * anorm;
  out.vectors = ComplexMatrix(n, n);

  for (std::size_t k = 0; k < n; ++k) {
    const auto mu = out.values[k];
    if (mu.imag() < 0.0 && k > 0 && out.values[k - 1] == std::conj(mu)) {
      for (std::size_t i = 0; i < n; ++i)
        out.vectors(i, k) = std::conj(out.vectors(i, k - 1));
      continue;
    }
    // Deterministic start vector with no special alignment to any basis.
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i)
      x[i] = 1.0 + 0.5 * std::sin(1.0 + 2.0 * static_cast<double>(i));
    for (int iter = 0; iter < 3; ++iter) {
      shifted_solve(a, mu, tiny, x);
      double norm = 0.0;
      for (const auto& xi : x) norm += std::norm(xi);
      norm = std::sqrt(norm);
      if (!(norm > 0.0) || !std::isfinite(norm))
        throw NumericalError("nonsym_eig: inverse iteration failed for eigenvalue " +
                             std::to_string(k));
      for (auto& xi : x) xi /= norm;
    }
    std::copy(x.begin(), x.end(), out.vectors.col(k).begin());
    normalize_phase(out.vectors.col(k));
  }
  return out;
}

}  // namespace kh::linalg
