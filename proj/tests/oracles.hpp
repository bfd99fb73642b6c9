#pragma once

// Test-side reference implementations, kept deliberately naive and independent
// of the library's computation paths: plain double-precision loops, a
// two-sided Jacobi eigensolver for Gram-matrix cross-checks, and
// finite-difference gradients of double replicas of the losses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "bear/matrix.hpp"
#include "bear/rng.hpp"

namespace oracles {

using bear::index_t;
using bear::Matrix;

using DMat = std::vector<double>;  // column-major, paired with explicit dims

inline DMat to_double(const Matrix& m) {
  DMat out(static_cast<std::size_t>(m.size()));
  for (index_t i = 0; i < m.size(); ++i) out[static_cast<std::size_t>(i)] = m.data()[i];
  return out;
}

inline double naive_l1(const Matrix& m) {
  double acc = 0.0;
  for (index_t j = 0; j < m.cols(); ++j)
    for (index_t i = 0; i < m.rows(); ++i)
      acc += std::abs(static_cast<double>(m(i, j)));
  return acc;
}

inline double naive_fro(const Matrix& m) {
  double acc = 0.0;
  for (index_t j = 0; j < m.cols(); ++j)
    for (index_t i = 0; i < m.rows(); ++i) {
      const double x = m(i, j);
      acc += x * x;
    }
  return std::sqrt(acc);
}

// c (n x p) = a (n x m) * b (m x p), triple loop in double.
inline DMat naive_matmul(const DMat& a, index_t n, index_t m, const DMat& b,
                         index_t p) {
  DMat c(static_cast<std::size_t>(n) * p, 0.0);
  for (index_t k = 0; k < p; ++k)
    for (index_t j = 0; j < m; ++j) {
      const double bjk = b[static_cast<std::size_t>(k * m + j)];
      for (index_t i = 0; i < n; ++i)
        c[static_cast<std::size_t>(k * n + i)] +=
            a[static_cast<std::size_t>(j * n + i)] * bjk;
    }
  return c;
}

// Eigenvalues of a symmetric q x q matrix by classic two-sided Jacobi,
// descending. Used as the Gram-matrix route to singular values.
inline std::vector<double> sym_eigenvalues(DMat a, index_t q) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (index_t i = 0; i < q; ++i)
      for (index_t j = i + 1; j < q; ++j) {
        const double v = a[static_cast<std::size_t>(j * q + i)];
        off += v * v;
      }
    if (off < 1e-26) break;
    for (index_t i = 0; i < q; ++i)
      for (index_t j = i + 1; j < q; ++j) {
        const double apq = a[static_cast<std::size_t>(j * q + i)];
        if (apq == 0.0) continue;
        const double app = a[static_cast<std::size_t>(i * q + i)];
        const double aqq = a[static_cast<std::size_t>(j * q + j)];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (index_t k = 0; k < q; ++k) {
          const double aki = a[static_cast<std::size_t>(i * q + k)];
          const double akj = a[static_cast<std::size_t>(j * q + k)];
          a[static_cast<std::size_t>(i * q + k)] = c * aki - s * akj;
          a[static_cast<std::size_t>(j * q + k)] = s * aki + c * akj;
        }
        for (index_t k = 0; k < q; ++k) {
          const double aik = a[static_cast<std::size_t>(k * q + i)];
          const double ajk = a[static_cast<std::size_t>(k * q + j)];
          a[static_cast<std::size_t>(k * q + i)] = c * aik - s * ajk;
          a[static_cast<std::size_t>(k * q + j)] = s * aik + c * ajk;
        }
      }
  }
  std::vector<double> eig(static_cast<std::size_t>(q));
  for (index_t i = 0; i < q; ++i) eig[static_cast<std::size_t>(i)] =
      a[static_cast<std::size_t>(i * q + i)];
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

// Singular values of M via eigenvalues of M^T M (independent algebraic route).
inline std::vector<double> gram_singular_values(const Matrix& m) {
  const index_t n = m.rows(), q = m.cols();
  DMat a = to_double(m);
  DMat gram(static_cast<std::size_t>(q) * q, 0.0);
  for (index_t i = 0; i < q; ++i)
    for (index_t j = 0; j < q; ++j) {
      double acc = 0.0;
      for (index_t k = 0; k < n; ++k)
        acc += a[static_cast<std::size_t>(i * n + k)] *
               a[static_cast<std::size_t>(j * n + k)];
      gram[static_cast<std::size_t>(j * q + i)] = acc;
    }
  auto eig = sym_eigenvalues(std::move(gram), q);
  for (auto& e : eig) e = std::sqrt(std::max(e, 0.0));
  return eig;
}

// Double replica of the l1 training loss ||Y - W W^T Y||_1.
inline double l1_loss_ref(const DMat& w, index_t n, index_t r, const DMat& y,
                          index_t b) {
  DMat c(static_cast<std::size_t>(r) * b, 0.0);  // W^T Y
  for (index_t k = 0; k < b; ++k)
    for (index_t j = 0; j < r; ++j) {
      double acc = 0.0;
      for (index_t i = 0; i < n; ++i)
        acc += w[static_cast<std::size_t>(j * n + i)] *
               y[static_cast<std::size_t>(k * n + i)];
      c[static_cast<std::size_t>(k * r + j)] = acc;
    }
  double loss = 0.0;
  for (index_t k = 0; k < b; ++k)
    for (index_t i = 0; i < n; ++i) {
      double l = 0.0;
      for (index_t j = 0; j < r; ++j)
        l += w[static_cast<std::size_t>(j * n + i)] *
             c[static_cast<std::size_t>(k * r + j)];
      loss += std::abs(y[static_cast<std::size_t>(k * n + i)] - l);
    }
  return loss;
}

// Double replica of the cascade loss ||S||_1 + mu ||P - W2 W2^T P||_F^2,
// P = max(S, 0), S = Y - W1 W1^T Y.
inline double cascade_loss_ref(const DMat& w1, index_t r1, const DMat& w2, index_t r2,
                               index_t n, const DMat& y, index_t b, double mu) {
  // S = Y - W1 W1^T Y
  DMat s(static_cast<std::size_t>(n) * b);
  {
    DMat c(static_cast<std::size_t>(r1) * b, 0.0);
    for (index_t k = 0; k < b; ++k)
      for (index_t j = 0; j < r1; ++j) {
        double acc = 0.0;
        for (index_t i = 0; i < n; ++i)
          acc += w1[static_cast<std::size_t>(j * n + i)] *
                 y[static_cast<std::size_t>(k * n + i)];
        c[static_cast<std::size_t>(k * r1 + j)] = acc;
      }
    for (index_t k = 0; k < b; ++k)
      for (index_t i = 0; i < n; ++i) {
        double l = 0.0;
        for (index_t j = 0; j < r1; ++j)
          l += w1[static_cast<std::size_t>(j * n + i)] *
               c[static_cast<std::size_t>(k * r1 + j)];
        s[static_cast<std::size_t>(k * n + i)] =
            y[static_cast<std::size_t>(k * n + i)] - l;
      }
  }
  double loss = 0.0;
  for (double v : s) loss += std::abs(v);
  if (mu == 0.0) return loss;

  DMat p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = s[i] > 0.0 ? s[i] : 0.0;
  DMat c2(static_cast<std::size_t>(r2) * b, 0.0);
  for (index_t k = 0; k < b; ++k)
    for (index_t j = 0; j < r2; ++j) {
      double acc = 0.0;
      for (index_t i = 0; i < n; ++i)
        acc += w2[static_cast<std::size_t>(j * n + i)] *
               p[static_cast<std::size_t>(k * n + i)];
      c2[static_cast<std::size_t>(k * r2 + j)] = acc;
    }
  double sq = 0.0;
  for (index_t k = 0; k < b; ++k)
    for (index_t i = 0; i < n; ++i) {
      double l = 0.0;
      for (index_t j = 0; j < r2; ++j)
        l += w2[static_cast<std::size_t>(j * n + i)] *
             c2[static_cast<std::size_t>(k * r2 + j)];
      const double rres = p[static_cast<std::size_t>(k * n + i)] - l;
      sq += rres * rres;
    }
  return loss + mu * sq;
}

// Central finite differences d loss / d param over a double parameter vector.
template <typename LossFn>
DMat central_fd(DMat params, LossFn&& loss, double step = 1e-4) {
  DMat grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + step;
    const double up = loss(params);
    params[i] = keep - step;
    const double down = loss(params);
    params[i] = keep;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

inline double rel_diff(const DMat& a, const DMat& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline Matrix random_matrix(index_t rows, index_t cols, std::uint64_t seed,
                            double scale = 1.0) {
  Matrix m;
  m.resize_uninit(rows, cols);
  bear::Rng rng(seed);
  for (index_t i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<float>(rng.normal() * scale);
  return m;
}

}  // namespace oracles
