#include "bear/jacobi_svd.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace bear::detail {

namespace {

// Relative off-diagonal threshold below which a column pair counts as
// orthogonal. Chosen so singular values come out at full double accuracy.
constexpr double kOrthTol = 1e-13;

// Orthogonalizes the columns of the tall p x q matrix t (column-major) by
// cyclic Jacobi rotations, accumulating them into w (q x q). Returns false on
// sweep-limit exhaustion.
bool orthogonalize(std::vector<double>& t, std::vector<double>& w,
                   std::int64_t p, std::int64_t q, int max_sweeps) {
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::int64_t i = 0; i + 1 < q; ++i) {
      for (std::int64_t j = i + 1; j < q; ++j) {
        double* ci = t.data() + i * p;
        double* cj = t.data() + j * p;
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::int64_t k = 0; k < p; ++k) {
          alpha += ci[k] * ci[k];
          beta += cj[k] * cj[k];
          gamma += ci[k] * cj[k];
        }
        const double scale = std::sqrt(alpha * beta);
        if (scale == 0.0 || std::abs(gamma) <= kOrthTol * scale) continue;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double tau =
            std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + tau * tau);
        const double s = c * tau;
        for (std::int64_t k = 0; k < p; ++k) {
          const double a = ci[k], b = cj[k];
          ci[k] = c * a - s * b;
          cj[k] = s * a + c * b;
        }
        double* wi = w.data() + i * q;
        double* wj = w.data() + j * q;
        for (std::int64_t k = 0; k < q; ++k) {
          const double a = wi[k], b = wj[k];
          wi[k] = c * a - s * b;
          wj[k] = s * a + c * b;
        }
        rotated = true;
      }
    }
    if (!rotated) return true;
  }
  return false;
}

// Replaces near-null columns of the orthonormal p x q factor with an
// orthonormal completion so U^T U = I holds even for rank-deficient input.
void complete_basis(std::vector<double>& lt, std::int64_t p, std::int64_t q,
                    const std::vector<bool>& is_null) {
  // Projects out every finished column (non-null ones plus nulls before j),
  // returning the residual's squared norm.
  const auto project_out = [&](double* cj, std::int64_t j) {
    for (std::int64_t other = 0; other < q; ++other) {
      if (other == j || (is_null[other] && other > j)) continue;
      const double* co = lt.data() + other * p;
      double dot = 0.0;
      for (std::int64_t k = 0; k < p; ++k) dot += co[k] * cj[k];
      for (std::int64_t k = 0; k < p; ++k) cj[k] -= dot * co[k];
    }
    double norm2 = 0.0;
    for (std::int64_t k = 0; k < p; ++k) norm2 += cj[k] * cj[k];
    return norm2;
  };

  for (std::int64_t j = 0; j < q; ++j) {
    if (!is_null[j]) continue;
    double* cj = lt.data() + j * p;
    std::int64_t best_cand = 0;
    double best_norm2 = -1.0;
    for (std::int64_t cand = 0; cand < p; ++cand) {
      for (std::int64_t k = 0; k < p; ++k) cj[k] = 0.0;
      cj[cand] = 1.0;
      const double norm2 = project_out(cj, j);
      if (norm2 > best_norm2) {
        best_norm2 = norm2;
        best_cand = cand;
      }
      if (norm2 > 0.25) break;  // good enough, typical case on the first try
    }
    for (std::int64_t k = 0; k < p; ++k) cj[k] = 0.0;
    cj[best_cand] = 1.0;
    project_out(cj, j);
    const double norm2 = project_out(cj, j);  // second pass tightens orthogonality
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::int64_t k = 0; k < p; ++k) cj[k] *= inv;
  }
}

}  // namespace

bool jacobi_svd(std::vector<double> a, std::int64_t n, std::int64_t m,
                std::vector<double>& u, std::vector<double>& sigma,
                std::vector<double>& v, int max_sweeps) {
  const bool transposed = n < m;
  const std::int64_t p = transposed ? m : n;  // rows of the tall working copy
  const std::int64_t q = transposed ? n : m;  // cols; also k = min(n, m)

  std::vector<double> t;
  if (transposed) {
    t.resize(static_cast<std::size_t>(p) * q);
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < m; ++j) t[i * p + j] = a[j * n + i];
  } else {
    t = std::move(a);
  }

  std::vector<double> w(static_cast<std::size_t>(q) * q, 0.0);
  for (std::int64_t i = 0; i < q; ++i) w[i * q + i] = 1.0;

  const bool converged = orthogonalize(t, w, p, q, max_sweeps);

  std::vector<double> norms(q);
  for (std::int64_t j = 0; j < q; ++j) {
    double s2 = 0.0;
    const double* cj = t.data() + j * p;
    for (std::int64_t k = 0; k < p; ++k) s2 += cj[k] * cj[k];
    norms[j] = std::sqrt(s2);
  }

  std::vector<std::int64_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t x, std::int64_t y) { return norms[x] > norms[y]; });

  const double sigma_max = q > 0 ? norms[order[0]] : 0.0;
  const double null_tol = sigma_max * static_cast<double>(p) * 1e-15;

  sigma.resize(q);
  std::vector<double> lt(static_cast<std::size_t>(p) * q);   // left vectors, sorted
  std::vector<double> rt(static_cast<std::size_t>(q) * q);   // right vectors, sorted
  std::vector<bool> is_null(q, false);
  for (std::int64_t jj = 0; jj < q; ++jj) {
    const std::int64_t src = order[jj];
    sigma[jj] = norms[src];
    const double* tc = t.data() + src * p;
    double* lc = lt.data() + jj * p;
    if (norms[src] > null_tol && norms[src] > 0.0) {
      const double inv = 1.0 / norms[src];
      for (std::int64_t k = 0; k < p; ++k) lc[k] = tc[k] * inv;
    } else {
      sigma[jj] = 0.0;
      is_null[jj] = true;
    }
    std::memcpy(rt.data() + jj * q, w.data() + src * q, sizeof(double) * q);
  }
  complete_basis(lt, p, q, is_null);

  if (transposed) {
    u = std::move(rt);  // n x k
    v = std::move(lt);  // m x k
  } else {
    u = std::move(lt);
    v = std::move(rt);
  }
  return converged;
}

}  // namespace bear::detail
