#include "bear/baselines.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "bear/errors.hpp"
#include "bear/jacobi_svd.hpp"
#include "bear/rng.hpp"

namespace bear {

namespace {

using Eigen::MatrixXd;

MatrixXd to_double(const Matrix& m) {
  MatrixXd out(m.rows(), m.cols());
  for (index_t i = 0; i < m.size(); ++i) out.data()[i] = m.data()[i];
  return out;
}

Matrix to_float(const MatrixXd& m) {
  Matrix out;
  out.resize_uninit(m.rows(), m.cols());
  for (index_t i = 0; i < out.size(); ++i)
    out.data()[i] = static_cast<float>(m.data()[i]);
  return out;
}

// Thin SVD in double via the shared Jacobi kernel.
void svd_double(const MatrixXd& a, MatrixXd& u, Eigen::VectorXd& sigma, MatrixXd& v) {
  const index_t n = a.rows(), m = a.cols(), k = std::min(n, m);
  std::vector<double> data(a.data(), a.data() + n * m);
  std::vector<double> us, ss, vs;
  if (!detail::jacobi_svd(std::move(data), n, m, us, ss, vs))
    throw NumericalError("ialm_rpca: SVD did not converge");
  u = Eigen::Map<MatrixXd>(us.data(), n, k);
  v = Eigen::Map<MatrixXd>(vs.data(), m, k);
  sigma = Eigen::Map<Eigen::VectorXd>(ss.data(), k);
}

}  // namespace

Matrix soft_threshold(const Matrix& m, double tau) {
  if (tau < 0.0) throw ParameterError("soft_threshold: tau must be >= 0");
  Matrix out;
  out.resize_uninit(m.rows(), m.cols());
  const float* in = m.data();
  float* o = out.data();
  const float t = static_cast<float>(tau);
  for (index_t i = 0; i < m.size(); ++i) {
    const float x = in[i];
    const float mag = std::abs(x) - t;
    o[i] = mag > 0.0f ? (x > 0.0f ? mag : -mag) : 0.0f;
  }
  return out;
}

Matrix svt(const Matrix& m, double tau, index_t cap) {
  if (tau < 0.0) throw ParameterError("svt: tau must be >= 0");
  const SvdResult svd = svd_small(m, cap);
  const index_t n = m.rows(), mm = m.cols(), k = std::min(n, mm);
  MatrixXd u = to_double(svd.u), v = to_double(svd.v);
  MatrixXd shrunk = MatrixXd::Zero(k, k);
  for (index_t i = 0; i < k; ++i)
    shrunk(i, i) = std::max(svd.singular_values[static_cast<std::size_t>(i)] - tau, 0.0);
  return to_float(u * shrunk * v.transpose());
}

IalmResult ialm_rpca(const Matrix& y, const IalmConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw ParameterError("ialm_rpca: lambda must be > 0");
  if (!(cfg.rho > 1.0)) throw ParameterError("ialm_rpca: rho must be > 1");
  if (!(cfg.tol > 0.0)) throw ParameterError("ialm_rpca: tol must be > 0");
  if (cfg.max_iters < 1) throw ParameterError("ialm_rpca: max_iters must be >= 1");

  const index_t n = y.rows(), m = y.cols();
  const MatrixXd d = to_double(y);
  const double norm_d = d.norm();

  IalmResult result;
  if (norm_d == 0.0) {
    result.l = Matrix(n, m);
    result.s = Matrix(n, m);
    result.iters = 1;
    result.converged = true;
    result.feasibility_gap = 0.0;
    return result;
  }

  MatrixXd u, v;
  Eigen::VectorXd sigma;
  svd_double(d, u, sigma, v);
  const double sigma1 = sigma(0);

  // Standard inexact-ALM dual init: Z = D / max(sigma_1, ||D||_inf / lambda).
  const double j_scale =
      std::max(sigma1, d.cwiseAbs().maxCoeff() / cfg.lambda);
  MatrixXd z = d / j_scale;
  double mu = cfg.mu0 > 0.0 ? cfg.mu0 : 1.25 / sigma1;
  const double mu_max = mu * 1e7;

  MatrixXd a = MatrixXd::Zero(n, m);
  MatrixXd e = MatrixXd::Zero(n, m);
  MatrixXd t(n, m), h(n, m);

  for (int k = 1; k <= cfg.max_iters; ++k) {
    // L step: SVT(D - E + Z/mu, 1/mu)
    t = d - e + z / mu;
    svd_double(t, u, sigma, v);
    const double thr = 1.0 / mu;
    index_t kept = 0;
    for (index_t i = 0; i < sigma.size(); ++i)
      if (sigma(i) > thr) ++kept;
    if (kept == 0) {
      a.setZero();
    } else {
      a.noalias() = u.leftCols(kept) *
                    (sigma.head(kept).array() - thr).matrix().asDiagonal() *
                    v.leftCols(kept).transpose();
    }

    // S step: entrywise shrinkage of D - A + Z/mu by lambda/mu
    t = d - a + z / mu;
    const double sthr = cfg.lambda / mu;
    e = t.unaryExpr([sthr](double x) {
      const double mag = std::abs(x) - sthr;
      return mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
    });

    h = d - a - e;
    result.iters = k;
    result.feasibility_gap = h.norm() / norm_d;
    if (result.feasibility_gap <= cfg.tol) {
      result.converged = true;
      break;
    }
    z.noalias() += mu * h;
    mu = std::min(mu * cfg.rho, mu_max);
  }

  result.l = to_float(a);
  result.s = to_float(e);
  return result;
}

NmfMuResult nmf_mu(const Matrix& y, index_t rank, int iters, std::uint64_t seed) {
  const index_t n = y.rows(), m = y.cols();
  if (rank < 1) throw ParameterError("nmf_mu: rank must be >= 1");
  if (iters < 0) throw ParameterError("nmf_mu: iters must be >= 0");
  for (index_t i = 0; i < y.size(); ++i) {
    if (y.data()[i] < 0.0f)
      throw DomainError("nmf_mu: negative input entry at flat index " +
                        std::to_string(i));
  }

  const MatrixXd yd = to_double(y);
  const double mean = y.size() > 0 ? yd.sum() / static_cast<double>(y.size()) : 0.0;
  const double scale = std::sqrt(std::max(mean, 1e-12) / static_cast<double>(rank));

  Rng rng(derive_seed(seed, 0x4E4D46ULL));  // "NMF"
  MatrixXd w(n, rank), h(rank, m);
  for (index_t i = 0; i < n * rank; ++i) w.data()[i] = rng.uniform_pos() * scale;
  for (index_t i = 0; i < rank * m; ++i) h.data()[i] = rng.uniform_pos() * scale;

  constexpr double kEps = 1e-12;  // keeps denominators away from zero
  NmfMuResult result;
  MatrixXd num, den;
  for (int it = 0; it < iters; ++it) {
    num.noalias() = w.transpose() * yd;
    den.noalias() = (w.transpose() * w) * h;
    h.array() *= num.array() / (den.array() + kEps);

    num.noalias() = yd * h.transpose();
    den.noalias() = w * (h * h.transpose());
    w.array() *= num.array() / (den.array() + kEps);

    result.objective.push_back((yd - w * h).squaredNorm());
  }

  result.w = to_float(w);
  result.h = to_float(h);
  return result;
}

}  // namespace bear
