#include "bear/cascade.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "bear/errors.hpp"
#include "bear/la.hpp"
#include "bear/rng.hpp"

namespace bear {

namespace {

using Clock = std::chrono::steady_clock;
using detail::BatchWork;
using detail::grad_into;
using detail::residual_into;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix init_nonneg(index_t rows, index_t rank, std::uint64_t seed) {
  Matrix w = init_gaussian(rows, rank, seed);
  float* p = w.data();
  for (index_t i = 0; i < w.size(); ++i) p[i] = std::abs(p[i]);
  return w;
}

void check_rank(index_t rank, index_t n, index_t m, const char* what) {
  if (rank < 1) throw ParameterError(std::string(what) + " must be >= 1");
  if (rank > std::min(n, m))
    throw ParameterError(std::string(what) + " = " + std::to_string(rank) +
                         " exceeds min(n, m) = " + std::to_string(std::min(n, m)));
}

// First negative entry fails the whole run; NMF inputs must be non-negative.
void validate_nonneg_stream(BatchSource& src) {
  Matrix yb;
  std::vector<index_t> ids;
  src.begin_epoch(0, /*sequential=*/true);
  while (src.next_batch(yb, &ids)) {
    const float* p = yb.data();
    for (index_t t = 0; t < yb.cols(); ++t) {
      for (index_t i = 0; i < yb.rows(); ++i) {
        const float v = p[t * yb.rows() + i];
        if (v < 0.0f)
          throw DomainError("negative input entry Y(" + std::to_string(i) + ", " +
                            std::to_string(ids[static_cast<std::size_t>(t)]) +
                            ") = " + std::to_string(v));
      }
    }
  }
}

// grad = -2 (R (Yb^T W) + Yb (R^T W)) for the squared Frobenius residual held
// in `resid`; writes into ws.grad using ws.small as scratch.
void frob_grad_into(const Matrix& w, const Matrix& yb, const Matrix& resid,
                    BatchWork& ws) {
  const index_t n = w.rows(), r = w.cols(), width = yb.cols();
  la::CMap wv(w.data(), n, r);
  la::CMap y(yb.data(), n, width);
  la::CMap rv(resid.data(), n, width);
  la::Map small(ws.small.data(), width, r);
  la::Map grad(ws.grad.data(), n, r);
  small.noalias() = y.transpose() * wv;
  grad.noalias() = rv * small;
  small.noalias() = rv.transpose() * wv;
  grad.noalias() += y * small;
  grad *= -2.0f;
}

double sum_squares(const Matrix& m, index_t count) {
  double acc = 0.0;
  const float* p = m.data();
  for (index_t i = 0; i < count; ++i) {
    const double x = p[i];
    acc += x * x;
  }
  return acc;
}

// Scratch for the cascaded step beyond what BatchWork covers.
struct CascadeWork {
  CascadeWork(index_t n, index_t r2, index_t b) {
    p.resize_uninit(n, b);
    r.resize_uninit(n, b);
    q.resize_uninit(n, b);
    c2.resize_uninit(r2, b);
    small2.resize_uninit(b, r2);
    grad2.resize_uninit(n, r2);
  }
  Matrix p;       // max(S, 0)
  Matrix r;       // P - W2 W2^T P
  Matrix q;       // 2 (R - W2 W2^T R), the term backpropagated through the ReLU
  Matrix c2;      // r2 x b
  Matrix small2;  // b x r2
  Matrix grad2;   // n x r2
};

// One cascaded batch: fills ws1.grad (W1) and cw.grad2 (W2), returns the pair
// (sum |S|, sum R^2). With mu = 0 this reduces exactly to grad_into on W1.
std::pair<double, double> cascade_batch_grads(const Matrix& w1, const Matrix& w2,
                                              const Matrix& yb, double mu,
                                              BatchWork& ws1, CascadeWork& cw,
                                              int threads) {
  if (mu == 0.0) {
    const double abs_sum = grad_into(w1, yb, ws1, threads);
    cw.grad2.fill(0.0f);
    return {abs_sum, 0.0};
  }

  const index_t n = w1.rows(), width = yb.cols(), r2 = w2.cols();
  const double abs_sum = residual_into(w1, yb, ws1, threads);  // ws1.s = S

  // P = max(S, 0)
  {
    const float* s = ws1.s.data();
    float* p = cw.p.data();
    for (index_t i = 0; i < n * width; ++i) p[i] = s[i] > 0.0f ? s[i] : 0.0f;
  }

  la::CMap w2v(w2.data(), n, r2);
  la::CMap pv(cw.p.data(), n, width);
  la::Map c2(cw.c2.data(), r2, width);
  la::Map rv(cw.r.data(), n, width);
  c2.noalias() = w2v.transpose() * pv;
  rv = pv;
  rv.noalias() -= w2v * c2;
  const double sq_sum = sum_squares(cw.r, n * width);

  // W2 gradient: mu * (-2) (R (P^T W2) + P (R^T W2))
  {
    la::Map small2(cw.small2.data(), width, r2);
    la::Map grad2(cw.grad2.data(), n, r2);
    small2.noalias() = pv.transpose() * w2v;
    grad2.noalias() = la::CMap(cw.r.data(), n, width) * small2;
    small2.noalias() = la::CMap(cw.r.data(), n, width).transpose() * w2v;
    grad2.noalias() += pv * small2;
    grad2 *= static_cast<float>(-2.0 * mu);
  }

  // Q = 2 (R - W2 W2^T R); E = sign(S) + mu * Q masked to S > 0, stored in ws1.s
  {
    la::Map qv(cw.q.data(), n, width);
    c2.noalias() = w2v.transpose() * la::CMap(cw.r.data(), n, width);
    qv = la::CMap(cw.r.data(), n, width);
    qv.noalias() -= w2v * c2;
    float* s = ws1.s.data();
    const float* q = cw.q.data();
    const float mu2 = static_cast<float>(2.0 * mu);
    for (index_t i = 0; i < n * width; ++i) {
      const float si = s[i];
      float e = si > 0.0f ? 1.0f : (si < 0.0f ? -1.0f : 0.0f);
      if (si > 0.0f) e += mu2 * q[i];
      s[i] = e;
    }
  }

  // W1 gradient: -(E (Yb^T W1) + Yb (E^T W1)), E sitting in ws1.s
  {
    const index_t r1 = w1.cols();
    la::CMap w1v(w1.data(), n, r1);
    la::CMap y(yb.data(), n, width);
    la::CMap e(ws1.s.data(), n, width);
    la::Map small(ws1.small.data(), width, r1);
    la::Map grad(ws1.grad.data(), n, r1);
    small.noalias() = y.transpose() * w1v;
    grad.noalias() = -(e * small);
    small.noalias() = e.transpose() * w1v;
    grad.noalias() -= y * small;
  }
  return {abs_sum, sq_sum};
}

}  // namespace

void project_nonneg(Matrix& w) {
  float* p = w.data();
  for (index_t i = 0; i < w.size(); ++i)
    if (p[i] < 0.0f) p[i] = 0.0f;
}

NmfTrainResult nmf_train(BatchSource& src, index_t rank, const TrainConfig& cfg) {
  cfg.validate();
  const index_t n = src.rows(), m = src.cols();
  check_rank(rank, n, m, "rank");
  validate_nonneg_stream(src);
  const auto t0 = Clock::now();

  Matrix w = init_nonneg(n, rank, derive_seed(cfg.seed, kWInitTag));
  AdamState state = AdamState::like(w);

  NmfTrainResult result;
  const index_t b = std::min(cfg.batch_size, m);
  BatchWork ws(n, rank, b, cfg.threads);
  Matrix yb;
  const double denom = static_cast<double>(n) * static_cast<double>(m);

  for (index_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    src.begin_epoch(epoch);
    double sq_sum = 0.0;
    while (src.next_batch(yb)) {
      residual_into(w, yb, ws, cfg.threads);  // ws.s = R
      sq_sum += sum_squares(ws.s, w.rows() * yb.cols());
      frob_grad_into(w, yb, ws.s, ws);
      adam_step(state, w, ws.grad, cfg);
      project_nonneg(w);
    }
    const double mean_loss = sq_sum / denom;
    if (!std::isfinite(mean_loss))
      throw NumericalError("NMF training diverged: non-finite loss at epoch " +
                           std::to_string(epoch));
    result.epoch_loss.push_back(mean_loss);
    if (mean_loss > 10.0 * result.epoch_loss.front())
      throw NumericalError("NMF training diverged at epoch " + std::to_string(epoch));
  }

  result.model.w = std::move(w);
  result.wall_seconds = seconds_since(t0);
  return result;
}

std::pair<Matrix, Matrix> cascade_grads(const Matrix& w1, const Matrix& w2,
                                        const Matrix& yb, double mu) {
  if (w1.rows() != yb.rows() || w2.rows() != yb.rows())
    throw DimensionError("cascade_grads: factor rows do not match the batch");
  if (mu < 0.0) throw ParameterError("mu must be >= 0");
  BatchWork ws1(w1.rows(), w1.cols(), yb.cols(), 1);
  CascadeWork cw(w1.rows(), w2.cols(), yb.cols());
  cascade_batch_grads(w1, w2, yb, mu, ws1, cw, 1);
  return {std::move(ws1.grad), std::move(cw.grad2)};
}

CascadeTrainResult cascade_train(BatchSource& src, index_t r1, index_t r2, double mu,
                                 const TrainConfig& cfg, bool sequential) {
  cfg.validate();
  const index_t n = src.rows(), m = src.cols();
  check_rank(r1, n, m, "r1");
  check_rank(r2, n, m, "r2");
  if (mu < 0.0) throw ParameterError("mu must be >= 0");
  const auto t0 = Clock::now();

  CascadeTrainResult result;
  result.model.mu = mu;

  Matrix w1, w2 = init_nonneg(n, r2, derive_seed(cfg.seed, kW2InitTag));

  if (sequential) {
    // Stage one: plain l1 training of the first factor.
    TrainResult stage1 = train(src, r1, cfg);
    w1 = std::move(stage1.model.w);
  } else {
    w1 = init_gaussian(n, r1, derive_seed(cfg.seed, kWInitTag));
  }

  AdamState state1 = AdamState::like(w1);
  AdamState state2 = AdamState::like(w2);

  const index_t b = std::min(cfg.batch_size, m);
  BatchWork ws1(n, r1, b, cfg.threads);
  CascadeWork cw(n, r2, b);
  Matrix yb;
  const double denom = static_cast<double>(n) * static_cast<double>(m);

  for (index_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    src.begin_epoch(epoch);
    double abs_sum = 0.0, sq_sum = 0.0;
    while (src.next_batch(yb)) {
      const auto [a, q] = cascade_batch_grads(w1, w2, yb, mu, ws1, cw, cfg.threads);
      abs_sum += a;
      sq_sum += q;
      if (!sequential) adam_step(state1, w1, ws1.grad, cfg);
      adam_step(state2, w2, cw.grad2, cfg);
      project_nonneg(w2);
    }
    const double mean_loss = (abs_sum + mu * sq_sum) / denom;
    if (!std::isfinite(mean_loss))
      throw NumericalError("cascade training diverged: non-finite loss at epoch " +
                           std::to_string(epoch));
    result.epoch_loss.push_back(mean_loss);
    if (mean_loss > 10.0 * result.epoch_loss.front())
      throw NumericalError("cascade training diverged at epoch " +
                           std::to_string(epoch));
  }

  result.model.w1 = std::move(w1);
  result.model.w2 = std::move(w2);
  result.wall_seconds = seconds_since(t0);
  return result;
}

Footprints extract_footprints(const CascadeModel& model, BatchSource& src,
                              bool normalize, int threads) {
  if (model.w1.rows() != src.rows() || model.w2.rows() != src.rows())
    throw DimensionError("extract_footprints: model rows do not match source");
  const index_t n = src.rows(), m = src.cols(), r2 = model.r2();

  Footprints fp;
  fp.spatial = model.w2;
  fp.temporal.resize_uninit(r2, m);

  const index_t b = std::min(src.batch_size(), m);
  BatchWork ws1(n, model.r1(), b, threads);
  Matrix yb;
  std::vector<index_t> ids;
  src.begin_epoch(0, /*sequential=*/true);
  while (src.next_batch(yb, &ids)) {
    const index_t width = yb.cols();
    residual_into(model.w1, yb, ws1, threads);  // ws1.s = S
    float* s = ws1.s.data();
    for (index_t i = 0; i < n * width; ++i)
      if (s[i] < 0.0f) s[i] = 0.0f;  // ReLU
    la::Map out(fp.temporal.col(ids[0]), r2, width);  // sequential pass: contiguous
    out.noalias() = la::CMap(model.w2.data(), n, r2).transpose() *
                    la::CMap(ws1.s.data(), n, width);
  }

  if (normalize) {
    for (index_t j = 0; j < r2; ++j) {
      double norm2 = 0.0;
      float* col = fp.spatial.col(j);
      for (index_t i = 0; i < n; ++i) norm2 += static_cast<double>(col[i]) * col[i];
      const double norm = std::sqrt(norm2);
      if (norm <= 0.0) continue;
      const float inv = static_cast<float>(1.0 / norm);
      for (index_t i = 0; i < n; ++i) col[i] *= inv;
      const float scale = static_cast<float>(norm);
      for (index_t t = 0; t < m; ++t) fp.temporal(j, t) *= scale;
    }
  }
  return fp;
}

void project_coefficients_stream(const Matrix& w, BatchSource& src,
                                 ColumnSink& sink) {
  if (w.rows() != src.rows())
    throw DimensionError("project_coefficients_stream: W rows do not match source");
  const index_t n = src.rows(), r = w.cols();
  Matrix yb, h;
  src.begin_epoch(0, /*sequential=*/true);
  while (src.next_batch(yb)) {
    h.resize_uninit(r, yb.cols());
    la::view(h).noalias() =
        la::CMap(w.data(), n, r).transpose() * la::view(yb);
    sink.append(h);
  }
}

}  // namespace bear
