#include "bear/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "bear/errors.hpp"
#include "bear/la.hpp"
#include "bear/parallel.hpp"
#include "bear/rng.hpp"

namespace bear {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_forward_shapes(const Matrix& w, const Matrix& yb) {
  if (w.rows() != yb.rows())
    throw DimensionError("W has " + std::to_string(w.rows()) + " rows, batch has " +
                         std::to_string(yb.rows()));
  if (w.cols() < 1) throw DimensionError("W must have at least one column");
}

// sign with sign(0) = 0, the subgradient choice at the kink.
inline float sign_of(float x) { return x > 0.0f ? 1.0f : (x < 0.0f ? -1.0f : 0.0f); }

}  // namespace

namespace detail {

BatchWork::BatchWork(index_t n, index_t r, index_t b, int threads) {
  s.resize_uninit(n, b);
  c.resize_uninit(r, b);
  small.resize_uninit(b, r);
  grad.resize_uninit(n, r);
  if (threads > 1) {
    partials.resize(static_cast<std::size_t>(threads) * 2);
    for (auto& p : partials) p.resize_uninit(n, r);
    thread_small.resize(static_cast<std::size_t>(threads));
    for (auto& p : thread_small) p.resize_uninit(b, r);
    block_abs.resize(static_cast<std::size_t>(threads));
  }
}

// Column blocks are independent, so the threaded path partitions the batch.
double residual_into(const Matrix& w, const Matrix& yb, BatchWork& ws, int threads) {
  const index_t n = w.rows(), r = w.cols(), width = yb.cols();
  double total = 0.0;
  if (threads <= 1) {
    la::CMap wv(w.data(), n, r);
    la::CMap y(yb.data(), n, width);
    la::Map c(ws.c.data(), r, width);
    la::Map s(ws.s.data(), n, width);
    c.noalias() = wv.transpose() * y;
    s = y;
    s.noalias() -= wv * c;
    const float* p = ws.s.data();
    for (index_t i = 0; i < n * width; ++i) total += std::abs(static_cast<double>(p[i]));
    return total;
  }
  parallel_blocks(width, threads, [&](int block, index_t j0, index_t j1) {
    const index_t len = j1 - j0;
    la::CMap wv(w.data(), n, r);
    la::CMap y(yb.col(j0), n, len);
    la::Map c(ws.c.data() + j0 * r, r, len);
    la::Map s(ws.s.col(j0), n, len);
    c.noalias() = wv.transpose() * y;
    s = y;
    s.noalias() -= wv * c;
    double acc = 0.0;
    const float* p = ws.s.col(j0);
    for (index_t i = 0; i < n * len; ++i) acc += std::abs(static_cast<double>(p[i]));
    ws.block_abs[static_cast<std::size_t>(block)] = acc;
  });
  const int nblocks = static_cast<int>(std::min<index_t>(threads, width));
  for (int b = 0; b < nblocks; ++b) total += ws.block_abs[static_cast<std::size_t>(b)];
  return total;
}

// Fills ws.grad with -(G (Y_b^T W) + Y_b (G^T W)) where G replaces S in ws.s.
// Returns sum |S| accumulated before the sign pass.
double grad_into(const Matrix& w, const Matrix& yb, BatchWork& ws, int threads) {
  const index_t n = w.rows(), r = w.cols(), width = yb.cols();
  const double abs_sum = residual_into(w, yb, ws, threads);
  float* s = ws.s.data();
  for (index_t i = 0; i < n * width; ++i) s[i] = sign_of(s[i]);

  if (threads <= 1) {
    la::CMap wv(w.data(), n, r);
    la::CMap y(yb.data(), n, width);
    la::CMap g(ws.s.data(), n, width);
    la::Map small(ws.small.data(), width, r);
    la::Map grad(ws.grad.data(), n, r);
    small.noalias() = y.transpose() * wv;
    grad.noalias() = -(g * small);
    small.noalias() = g.transpose() * wv;
    grad.noalias() -= y * small;
    return abs_sum;
  }

  // Per-thread partial products summed in block order: deterministic for a
  // fixed thread count, low-order bits may differ across counts.
  parallel_blocks(width, threads, [&](int block, index_t j0, index_t j1) {
    const index_t len = j1 - j0;
    la::CMap wv(w.data(), n, r);
    la::CMap y(yb.col(j0), n, len);
    la::CMap g(ws.s.col(j0), n, len);
    auto& sm = ws.thread_small[static_cast<std::size_t>(block)];
    auto& t1 = ws.partials[static_cast<std::size_t>(block) * 2];
    auto& t2 = ws.partials[static_cast<std::size_t>(block) * 2 + 1];
    la::Map smv(sm.data(), len, r);
    la::Map t1v(t1.data(), n, r);
    la::Map t2v(t2.data(), n, r);
    smv.noalias() = y.transpose() * wv;
    t1v.noalias() = g * smv;
    smv.noalias() = g.transpose() * wv;
    t2v.noalias() = y * smv;
  });
  la::Map grad(ws.grad.data(), n, r);
  grad.setZero();
  const int nblocks = static_cast<int>(std::min<index_t>(threads, width));
  for (int b = 0; b < nblocks; ++b) {
    grad.noalias() -= la::CMap(ws.partials[static_cast<std::size_t>(b) * 2].data(), n, r);
    grad.noalias() -= la::CMap(ws.partials[static_cast<std::size_t>(b) * 2 + 1].data(), n, r);
  }
  return abs_sum;
}

void forward_into(const Matrix& w, const Matrix& yb, Matrix& c_buf, Matrix& out,
                  int threads) {
  const index_t n = w.rows(), r = w.cols(), width = yb.cols();
  parallel_blocks(width, threads, [&](int, index_t j0, index_t j1) {
    const index_t len = j1 - j0;
    la::CMap wv(w.data(), n, r);
    la::CMap y(yb.col(j0), n, len);
    la::Map c(c_buf.data() + j0 * r, r, len);
    la::Map l(out.col(j0), n, len);
    c.noalias() = wv.transpose() * y;
    l.noalias() = wv * c;
  });
}

}  // namespace detail

namespace {
using detail::BatchWork;
using detail::forward_into;
using detail::grad_into;
using detail::residual_into;
}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0f)) throw ParameterError("learning_rate must be > 0");
  if (epochs < 0) throw ParameterError("epochs must be >= 0");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (!(adam_beta1 > 0.0f && adam_beta1 < 1.0f))
    throw ParameterError("adam_beta1 must lie in (0, 1)");
  if (!(adam_beta2 > 0.0f && adam_beta2 < 1.0f))
    throw ParameterError("adam_beta2 must lie in (0, 1)");
  if (!(adam_eps > 0.0f)) throw ParameterError("adam_eps must be > 0");
  if (threads < 1) throw ParameterError("threads must be >= 1");
  if (early_stop_rel_tol && !(*early_stop_rel_tol > 0.0))
    throw ParameterError("early_stop_rel_tol must be > 0 when set");
}

Matrix init_gaussian(index_t rows, index_t rank, std::uint64_t seed) {
  Matrix w;
  w.resize_uninit(rows, rank);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  float* p = w.data();
  for (index_t i = 0; i < w.size(); ++i)
    p[i] = static_cast<float>(rng.normal() * scale);
  return w;
}

Matrix forward(const Matrix& w, const Matrix& yb, int threads) {
  check_forward_shapes(w, yb);
  Matrix c;
  c.resize_uninit(w.cols(), yb.cols());
  Matrix out;
  out.resize_uninit(yb.rows(), yb.cols());
  forward_into(w, yb, c, out, threads);
  return out;
}

double l1_loss(const Matrix& w, const Matrix& yb, int threads) {
  check_forward_shapes(w, yb);
  BatchWork ws(w.rows(), w.cols(), yb.cols(), threads);
  return residual_into(w, yb, ws, threads);
}

Matrix grad_w(const Matrix& w, const Matrix& yb, int threads) {
  check_forward_shapes(w, yb);
  BatchWork ws(w.rows(), w.cols(), yb.cols(), threads);
  grad_into(w, yb, ws, threads);
  return std::move(ws.grad);
}

void adam_step(AdamState& state, Matrix& w, const Matrix& grad, const TrainConfig& cfg) {
  if (!state.m.same_shape(w) || !state.v.same_shape(w) || !grad.same_shape(w))
    throw DimensionError("adam_step: state/gradient shapes do not match W");
  state.t += 1;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  const double lr = cfg.learning_rate, eps = cfg.adam_eps;
  float* m = state.m.data();
  float* v = state.v.data();
  float* wp = w.data();
  const float* g = grad.data();
  for (index_t i = 0; i < w.size(); ++i) {
    const double gi = g[i];
    const double mi = b1 * m[i] + (1.0 - b1) * gi;
    const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
    m[i] = static_cast<float>(mi);
    v[i] = static_cast<float>(vi);
    wp[i] = static_cast<float>(wp[i] - lr * (mi / c1) / (std::sqrt(vi / c2) + eps));
  }
}

TrainResult train(BatchSource& src, index_t rank, const TrainConfig& cfg,
                  const Matrix* w_init) {
  cfg.validate();
  const index_t n = src.rows(), m = src.cols();
  if (rank < 1) throw ParameterError("rank must be >= 1");
  if (rank > std::min(n, m))
    throw ParameterError("rank " + std::to_string(rank) + " exceeds min(n, m) = " +
                         std::to_string(std::min(n, m)));
  const auto t0 = Clock::now();

  Matrix w;
  if (w_init) {
    if (w_init->rows() != n || w_init->cols() != rank)
      throw DimensionError("train: w_init shape does not match (n, rank)");
    w = *w_init;
  } else {
    w = init_gaussian(n, rank, derive_seed(cfg.seed, kWInitTag));
  }
  AdamState state = AdamState::like(w);

  TrainResult result;
  const index_t b = std::min(cfg.batch_size, m);
  BatchWork ws(n, rank, b, cfg.threads);
  Matrix yb;
  const double denom = static_cast<double>(n) * static_cast<double>(m);

  for (index_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    src.begin_epoch(epoch);
    double abs_sum = 0.0;
    while (src.next_batch(yb)) {
      abs_sum += grad_into(w, yb, ws, cfg.threads);
      adam_step(state, w, ws.grad, cfg);
    }
    const double mean_loss = abs_sum / denom;
    if (!std::isfinite(mean_loss))
      throw NumericalError("training diverged: non-finite loss at epoch " +
                           std::to_string(epoch));
    result.epoch_loss.push_back(mean_loss);
    if (mean_loss > 10.0 * result.epoch_loss.front())
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                           ": loss " + std::to_string(mean_loss) + " exceeds 10x the initial " +
                           std::to_string(result.epoch_loss.front()));
    if (cfg.early_stop_rel_tol && epoch > 0) {
      const double prev = result.epoch_loss[result.epoch_loss.size() - 2];
      const double rel = std::abs(mean_loss - prev) / std::max(prev, 1e-300);
      if (rel < *cfg.early_stop_rel_tol) break;
    }
  }

  result.model.w = std::move(w);
  result.wall_seconds = seconds_since(t0);
  return result;
}

MemoryColumnSink::MemoryColumnSink(index_t rows, index_t cols) {
  out_.resize_uninit(rows, cols);
}

void MemoryColumnSink::append(const Matrix& chunk) {
  if (chunk.rows() != out_.rows())
    throw DimensionError("MemoryColumnSink: row mismatch");
  if (written_ + chunk.cols() > out_.cols())
    throw ParameterError("MemoryColumnSink: more columns than declared");
  std::memcpy(out_.col(written_), chunk.data(),
              sizeof(float) * static_cast<std::size_t>(chunk.size()));
  written_ += chunk.cols();
}

Matrix MemoryColumnSink::take() {
  if (written_ != out_.cols())
    throw ParameterError("MemoryColumnSink: only " + std::to_string(written_) + " of " +
                         std::to_string(out_.cols()) + " columns were written");
  written_ = 0;
  return std::move(out_);
}

void infer_stream(const BearModel& model, BatchSource& src, ColumnSink* l_sink,
                  ColumnSink* s_sink, int threads) {
  if (model.w.rows() != src.rows())
    throw DimensionError("infer_stream: model rows do not match source rows");
  const index_t n = src.rows();
  Matrix yb, l, s, c;
  c.resize_uninit(model.rank(), std::min(src.batch_size(), src.cols()));
  src.begin_epoch(0, /*sequential=*/true);
  while (src.next_batch(yb)) {
    const index_t width = yb.cols();
    l.resize_uninit(n, width);
    forward_into(model.w, yb, c, l, threads);
    if (l_sink) l_sink->append(l);
    if (s_sink) {
      s.resize_uninit(n, width);
      la::view(s) = la::view(yb) - la::view(l);
      s_sink->append(s);
    }
  }
}

Decomposition infer(const BearModel& model, BatchSource& src, int threads) {
  MemoryColumnSink l_sink(src.rows(), src.cols());
  MemoryColumnSink s_sink(src.rows(), src.cols());
  infer_stream(model, src, &l_sink, &s_sink, threads);
  return Decomposition{l_sink.take(), s_sink.take()};
}

double greedy_objective(const BearModel& model, BatchSource& src, double lambda,
                        int threads) {
  if (model.w.rows() != src.rows())
    throw DimensionError("greedy_objective: model rows do not match source rows");
  BatchWork ws(src.rows(), model.rank(), std::min(src.batch_size(), src.cols()),
               threads);
  Matrix yb;
  double abs_sum = 0.0;
  src.begin_epoch(0, /*sequential=*/true);
  while (src.next_batch(yb)) abs_sum += residual_into(model.w, yb, ws, threads);
  return static_cast<double>(model.rank()) + lambda * abs_sum;
}

double default_lambda(index_t rows, index_t cols) {
  return 1.0 / std::sqrt(static_cast<double>(std::max(rows, cols)));
}

GreedyResult greedy_train(BatchSource& src, double lambda, const TrainConfig& cfg,
                          std::vector<index_t> schedule, bool warm_start) {
  cfg.validate();
  if (lambda < 0.0) throw ParameterError("lambda must be >= 0");
  const index_t max_rank = std::min(src.rows(), src.cols());
  if (schedule.empty()) {
    for (index_t r = 1; r <= max_rank; ++r) schedule.push_back(r);
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1) throw ParameterError("rank schedule entries must be >= 1");
    if (i > 0 && schedule[i] <= schedule[i - 1])
      throw ParameterError("rank schedule must be strictly increasing");
  }
  const auto t0 = Clock::now();

  GreedyResult out;
  bool have_prev = false;
  BearModel prev_model;
  index_t prev_rank = 0;
  double prev_obj = 0.0;

  for (index_t r : schedule) {
    TrainConfig rank_cfg = cfg;
    rank_cfg.seed = derive_seed(cfg.seed, kGreedyTag, static_cast<std::uint64_t>(r));
    TrainResult trained;
    if (warm_start && have_prev) {
      Matrix w0;
      w0.resize_uninit(src.rows(), r);
      std::memcpy(w0.data(), prev_model.w.data(),
                  sizeof(float) * static_cast<std::size_t>(prev_model.w.size()));
      const Matrix fresh = init_gaussian(
          src.rows(), r - prev_rank, derive_seed(rank_cfg.seed, kWInitTag));
      std::memcpy(w0.col(prev_rank), fresh.data(),
                  sizeof(float) * static_cast<std::size_t>(fresh.size()));
      trained = train(src, r, rank_cfg, &w0);
    } else {
      trained = train(src, r, rank_cfg);
    }
    const double obj = greedy_objective(trained.model, src, lambda, cfg.threads);
    out.tried_ranks.push_back(r);
    out.objective_trace.push_back(obj);
    out.final_epoch_loss.push_back(trained.epoch_loss.empty()
                                       ? std::numeric_limits<double>::quiet_NaN()
                                       : trained.epoch_loss.back());
    if (have_prev && obj > prev_obj) {
      out.model = std::move(prev_model);
      out.chosen_rank = prev_rank;
      out.schedule_exhausted = false;
      out.wall_seconds = seconds_since(t0);
      return out;
    }
    prev_model = std::move(trained.model);
    prev_rank = r;
    prev_obj = obj;
    have_prev = true;
  }

  out.model = std::move(prev_model);
  out.chosen_rank = prev_rank;
  out.schedule_exhausted = true;
  out.wall_seconds = seconds_since(t0);
  return out;
}

}  // namespace bear
