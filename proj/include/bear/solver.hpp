#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bear/batch_source.hpp"
#include "bear/bmat.hpp"
#include "bear/matrix.hpp"

namespace bear {

// Trains W (n x r) so that L = W W^T Y absorbs the low-rank structure of Y and
// S = Y - L is entrywise small, by mini-batch subgradient descent on ||S||_1.
// rank(L) <= r holds structurally: L lives in the column space of W.

struct TrainConfig {
  float learning_rate = 0.003f;
  index_t epochs = 50;
  index_t batch_size = 1000;
  std::uint64_t seed = 0;
  float adam_beta1 = 0.9f;
  float adam_beta2 = 0.999f;
  float adam_eps = 1e-8f;
  // Stop once the relative epoch-loss change drops below this. Off by default:
  // a fixed epoch count is the reference behavior.
  std::optional<double> early_stop_rel_tol;
  bool shuffle = true;
  int threads = 1;

  void validate() const;  // throws ParameterError
};

struct BearModel {
  Matrix w;  // n x r
  index_t rank() const { return w.cols(); }
};

struct AdamState {
  Matrix m;  // first moment, shape of W
  Matrix v;  // second moment, entrywise >= 0
  std::int64_t t = 0;

  static AdamState like(const Matrix& w) {
    AdamState s;
    s.m.resize(w.rows(), w.cols());
    s.v.resize(w.rows(), w.cols());
    return s;
  }
};

// Seeded i.i.d. N(0, 1/rows) init, filled in column-major order. Shared by the
// plain and cascaded trainers so their first-factor streams coincide.
Matrix init_gaussian(index_t rows, index_t rank, std::uint64_t seed);

inline constexpr std::uint64_t kWInitTag = 0x57494E4954ULL;    // first factor
inline constexpr std::uint64_t kW2InitTag = 0x57324E4954ULL;   // cascade second factor
inline constexpr std::uint64_t kGreedyTag = 0x4752454459ULL;   // per-rank reinit

// L_b = W (W^T Y_b), computed as two products in that association order.
Matrix forward(const Matrix& w, const Matrix& yb, int threads = 1);

// ||Y_b - forward(W, Y_b)||_1
double l1_loss(const Matrix& w, const Matrix& yb, int threads = 1);

// Subgradient of the batch l1 loss with respect to W:
//   -( G (Y_b^T W) + Y_b (G^T W) ),  G = sign(Y_b - W W^T Y_b), sign(0) = 0.
Matrix grad_w(const Matrix& w, const Matrix& yb, int threads = 1);

// One bias-corrected Adam update of w in place.
void adam_step(AdamState& state, Matrix& w, const Matrix& grad, const TrainConfig& cfg);

struct TrainResult {
  BearModel model;
  std::vector<double> epoch_loss;  // mean per-entry |S|, one value per epoch
  double wall_seconds = 0.0;
};

// Full training loop. W starts from init_gaussian(n, r, derive_seed(cfg.seed,
// kWInitTag)) unless w_init is given. Throws ParameterError when r exceeds
// min(n, m) and NumericalError on divergence (non-finite epoch loss, or loss
// above 10x the first epoch's).
TrainResult train(BatchSource& src, index_t rank, const TrainConfig& cfg,
                  const Matrix* w_init = nullptr);

// --- streaming inference ----------------------------------------------------

class ColumnSink {
 public:
  virtual ~ColumnSink() = default;
  virtual void append(const Matrix& chunk) = 0;
};

class BmatColumnSink final : public ColumnSink {
 public:
  BmatColumnSink(const std::filesystem::path& path, index_t rows, index_t cols)
      : writer_(path, rows, cols) {}
  void append(const Matrix& chunk) override { writer_.append(chunk); }
  void close() { writer_.close(); }

 private:
  BmatWriter writer_;
};

class MemoryColumnSink final : public ColumnSink {
 public:
  MemoryColumnSink(index_t rows, index_t cols);
  void append(const Matrix& chunk) override;
  Matrix take();

 private:
  Matrix out_;
  index_t written_ = 0;
};

// One sequential pass: per batch emits L_b = forward(W, Y_b) to l_sink and
// S_b = Y_b - L_b to s_sink (either may be null). Memory stays bounded by the
// batch width regardless of the source size.
void infer_stream(const BearModel& model, BatchSource& src, ColumnSink* l_sink,
                  ColumnSink* s_sink, int threads = 1);

struct Decomposition {
  Matrix l;
  Matrix s;
};

// In-memory convenience wrapper over infer_stream.
Decomposition infer(const BearModel& model, BatchSource& src, int threads = 1);

// --- greedy rank estimation ---------------------------------------------------

// r + lambda * ||S||_1 over the full data, one streaming pass. r is the
// model's target rank, not a numerical rank estimate.
double greedy_objective(const BearModel& model, BatchSource& src, double lambda,
                        int threads = 1);

// 1/sqrt(max(n, m)): the usual sparsity weight when none is given.
double default_lambda(index_t rows, index_t cols);

struct GreedyResult {
  BearModel model;
  index_t chosen_rank = 0;
  std::vector<index_t> tried_ranks;
  std::vector<double> objective_trace;   // aligned with tried_ranks
  std::vector<double> final_epoch_loss;  // last epoch loss per tried rank
  bool schedule_exhausted = false;       // no increase seen; last model returned
  double wall_seconds = 0.0;
};

// Outer loop over increasing target ranks; each rank trains a fresh model
// (seed derived from (cfg.seed, kGreedyTag, rank)) unless warm_start is set.
// Stops the first time the objective strictly increases and returns the
// previous rank's model. An empty schedule means 1, 2, 3, ... up to min(n, m).
GreedyResult greedy_train(BatchSource& src, double lambda, const TrainConfig& cfg,
                          std::vector<index_t> schedule = {}, bool warm_start = false);

namespace detail {

// Per-batch scratch shared by the plain and cascaded trainers. Buffers are
// sized once for the widest batch; the kernels view them at the live width so
// the inner loops never allocate.
struct BatchWork {
  BatchWork(index_t n, index_t r, index_t b, int threads);

  Matrix s;      // n x b; holds S, then G = sign(S)
  Matrix c;      // r x b; W^T Y_b
  Matrix small;  // b x r; Y_b^T W or G^T W
  Matrix grad;   // n x r
  std::vector<Matrix> partials;
  std::vector<Matrix> thread_small;
  std::vector<double> block_abs;
};

// S = Y_b - W (W^T Y_b) into ws.s; returns sum |S|.
double residual_into(const Matrix& w, const Matrix& yb, BatchWork& ws, int threads);

// Fills ws.grad with the l1 subgradient, turning ws.s into G = sign(S).
// Returns sum |S|.
double grad_into(const Matrix& w, const Matrix& yb, BatchWork& ws, int threads);

// out = W (W^T Y_b); c_buf must hold r x width.
void forward_into(const Matrix& w, const Matrix& yb, Matrix& c_buf, Matrix& out,
                  int threads);

}  // namespace detail

}  // namespace bear
