#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bear/batch_source.hpp"
#include "bear/matrix.hpp"
#include "bear/solver.hpp"

namespace bear {

// Projective NMF through the same bilinear form: min ||Y - W W^T Y||_F^2 with
// W >= 0, optimized as the squared norm (same argmin, smooth gradient) with a
// non-negativity projection after every Adam step. Also the cascaded variant:
// a plain first factor splits Y into L + S, a ReLU feeds max(S, 0) to a second
// non-negative factor, and both train jointly on ||S||_1 + mu ||R||_F^2.

struct NmfModel {
  Matrix w;  // n x r, entrywise >= 0
  index_t rank() const { return w.cols(); }
};

// Entrywise max(w, 0), in place.
void project_nonneg(Matrix& w);

struct NmfTrainResult {
  NmfModel model;
  std::vector<double> epoch_loss;  // mean per-entry squared residual
  double wall_seconds = 0.0;
};

// Requires Y >= 0 entrywise (checked by a streaming pass; DomainError names
// the first offending entry). W starts from |N(0, 1/n)|.
NmfTrainResult nmf_train(BatchSource& src, index_t rank, const TrainConfig& cfg);

struct CascadeModel {
  Matrix w1;  // n x r1
  Matrix w2;  // n x r2, entrywise >= 0
  double mu = 1.0;
  index_t r1() const { return w1.cols(); }
  index_t r2() const { return w2.cols(); }
};

// Analytic gradients of ||S||_1 + mu ||R||_F^2 with S = Yb - W1 W1^T Yb,
// P = max(S, 0), R = P - W2 W2^T P. The squared term reaches W1 through the
// ReLU mask (indicator S > 0). Returned as (grad_w1, grad_w2).
std::pair<Matrix, Matrix> cascade_grads(const Matrix& w1, const Matrix& w2,
                                        const Matrix& yb, double mu);

struct CascadeTrainResult {
  CascadeModel model;
  std::vector<double> epoch_loss;  // mean per-entry (|S| + mu R^2)
  double wall_seconds = 0.0;
};

// Joint end-to-end training. With mu = 0 the W1 trajectory is bit-identical
// to train() under the same seed and W2 never leaves its init. sequential =
// true instead trains W1 alone first, then fits W2 on the frozen residuals
// (cfg.epochs each).
CascadeTrainResult cascade_train(BatchSource& src, index_t r1, index_t r2, double mu,
                                 const TrainConfig& cfg, bool sequential = false);

struct Footprints {
  Matrix spatial;   // n x r2: columns of W2
  Matrix temporal;  // r2 x m: W2^T max(S, 0), streamed
};

// normalize scales each spatial column to unit l2 norm and multiplies the
// inverse scale into the matching temporal row, leaving spatial * temporal
// unchanged. Zero columns are left alone.
Footprints extract_footprints(const CascadeModel& model, BatchSource& src,
                              bool normalize = false, int threads = 1);

// H = W^T Y in r x m column chunks, streamed to the sink in one sequential
// pass (the coefficient matrix of a projective factorization).
void project_coefficients_stream(const Matrix& w, BatchSource& src,
                                 ColumnSink& sink);

}  // namespace bear
