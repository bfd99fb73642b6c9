#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "bear/baselines.hpp"
#include "bear/matrix.hpp"
#include "bear/solver.hpp"

namespace bear {

// Synthetic instances and the phase-diagram benchmark harness. Generators are
// pure functions of (dimensions, parameters, seed); every stream below is
// drawn through bear::Rng, so results are bitwise reproducible.

// L = X Z^T with X, Z in R^{n x r}, entries i.i.d. N(0, 1/n). X is filled
// first, then Z, each in column-major order.
Matrix gen_low_rank(index_t n, index_t r, std::uint64_t seed);

// Entries i.i.d. from P(0.1) = rho/2, P(-0.1) = rho/2, P(0) = 1 - rho, decided
// by one uniform draw per entry in column-major order.
Matrix gen_sparse(index_t n, double rho, std::uint64_t seed);

// Streams an arbitrary rows x cols composite (low-rank X Z^T plus the
// three-point sparse noise) to a sink in column chunks, never materializing
// more than one chunk. Each column's sparse stream is seeded independently,
// so the result does not depend on chunk_cols.
void gen_composite_stream(index_t rows, index_t cols, index_t r, double rho,
                          std::uint64_t seed, ColumnSink& sink,
                          index_t chunk_cols = 1024);

// --- blob video ---------------------------------------------------------------

struct VideoParams {
  index_t width = 64;
  index_t height = 64;
  index_t frames = 500;
  index_t blobs = 8;
  bool background = true;  // rank-1 smooth non-negative background
  // Activity traces: per-frame spike probability, amplitude range, and the
  // exponential decay constant in frames.
  double spike_prob = 0.02;
  double spike_amp_min = 1.0;
  double spike_amp_max = 2.0;
  double decay_frames = 6.0;
};

struct BlobVideoTruth {
  Matrix background;        // n x m, rank-1 (zero when disabled)
  Matrix spatial_truth;     // n x k Gaussian-profile masks, disjoint supports
  Matrix activation_truth;  // k x m non-negative sparse traces
  index_t width = 0;
  index_t height = 0;
};

// video = background + spatial_truth * activation_truth, entrywise >= 0.
// Throws ParameterError when the blobs cannot be packed on the grid.
std::pair<Matrix, BlobVideoTruth> gen_video(const VideoParams& params,
                                            std::uint64_t seed);

// --- phase diagram --------------------------------------------------------------

struct PhaseCellResult {
  index_t n = 0;
  index_t r = 0;
  double rho = 0.0;
  double lambda = 0.0;
  index_t trials = 0;
  double rel_err_mean = 0.0;
  double time_mean_seconds = 0.0;
  std::vector<index_t> chosen_ranks;
  index_t chosen_rank_mode = 0;
  // Oracle cross-check, only for cells under the oracle size cap.
  bool oracle_included = false;
  double ialm_rel_err_mean = 0.0;
  double bear_vs_ialm_mean = 0.0;
};

struct PhaseOptions {
  std::uint64_t master_seed = 1;
  bool include_oracle = true;    // subject to the size cap below
  index_t oracle_max_n = 256;    // full-matrix SVDs stay tractable under this
  double ialm_tol = 1e-6;
  int ialm_max_iters = 300;
};

// One (r, rho) cell: per trial, generate L + S, solve with greedy_train, and
// record the recovery error against the ground-truth L and the wall time.
// Trial streams derive from (master_seed, r, rho, trial).
PhaseCellResult phase_cell(index_t n, index_t r, double rho, double lambda,
                           const TrainConfig& cfg, index_t trials,
                           const PhaseOptions& opt = {});

// Grid sweep; writes one CSV row per cell with the stable schema
//   n, r, rho, lambda, trials, rel_err_mean, time_mean_seconds,
//   chosen_rank_mode
// plus the appended oracle columns ialm_rel_err_mean and bear_vs_ialm_mean
// (empty when the oracle was skipped). Pass an empty path to skip the CSV.
std::vector<PhaseCellResult> phase_diagram(index_t n,
                                           const std::vector<index_t>& ranks,
                                           const std::vector<double>& rhos,
                                           double lambda, const TrainConfig& cfg,
                                           index_t trials,
                                           const std::filesystem::path& out_csv,
                                           const PhaseOptions& opt = {});

}  // namespace bear
