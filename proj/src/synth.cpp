#include "bear/synth.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <string>

#include "bear/batch_source.hpp"
#include "bear/csv.hpp"
#include "bear/errors.hpp"
#include "bear/la.hpp"
#include "bear/rng.hpp"

namespace bear {

namespace {

constexpr std::uint64_t kLowRankX = 0x4C4F575258ULL;
constexpr std::uint64_t kLowRankZ = 0x4C4F57525AULL;
constexpr std::uint64_t kSparseTag = 0x535052ULL;
constexpr std::uint64_t kSparseCol = 0x53505243ULL;
constexpr std::uint64_t kVideoTag = 0x564944ULL;
constexpr std::uint64_t kPhaseTag = 0x504841ULL;

Matrix gaussian_matrix(index_t rows, index_t cols, double stddev, std::uint64_t seed) {
  Matrix out;
  out.resize_uninit(rows, cols);
  Rng rng(seed);
  for (index_t i = 0; i < out.size(); ++i)
    out.data()[i] = static_cast<float>(rng.normal() * stddev);
  return out;
}

// One uniform draw per entry: [0, rho/2) -> +0.1, [rho/2, rho) -> -0.1.
inline float sparse_draw(Rng& rng, double rho) {
  const double u = rng.uniform();
  if (u < rho / 2.0) return 0.1f;
  if (u < rho) return -0.1f;
  return 0.0f;
}

std::uint64_t rho_bits(double rho) { return std::bit_cast<std::uint64_t>(rho); }

}  // namespace

Matrix gen_low_rank(index_t n, index_t r, std::uint64_t seed) {
  if (n < 1) throw ParameterError("gen_low_rank: n must be >= 1");
  if (r < 1 || r > n)
    throw ParameterError("gen_low_rank: r must lie in [1, n], got " +
                         std::to_string(r));
  const double stddev = 1.0 / std::sqrt(static_cast<double>(n));
  const Matrix x = gaussian_matrix(n, r, stddev, derive_seed(seed, kLowRankX));
  const Matrix z = gaussian_matrix(n, r, stddev, derive_seed(seed, kLowRankZ));
  Matrix l;
  l.resize_uninit(n, n);
  la::view(l).noalias() = la::view(x) * la::view(z).transpose();
  return l;
}

Matrix gen_sparse(index_t n, double rho, std::uint64_t seed) {
  if (n < 1) throw ParameterError("gen_sparse: n must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw ParameterError("gen_sparse: rho must lie in [0, 1], got " +
                         std::to_string(rho));
  Matrix s;
  s.resize_uninit(n, n);
  Rng rng(derive_seed(seed, kSparseTag));
  for (index_t i = 0; i < s.size(); ++i) s.data()[i] = sparse_draw(rng, rho);
  return s;
}

void gen_composite_stream(index_t rows, index_t cols, index_t r, double rho,
                          std::uint64_t seed, ColumnSink& sink, index_t chunk_cols) {
  if (rows < 1 || cols < 1) throw ParameterError("gen_composite_stream: empty shape");
  if (r < 1 || r > std::min(rows, cols))
    throw ParameterError("gen_composite_stream: r out of range");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw ParameterError("gen_composite_stream: rho must lie in [0, 1]");
  if (chunk_cols < 1) throw ParameterError("gen_composite_stream: chunk_cols >= 1");

  const double stddev = 1.0 / std::sqrt(static_cast<double>(rows));
  const Matrix x = gaussian_matrix(rows, r, stddev, derive_seed(seed, kLowRankX));
  const Matrix z = gaussian_matrix(cols, r, stddev, derive_seed(seed, kLowRankZ));

  Matrix chunk;
  for (index_t j0 = 0; j0 < cols; j0 += chunk_cols) {
    const index_t width = std::min(chunk_cols, cols - j0);
    chunk.resize_uninit(rows, width);
    la::view(chunk).noalias() =
        la::view(x) * la::cols(const_cast<Matrix&>(z), j0, width).transpose();
    for (index_t t = 0; t < width; ++t) {
      Rng rng(derive_seed(seed, kSparseCol, static_cast<std::uint64_t>(j0 + t)));
      float* col = chunk.col(t);
      for (index_t i = 0; i < rows; ++i) col[i] += sparse_draw(rng, rho);
    }
    sink.append(chunk);
  }
}

std::pair<Matrix, BlobVideoTruth> gen_video(const VideoParams& params,
                                            std::uint64_t seed) {
  const index_t w = params.width, h = params.height;
  const index_t n = w * h, m = params.frames, k = params.blobs;
  if (w < 1 || h < 1 || m < 1) throw ParameterError("gen_video: empty dimensions");
  if (k < 0) throw ParameterError("gen_video: blobs must be >= 0");

  Rng rng(derive_seed(seed, kVideoTag));
  BlobVideoTruth truth;
  truth.width = w;
  truth.height = h;

  // Blob layout: one blob per grid cell, profile truncated at 3 sigma, so
  // supports are disjoint by construction.
  truth.spatial_truth.resize(n, k);
  truth.activation_truth.resize(k, m);
  if (k > 0) {
    const index_t grid_cols =
        static_cast<index_t>(std::ceil(std::sqrt(static_cast<double>(k))));
    const index_t grid_rows = (k + grid_cols - 1) / grid_cols;
    const double cell_w = static_cast<double>(w) / static_cast<double>(grid_cols);
    const double cell_h = static_cast<double>(h) / static_cast<double>(grid_rows);
    const double sigma = std::min(cell_w, cell_h) / 8.0;
    if (sigma < 0.75)
      throw ParameterError("gen_video: cannot pack " + std::to_string(k) +
                           " blobs on a " + std::to_string(w) + "x" +
                           std::to_string(h) + " grid");
    for (index_t b = 0; b < k; ++b) {
      const index_t gx = b % grid_cols, gy = b / grid_cols;
      const double cx =
          (gx + 0.5) * cell_w + (rng.uniform() - 0.5) * cell_w * 0.25;
      const double cy =
          (gy + 0.5) * cell_h + (rng.uniform() - 0.5) * cell_h * 0.25;
      for (index_t py = 0; py < h; ++py) {
        for (index_t px = 0; px < w; ++px) {
          const double dx = px - cx, dy = py - cy;
          const double d2 = dx * dx + dy * dy;
          if (d2 > 9.0 * sigma * sigma) continue;
          truth.spatial_truth(py * w + px, b) =
              static_cast<float>(std::exp(-d2 / (2.0 * sigma * sigma)));
        }
      }
    }
    // Calcium-like traces: sparse spikes with exponential decay, bright
    // enough that the activity stands clear of the background.
    const double decay = std::exp(-1.0 / params.decay_frames);
    for (index_t b = 0; b < k; ++b) {
      double level = 0.0;
      for (index_t t = 0; t < m; ++t) {
        level *= decay;
        if (rng.uniform() < params.spike_prob)
          level += params.spike_amp_min +
                   (params.spike_amp_max - params.spike_amp_min) * rng.uniform();
        truth.activation_truth(b, t) = static_cast<float>(level);
      }
    }
  }

  truth.background.resize(n, m);
  if (params.background) {
    // Smooth spatial profile times a slowly varying positive temporal profile.
    std::vector<float> u(static_cast<std::size_t>(n));
    const double cx = w / 2.0 + (rng.uniform() - 0.5) * w * 0.2;
    const double cy = h / 2.0 + (rng.uniform() - 0.5) * h * 0.2;
    const double spread = 0.4 * std::min(w, h);
    for (index_t py = 0; py < h; ++py)
      for (index_t px = 0; px < w; ++px) {
        const double dx = px - cx, dy = py - cy;
        u[static_cast<std::size_t>(py * w + px)] = static_cast<float>(
            0.7 + 0.3 * std::exp(-(dx * dx + dy * dy) / (2.0 * spread * spread)));
      }
    for (index_t t = 0; t < m; ++t) {
      const float v = static_cast<float>(
          1.0 + 0.05 * std::sin(2.0 * std::numbers::pi * t / 137.0));
      float* col = truth.background.col(t);
      for (index_t i = 0; i < n; ++i) col[i] = u[static_cast<std::size_t>(i)] * v;
    }
  }

  Matrix video = truth.background;
  if (k > 0)
    la::view(video).noalias() +=
        la::view(truth.spatial_truth) * la::view(truth.activation_truth);
  return {std::move(video), std::move(truth)};
}

PhaseCellResult phase_cell(index_t n, index_t r, double rho, double lambda,
                           const TrainConfig& cfg, index_t trials,
                           const PhaseOptions& opt) {
  if (trials < 1) throw ParameterError("phase_cell: trials must be >= 1");
  PhaseCellResult cell;
  cell.n = n;
  cell.r = r;
  cell.rho = rho;
  cell.lambda = lambda;
  cell.trials = trials;

  double err_sum = 0.0, time_sum = 0.0, ialm_err_sum = 0.0, cross_sum = 0.0;
  const bool with_oracle = opt.include_oracle && n <= opt.oracle_max_n;

  for (index_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t cell_seed =
        derive_seed(opt.master_seed, kPhaseTag, static_cast<std::uint64_t>(r),
                    rho_bits(rho), static_cast<std::uint64_t>(trial));
    const Matrix l_true = gen_low_rank(n, r, derive_seed(cell_seed, 0xA));
    const Matrix s_true = gen_sparse(n, rho, derive_seed(cell_seed, 0xB));
    Matrix y = l_true;
    la::view(y) += la::view(s_true);

    TrainConfig trial_cfg = cfg;
    trial_cfg.seed = derive_seed(cell_seed, 0xD);
    BatchSource src = BatchSource::from_matrix(std::move(y), cfg.batch_size,
                                               derive_seed(cell_seed, 0xC),
                                               cfg.shuffle);
    GreedyResult greedy = greedy_train(src, lambda, trial_cfg);
    const Matrix l_hat = infer(greedy.model, src, cfg.threads).l;

    err_sum += relative_error(l_true, l_hat);
    time_sum += greedy.wall_seconds;
    cell.chosen_ranks.push_back(greedy.chosen_rank);

    if (with_oracle) {
      Matrix y_full = l_true;
      la::view(y_full) += la::view(s_true);
      IalmConfig icfg;
      icfg.lambda = lambda;
      icfg.tol = opt.ialm_tol;
      icfg.max_iters = opt.ialm_max_iters;
      const IalmResult oracle = ialm_rpca(y_full, icfg);
      ialm_err_sum += relative_error(l_true, oracle.l);
      cross_sum += relative_error(oracle.l, l_hat);
    }
  }

  cell.rel_err_mean = err_sum / static_cast<double>(trials);
  cell.time_mean_seconds = time_sum / static_cast<double>(trials);
  cell.oracle_included = with_oracle;
  if (with_oracle) {
    cell.ialm_rel_err_mean = ialm_err_sum / static_cast<double>(trials);
    cell.bear_vs_ialm_mean = cross_sum / static_cast<double>(trials);
  }

  std::map<index_t, index_t> counts;
  for (index_t rank : cell.chosen_ranks) counts[rank]++;
  index_t best_count = 0;
  for (const auto& [rank, count] : counts) {
    if (count > best_count) {  // ties resolve to the smallest rank
      best_count = count;
      cell.chosen_rank_mode = rank;
    }
  }
  return cell;
}

std::vector<PhaseCellResult> phase_diagram(index_t n,
                                           const std::vector<index_t>& ranks,
                                           const std::vector<double>& rhos,
                                           double lambda, const TrainConfig& cfg,
                                           index_t trials,
                                           const std::filesystem::path& out_csv,
                                           const PhaseOptions& opt) {
  if (ranks.empty() || rhos.empty())
    throw ParameterError("phase_diagram: rank and rho lists must be non-empty");
  std::vector<PhaseCellResult> cells;
  cells.reserve(ranks.size() * rhos.size());
  for (index_t r : ranks)
    for (double rho : rhos)
      cells.push_back(phase_cell(n, r, rho, lambda, cfg, trials, opt));

  if (!out_csv.empty()) {
    const std::vector<std::string> columns = {
        "n", "r", "rho", "lambda", "trials", "rel_err_mean",
        "time_mean_seconds", "chosen_rank_mode", "ialm_rel_err_mean",
        "bear_vs_ialm_mean"};
    std::vector<MetricRow> rows;
    for (const auto& c : cells) {
      MetricRow row = {static_cast<std::int64_t>(c.n),
                       static_cast<std::int64_t>(c.r),
                       c.rho,
                       c.lambda,
                       static_cast<std::int64_t>(c.trials),
                       c.rel_err_mean,
                       c.time_mean_seconds,
                       static_cast<std::int64_t>(c.chosen_rank_mode)};
      if (c.oracle_included) {
        row.emplace_back(c.ialm_rel_err_mean);
        row.emplace_back(c.bear_vs_ialm_mean);
      } else {
        row.emplace_back(std::string());
        row.emplace_back(std::string());
      }
      rows.push_back(std::move(row));
    }
    write_metrics_csv(columns, rows, out_csv);
  }
  return cells;
}

}  // namespace bear
