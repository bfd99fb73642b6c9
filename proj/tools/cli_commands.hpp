#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bear/manifest.hpp"
#include "bear/matrix.hpp"

namespace bear::cli {

// Options shared by every command. memory_cap = 0 means unlimited.
struct CommonOpts {
  int threads = 1;
  std::uint64_t memory_cap = 0;
  bool shuffle = true;
  std::string manifest_path;  // empty: next to the first output
};

struct DecomposeOpts {
  std::string input, out_l, out_s;
  index_t rank = 1;
  float lr = 0.003f;
  index_t epochs = 50;
  index_t batch = 1000;
  std::uint64_t seed = 0;
  double train_frac = 1.0;
  // L and S always come from a frozen-model streaming pass after training;
  // the flag only makes that explicit in manifests.
  bool infer_only_after_train = true;
  CommonOpts common;
};

struct GreedyOpts {
  std::string input, out_l, out_s;
  std::optional<double> lambda;  // default 1/sqrt(max(n, m)), echoed in manifest
  float lr = 0.003f;
  index_t epochs = 50;
  index_t batch = 1000;
  std::uint64_t seed = 0;
  index_t rank_start = 1;
  index_t rank_step = 1;
  index_t rank_max = 0;  // 0: min(n, m)
  CommonOpts common;
};

struct NmfOpts {
  std::string input, out_w, out_h;
  index_t rank = 1;
  float lr = 0.003f;
  index_t epochs = 200;
  index_t batch = 1000;
  std::uint64_t seed = 0;
  CommonOpts common;
};

struct CascadeOpts {
  std::string input, out_spatial, out_temporal;
  std::string out_background;    // optional
  std::string out_temporal_csv;  // optional
  index_t rank1 = 1;
  index_t rank2 = 8;
  double mu = 1.0;
  float lr = 0.0002f;
  index_t epochs = 200;
  index_t batch = 512;
  std::uint64_t seed = 0;
  bool normalize_footprints = false;
  bool sequential = false;
  CommonOpts common;
};

struct BenchOpts {
  index_t n = 200;
  std::vector<index_t> ranks;
  std::vector<double> rhos;
  index_t trials = 5;
  std::optional<double> lambda;  // default 1/sqrt(n)
  std::string out_csv;
  float lr = 0.003f;
  index_t epochs = 50;
  index_t batch = 1000;
  std::uint64_t seed = 1;
  bool oracle = true;
  index_t oracle_max_n = 256;
  CommonOpts common;
};

struct GenOpts {
  std::string kind;  // lowrank | sparse | composite | video
  std::string out;
  std::uint64_t seed = 0;
  index_t n = 100;
  index_t rank = 1;
  double rho = 0.0;
  index_t rows = 0, cols = 0;  // composite
  index_t chunk_cols = 1024;
  index_t width = 64, height = 64, frames = 500, blobs = 8;  // video
  bool background = true;
  std::string out_truth_spatial, out_truth_temporal, out_truth_background;
  CommonOpts common;
};

struct InfoOpts {
  std::string input;
  index_t batch = 256;
  CommonOpts common;
};

// Each runs the command, writes outputs plus a RunManifest, and throws
// bear errors on failure (the main translates them to exit codes).
void run_decompose(const DecomposeOpts& opts);
void run_greedy(const GreedyOpts& opts);
void run_nmf(const NmfOpts& opts);
void run_cascade(const CascadeOpts& opts);
void run_bench(const BenchOpts& opts);
void run_gen(const GenOpts& opts);
void run_info(const InfoOpts& opts);

// Re-executes the command recorded in a manifest with its exact configuration.
void run_replay(const std::string& manifest_path);

std::uint64_t parse_byte_size(const std::string& text);  // "512M", "4G", "1024"

}  // namespace bear::cli
