#include "cli_commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "bear/batch_source.hpp"
#include "bear/bmat.hpp"
#include "bear/budget.hpp"
#include "bear/cascade.hpp"
#include "bear/csv.hpp"
#include "bear/errors.hpp"
#include "bear/solver.hpp"
#include "bear/synth.hpp"
#include "bear/version.hpp"

namespace bear::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void note(const std::string& line) { std::fprintf(stderr, "[bear] %s\n", line.c_str()); }

std::string manifest_path_or(const CommonOpts& common, const std::string& base) {
  return common.manifest_path.empty() ? base + ".manifest" : common.manifest_path;
}

void apply_common(const CommonOpts& common) {
  budget::set_cap(common.memory_cap);
  budget::reset_peak();
}

void put_common(RunManifest& man, const char* command, const CommonOpts& common) {
  man.set("command", command);
  man.set("version", kVersion);
  man.set_i64("threads", common.threads);
  man.set_u64("memory_cap", common.memory_cap);
  man.set_bool("shuffle", common.shuffle);
}

CommonOpts common_from(const RunManifest& man, const std::string& manifest_path) {
  CommonOpts common;
  common.threads = static_cast<int>(man.get_i64("threads"));
  common.memory_cap = man.get_u64("memory_cap");
  common.shuffle = man.get_bool("shuffle");
  common.manifest_path = manifest_path;
  return common;
}

TrainConfig make_train_config(float lr, index_t epochs, index_t batch,
                              std::uint64_t seed, const CommonOpts& common) {
  TrainConfig cfg;
  cfg.learning_rate = lr;
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.seed = seed;
  cfg.shuffle = common.shuffle;
  cfg.threads = common.threads;
  return cfg;
}

// Streams L and S of a trained first factor over every column of the input.
void write_decomposition(const Matrix& w, const std::string& input,
                         const std::string& out_l, const std::string& out_s,
                         index_t batch, std::uint64_t seed,
                         const CommonOpts& common) {
  BatchSource all = BatchSource::from_file(input, batch, seed, common.shuffle);
  BearModel model{w};
  BmatColumnSink l_sink(out_l, all.rows(), all.cols());
  BmatColumnSink s_sink(out_s, all.rows(), all.cols());
  infer_stream(model, all, &l_sink, &s_sink, common.threads);
  l_sink.close();
  s_sink.close();
}

std::string join_i64(const std::vector<index_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string join_f64(const std::vector<double>& values) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    out += buf;
  }
  return out;
}

std::vector<index_t> split_i64(const std::string& text) {
  std::vector<index_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const auto len = comma == std::string::npos ? std::string::npos : comma - pos;
    out.push_back(static_cast<index_t>(std::stoll(text.substr(pos, len))));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> split_f64(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const auto len = comma == std::string::npos ? std::string::npos : comma - pos;
    out.push_back(std::stod(text.substr(pos, len)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

std::uint64_t parse_byte_size(const std::string& text) {
  if (text.empty()) throw ParameterError("empty byte size");
  std::uint64_t scale = 1;
  std::string digits = text;
  switch (text.back()) {
    case 'k': case 'K': scale = 1024ULL; digits.pop_back(); break;
    case 'm': case 'M': scale = 1024ULL * 1024; digits.pop_back(); break;
    case 'g': case 'G': scale = 1024ULL * 1024 * 1024; digits.pop_back(); break;
    default: break;
  }
  std::size_t used = 0;
  const std::uint64_t value = std::stoull(digits, &used);
  if (used != digits.size())
    throw ParameterError("bad byte size '" + text + "'");
  return value * scale;
}

void run_decompose(const DecomposeOpts& o) {
  const auto t0 = Clock::now();
  apply_common(o.common);
  if (!(o.train_frac > 0.0 && o.train_frac <= 1.0))
    throw ParameterError("--train-frac must lie in (0, 1]");

  const BmatHeader header = read_bmat_header(o.input);
  const index_t m = static_cast<index_t>(header.cols);
  const index_t train_cols =
      std::min<index_t>(m, static_cast<index_t>(
                               std::ceil(o.train_frac * static_cast<double>(m))));

  note("decompose: " + std::to_string(header.rows) + "x" + std::to_string(m) +
       ", rank " + std::to_string(o.rank) + ", training on " +
       std::to_string(train_cols) + " columns");

  const TrainConfig cfg = make_train_config(o.lr, o.epochs, o.batch, o.seed, o.common);
  BatchSource train_src = BatchSource::from_file(o.input, o.batch, o.seed,
                                                 o.common.shuffle, train_cols);
  const TrainResult trained = train(train_src, o.rank, cfg);
  note("training done in " + std::to_string(trained.wall_seconds) + " s");

  write_decomposition(trained.model.w, o.input, o.out_l, o.out_s, o.batch, o.seed,
                      o.common);

  RunManifest man;
  put_common(man, "decompose", o.common);
  man.set("input", o.input);
  man.set("out_l", o.out_l);
  man.set("out_s", o.out_s);
  man.set_i64("rank", o.rank);
  man.set_f32("lr", o.lr);
  man.set_i64("epochs", o.epochs);
  man.set_i64("batch", o.batch);
  man.set_u64("seed", o.seed);
  man.set_f64("train_frac", o.train_frac);
  man.set_bool("infer_only_after_train", o.infer_only_after_train);
  man.set_u64("rows", header.rows);
  man.set_u64("cols", header.cols);
  man.set_f64("wall_time_seconds", seconds_since(t0));
  man.set_u64("peak_bytes", budget::peak());
  man.set_trace("loss_trace", trained.epoch_loss);
  man.write(manifest_path_or(o.common, o.out_l));
}

void run_greedy(const GreedyOpts& o) {
  const auto t0 = Clock::now();
  apply_common(o.common);
  const BmatHeader header = read_bmat_header(o.input);
  const index_t n = static_cast<index_t>(header.rows);
  const index_t m = static_cast<index_t>(header.cols);
  const double lambda = o.lambda ? *o.lambda : default_lambda(n, m);
  if (o.rank_start < 1 || o.rank_step < 1)
    throw ParameterError("--rank-start and --rank-step must be >= 1");
  const index_t rank_max = o.rank_max > 0 ? o.rank_max : std::min(n, m);

  std::vector<index_t> schedule;
  for (index_t r = o.rank_start; r <= rank_max; r += o.rank_step) schedule.push_back(r);
  if (schedule.empty()) throw ParameterError("empty rank schedule");

  note("greedy: " + std::to_string(n) + "x" + std::to_string(m) + ", lambda " +
       std::to_string(lambda) + ", ranks " + std::to_string(o.rank_start) + ".." +
       std::to_string(rank_max));

  const TrainConfig cfg = make_train_config(o.lr, o.epochs, o.batch, o.seed, o.common);
  BatchSource src = BatchSource::from_file(o.input, o.batch, o.seed, o.common.shuffle);
  const GreedyResult greedy = greedy_train(src, lambda, cfg, schedule);
  note("chosen rank " + std::to_string(greedy.chosen_rank) + " after trying " +
       std::to_string(greedy.tried_ranks.size()) + " ranks");

  write_decomposition(greedy.model.w, o.input, o.out_l, o.out_s, o.batch, o.seed,
                      o.common);

  RunManifest man;
  put_common(man, "greedy", o.common);
  man.set("input", o.input);
  man.set("out_l", o.out_l);
  man.set("out_s", o.out_s);
  man.set_f64("lambda", lambda);
  man.set_bool("lambda_defaulted", !o.lambda.has_value());
  man.set_f32("lr", o.lr);
  man.set_i64("epochs", o.epochs);
  man.set_i64("batch", o.batch);
  man.set_u64("seed", o.seed);
  man.set_i64("rank_start", o.rank_start);
  man.set_i64("rank_step", o.rank_step);
  man.set_i64("rank_max", o.rank_max);
  man.set_i64("chosen_rank", greedy.chosen_rank);
  man.set_bool("schedule_exhausted", greedy.schedule_exhausted);
  man.set("tried_ranks", join_i64(greedy.tried_ranks));
  man.set_trace("objective_trace", greedy.objective_trace);
  man.set_u64("rows", header.rows);
  man.set_u64("cols", header.cols);
  man.set_f64("wall_time_seconds", seconds_since(t0));
  man.set_u64("peak_bytes", budget::peak());
  man.write(manifest_path_or(o.common, o.out_l));
}

void run_nmf(const NmfOpts& o) {
  const auto t0 = Clock::now();
  apply_common(o.common);
  const BmatHeader header = read_bmat_header(o.input);
  note("nmf: " + std::to_string(header.rows) + "x" + std::to_string(header.cols) +
       ", rank " + std::to_string(o.rank));

  const TrainConfig cfg = make_train_config(o.lr, o.epochs, o.batch, o.seed, o.common);
  BatchSource src = BatchSource::from_file(o.input, o.batch, o.seed, o.common.shuffle);
  const NmfTrainResult trained = nmf_train(src, o.rank, cfg);

  write_bmat(trained.model.w, o.out_w);
  BatchSource all = BatchSource::from_file(o.input, o.batch, o.seed, o.common.shuffle);
  BmatColumnSink h_sink(o.out_h, o.rank, all.cols());
  project_coefficients_stream(trained.model.w, all, h_sink);
  h_sink.close();

  RunManifest man;
  put_common(man, "nmf", o.common);
  man.set("input", o.input);
  man.set("out_w", o.out_w);
  man.set("out_h", o.out_h);
  man.set_i64("rank", o.rank);
  man.set_f32("lr", o.lr);
  man.set_i64("epochs", o.epochs);
  man.set_i64("batch", o.batch);
  man.set_u64("seed", o.seed);
  man.set_f64("wall_time_seconds", seconds_since(t0));
  man.set_u64("peak_bytes", budget::peak());
  man.set_trace("loss_trace", trained.epoch_loss);
  man.write(manifest_path_or(o.common, o.out_w));
}

void run_cascade(const CascadeOpts& o) {
  const auto t0 = Clock::now();
  apply_common(o.common);
  const BmatHeader header = read_bmat_header(o.input);
  note("cascade: " + std::to_string(header.rows) + "x" + std::to_string(header.cols) +
       ", ranks " + std::to_string(o.rank1) + "+" + std::to_string(o.rank2) +
       ", mu " + std::to_string(o.mu));

  const TrainConfig cfg = make_train_config(o.lr, o.epochs, o.batch, o.seed, o.common);
  BatchSource src = BatchSource::from_file(o.input, o.batch, o.seed, o.common.shuffle);
  const CascadeTrainResult trained =
      cascade_train(src, o.rank1, o.rank2, o.mu, cfg, o.sequential);

  BatchSource pass = BatchSource::from_file(o.input, o.batch, o.seed, o.common.shuffle);
  const Footprints fp =
      extract_footprints(trained.model, pass, o.normalize_footprints, o.common.threads);
  write_bmat(fp.spatial, o.out_spatial);
  write_bmat(fp.temporal, o.out_temporal);

  if (!o.out_background.empty()) {
    BatchSource bg = BatchSource::from_file(o.input, o.batch, o.seed, o.common.shuffle);
    BearModel first{trained.model.w1};
    BmatColumnSink l_sink(o.out_background, bg.rows(), bg.cols());
    infer_stream(first, bg, &l_sink, nullptr, o.common.threads);
    l_sink.close();
  }

  if (!o.out_temporal_csv.empty()) {
    std::vector<std::string> columns = {"frame"};
    for (index_t c = 0; c < o.rank2; ++c) columns.push_back("c" + std::to_string(c));
    std::vector<MetricRow> rows;
    rows.reserve(static_cast<std::size_t>(fp.temporal.cols()));
    for (index_t tcol = 0; tcol < fp.temporal.cols(); ++tcol) {
      MetricRow row = {static_cast<std::int64_t>(tcol)};
      for (index_t c = 0; c < o.rank2; ++c)
        row.emplace_back(static_cast<double>(fp.temporal(c, tcol)));
      rows.push_back(std::move(row));
    }
    write_metrics_csv(columns, rows, o.out_temporal_csv);
  }

  RunManifest man;
  put_common(man, "cascade", o.common);
  man.set("input", o.input);
  man.set("out_spatial", o.out_spatial);
  man.set("out_temporal", o.out_temporal);
  man.set("out_background", o.out_background);
  man.set("out_temporal_csv", o.out_temporal_csv);
  man.set_i64("rank1", o.rank1);
  man.set_i64("rank2", o.rank2);
  man.set_f64("mu", o.mu);
  man.set_f32("lr", o.lr);
  man.set_i64("epochs", o.epochs);
  man.set_i64("batch", o.batch);
  man.set_u64("seed", o.seed);
  man.set_bool("normalize_footprints", o.normalize_footprints);
  man.set_bool("sequential", o.sequential);
  man.set_f64("wall_time_seconds", seconds_since(t0));
  man.set_u64("peak_bytes", budget::peak());
  man.set_trace("loss_trace", trained.epoch_loss);
  man.write(manifest_path_or(o.common, o.out_spatial));
}

void run_bench(const BenchOpts& o) {
  const auto t0 = Clock::now();
  apply_common(o.common);
  if (o.out_csv.empty()) throw ParameterError("--out is required for bench");
  const double lambda =
      o.lambda ? *o.lambda : 1.0 / std::sqrt(static_cast<double>(o.n));

  note("bench: n=" + std::to_string(o.n) + ", " + std::to_string(o.ranks.size()) +
       " ranks x " + std::to_string(o.rhos.size()) + " rhos, " +
       std::to_string(o.trials) + " trials");

  const TrainConfig cfg = make_train_config(o.lr, o.epochs, o.batch, o.seed, o.common);
  PhaseOptions popt;
  popt.master_seed = o.seed;
  popt.include_oracle = o.oracle;
  popt.oracle_max_n = o.oracle_max_n;
  phase_diagram(o.n, o.ranks, o.rhos, lambda, cfg, o.trials, o.out_csv, popt);

  RunManifest man;
  put_common(man, "bench", o.common);
  man.set("out", o.out_csv);
  man.set_i64("n", o.n);
  man.set("ranks", join_i64(o.ranks));
  {
    std::string rhos = join_f64(o.rhos);
    man.set("rhos", rhos);
  }
  man.set_i64("trials", o.trials);
  man.set_f64("lambda", lambda);
  man.set_bool("lambda_defaulted", !o.lambda.has_value());
  man.set_f32("lr", o.lr);
  man.set_i64("epochs", o.epochs);
  man.set_i64("batch", o.batch);
  man.set_u64("seed", o.seed);
  man.set_bool("oracle", o.oracle);
  man.set_i64("oracle_max_n", o.oracle_max_n);
  man.set_f64("wall_time_seconds", seconds_since(t0));
  man.write(manifest_path_or(o.common, o.out_csv));
}

void run_gen(const GenOpts& o) {
  const auto t0 = Clock::now();
  apply_common(o.common);
  if (o.out.empty()) throw ParameterError("--out is required for gen");

  RunManifest man;
  put_common(man, "gen", o.common);
  man.set("kind", o.kind);
  man.set("out", o.out);
  man.set_u64("seed", o.seed);

  if (o.kind == "lowrank") {
    write_bmat(gen_low_rank(o.n, o.rank, o.seed), o.out);
    man.set_i64("n", o.n);
    man.set_i64("rank", o.rank);
  } else if (o.kind == "sparse") {
    write_bmat(gen_sparse(o.n, o.rho, o.seed), o.out);
    man.set_i64("n", o.n);
    man.set_f64("rho", o.rho);
  } else if (o.kind == "composite") {
    const index_t rows = o.rows > 0 ? o.rows : o.n;
    const index_t cols = o.cols > 0 ? o.cols : o.n;
    BmatColumnSink sink(o.out, rows, cols);
    gen_composite_stream(rows, cols, o.rank, o.rho, o.seed, sink, o.chunk_cols);
    sink.close();
    man.set_i64("rows", rows);
    man.set_i64("cols", cols);
    man.set_i64("rank", o.rank);
    man.set_f64("rho", o.rho);
    man.set_i64("chunk_cols", o.chunk_cols);
  } else if (o.kind == "video") {
    VideoParams params;
    params.width = o.width;
    params.height = o.height;
    params.frames = o.frames;
    params.blobs = o.blobs;
    params.background = o.background;
    auto [video, truth] = gen_video(params, o.seed);
    write_bmat(video, o.out);
    if (!o.out_truth_spatial.empty() && o.blobs > 0)
      write_bmat(truth.spatial_truth, o.out_truth_spatial);
    if (!o.out_truth_temporal.empty() && o.blobs > 0)
      write_bmat(truth.activation_truth, o.out_truth_temporal);
    if (!o.out_truth_background.empty())
      write_bmat(truth.background, o.out_truth_background);
    man.set_i64("width", o.width);
    man.set_i64("height", o.height);
    man.set_i64("frames", o.frames);
    man.set_i64("blobs", o.blobs);
    man.set_bool("background", o.background);
    man.set("out_truth_spatial", o.out_truth_spatial);
    man.set("out_truth_temporal", o.out_truth_temporal);
    man.set("out_truth_background", o.out_truth_background);
  } else {
    throw ParameterError("unknown gen kind '" + o.kind +
                         "' (expected lowrank|sparse|composite|video)");
  }

  man.set_f64("wall_time_seconds", seconds_since(t0));
  man.write(manifest_path_or(o.common, o.out));
}

void run_info(const InfoOpts& o) {
  apply_common(o.common);
  const BmatHeader header = read_bmat_header(o.input);  // validates exact size
  std::printf("path=%s\n", o.input.c_str());
  std::printf("rows=%llu\n", static_cast<unsigned long long>(header.rows));
  std::printf("cols=%llu\n", static_cast<unsigned long long>(header.cols));
  std::printf("dtype=%u\n", header.dtype);
  std::printf("payload_bytes=%llu\n",
              static_cast<unsigned long long>(header.payload_bytes()));

  BatchSource src = BatchSource::from_file(o.input, o.batch, 0, false);
  Matrix batch;
  double l1 = 0.0, sq = 0.0;
  src.begin_epoch(0, /*sequential=*/true);
  while (src.next_batch(batch)) {
    const float* p = batch.data();
    for (index_t i = 0; i < batch.size(); ++i) {
      const double x = p[i];
      l1 += std::abs(x);
      sq += x * x;
    }
  }
  std::printf("l1_norm=%.9g\n", l1);
  std::printf("fro_norm=%.9g\n", std::sqrt(sq));

  if (!o.common.manifest_path.empty()) {
    RunManifest man;
    put_common(man, "info", o.common);
    man.set("input", o.input);
    man.set_i64("batch", o.batch);
    man.write(o.common.manifest_path);
  }
}

void run_replay(const std::string& manifest_path) {
  const RunManifest man = RunManifest::load(manifest_path);
  const std::string command = man.get("command");
  note("replaying " + command + " from " + manifest_path);

  if (command == "decompose") {
    DecomposeOpts o;
    o.common = common_from(man, manifest_path);
    o.input = man.get("input");
    o.out_l = man.get("out_l");
    o.out_s = man.get("out_s");
    o.rank = man.get_i64("rank");
    o.lr = man.get_f32("lr");
    o.epochs = man.get_i64("epochs");
    o.batch = man.get_i64("batch");
    o.seed = man.get_u64("seed");
    o.train_frac = man.get_f64("train_frac");
    o.infer_only_after_train = man.get_bool("infer_only_after_train");
    run_decompose(o);
  } else if (command == "greedy") {
    GreedyOpts o;
    o.common = common_from(man, manifest_path);
    o.input = man.get("input");
    o.out_l = man.get("out_l");
    o.out_s = man.get("out_s");
    o.lambda = man.get_f64("lambda");
    o.lr = man.get_f32("lr");
    o.epochs = man.get_i64("epochs");
    o.batch = man.get_i64("batch");
    o.seed = man.get_u64("seed");
    o.rank_start = man.get_i64("rank_start");
    o.rank_step = man.get_i64("rank_step");
    o.rank_max = man.get_i64("rank_max");
    run_greedy(o);
  } else if (command == "nmf") {
    NmfOpts o;
    o.common = common_from(man, manifest_path);
    o.input = man.get("input");
    o.out_w = man.get("out_w");
    o.out_h = man.get("out_h");
    o.rank = man.get_i64("rank");
    o.lr = man.get_f32("lr");
    o.epochs = man.get_i64("epochs");
    o.batch = man.get_i64("batch");
    o.seed = man.get_u64("seed");
    run_nmf(o);
  } else if (command == "cascade") {
    CascadeOpts o;
    o.common = common_from(man, manifest_path);
    o.input = man.get("input");
    o.out_spatial = man.get("out_spatial");
    o.out_temporal = man.get("out_temporal");
    o.out_background = man.get("out_background");
    o.out_temporal_csv = man.get("out_temporal_csv");
    o.rank1 = man.get_i64("rank1");
    o.rank2 = man.get_i64("rank2");
    o.mu = man.get_f64("mu");
    o.lr = man.get_f32("lr");
    o.epochs = man.get_i64("epochs");
    o.batch = man.get_i64("batch");
    o.seed = man.get_u64("seed");
    o.normalize_footprints = man.get_bool("normalize_footprints");
    o.sequential = man.get_bool("sequential");
    run_cascade(o);
  } else if (command == "bench") {
    BenchOpts o;
    o.common = common_from(man, manifest_path);
    o.out_csv = man.get("out");
    o.n = man.get_i64("n");
    o.ranks = split_i64(man.get("ranks"));
    o.rhos = split_f64(man.get("rhos"));
    o.trials = man.get_i64("trials");
    o.lambda = man.get_f64("lambda");
    o.lr = man.get_f32("lr");
    o.epochs = man.get_i64("epochs");
    o.batch = man.get_i64("batch");
    o.seed = man.get_u64("seed");
    o.oracle = man.get_bool("oracle");
    o.oracle_max_n = man.get_i64("oracle_max_n");
    run_bench(o);
  } else if (command == "gen") {
    GenOpts o;
    o.common = common_from(man, manifest_path);
    o.kind = man.get("kind");
    o.out = man.get("out");
    o.seed = man.get_u64("seed");
    if (o.kind == "lowrank") {
      o.n = man.get_i64("n");
      o.rank = man.get_i64("rank");
    } else if (o.kind == "sparse") {
      o.n = man.get_i64("n");
      o.rho = man.get_f64("rho");
    } else if (o.kind == "composite") {
      o.rows = man.get_i64("rows");
      o.cols = man.get_i64("cols");
      o.rank = man.get_i64("rank");
      o.rho = man.get_f64("rho");
      o.chunk_cols = man.get_i64("chunk_cols");
    } else if (o.kind == "video") {
      o.width = man.get_i64("width");
      o.height = man.get_i64("height");
      o.frames = man.get_i64("frames");
      o.blobs = man.get_i64("blobs");
      o.background = man.get_bool("background");
      o.out_truth_spatial = man.get("out_truth_spatial");
      o.out_truth_temporal = man.get("out_truth_temporal");
      o.out_truth_background = man.get("out_truth_background");
    }
    run_gen(o);
  } else if (command == "info") {
    InfoOpts o;
    o.common = common_from(man, manifest_path);
    o.input = man.get("input");
    o.batch = man.get_i64("batch");
    run_info(o);
  } else {
    throw FormatError("manifest names unknown command '" + command + "'");
  }
}

}  // namespace bear::cli
