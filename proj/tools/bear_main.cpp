// Command-line surface for the toolkit: streaming low-rank + sparse
// decomposition, greedy rank search, projective NMF, the cascaded
// footprint-extraction pipeline, benchmark sweeps and BMAT utilities.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "bear/errors.hpp"
#include "bear/version.hpp"
#include "cli_commands.hpp"

namespace {

using namespace bear::cli;

// Exit codes: 0 ok, 2 usage, 3 format, 4 numerical divergence, 5 I/O or
// memory budget, 6 domain (e.g. negative NMF input).
int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const bear::FormatError*>(&e)) return 3;
  if (dynamic_cast<const bear::NumericalError*>(&e)) return 4;
  if (dynamic_cast<const bear::StorageError*>(&e)) return 5;
  if (dynamic_cast<const bear::CapacityError*>(&e)) return 5;
  if (dynamic_cast<const bear::DomainError*>(&e)) return 6;
  if (dynamic_cast<const bear::ParameterError*>(&e)) return 2;
  if (dynamic_cast<const bear::DimensionError*>(&e)) return 2;
  if (dynamic_cast<const bear::SizeError*>(&e)) return 2;
  return 1;
}

void add_common_flags(CLI::App* cmd, CommonOpts& common, std::string& cap_text) {
  cmd->add_option("--threads", common.threads, "Worker threads (default 1)");
  cmd->add_option("--memory-cap", cap_text,
                  "Memory budget for matrix buffers, e.g. 512M or 4G (default unlimited)");
  cmd->add_flag("!--no-shuffle", common.shuffle,
                "Disable epoch shuffling of column batches");
  cmd->add_option("--manifest", common.manifest_path,
                  "Manifest path (default: next to the first output)");
}

void finish_common(CommonOpts& common, const std::string& cap_text) {
  if (!cap_text.empty()) common.memory_cap = parse_byte_size(cap_text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bear: streaming low-rank + sparse matrix decomposition toolkit"};
  app.set_version_flag("--version", bear::kVersion);
  app.require_subcommand(1);

  DecomposeOpts dec;
  std::string dec_cap;
  auto* cmd_dec = app.add_subcommand(
      "decompose", "Train W and stream L = W W^T Y and S = Y - L to BMAT files");
  cmd_dec->add_option("--input", dec.input, "Input BMAT")->required();
  cmd_dec->add_option("--rank", dec.rank, "Target rank r")->required();
  cmd_dec->add_option("--lr", dec.lr, "Adam learning rate (default 0.003)");
  cmd_dec->add_option("--epochs", dec.epochs, "Training epochs (default 50)");
  cmd_dec->add_option("--batch", dec.batch, "Batch size in columns (default 1000)");
  cmd_dec->add_option("--seed", dec.seed, "RNG seed (default 0)");
  cmd_dec->add_option("--out-l", dec.out_l, "Output BMAT for L")->required();
  cmd_dec->add_option("--out-s", dec.out_s, "Output BMAT for S")->required();
  cmd_dec->add_option("--train-frac", dec.train_frac,
                      "Train on the first ceil(f*m) columns, infer over all (default 1.0)");
  cmd_dec->add_flag("--infer-only-after-train", dec.infer_only_after_train,
                    "Produce L/S with a frozen-model streaming pass (always on; "
                    "recorded in the manifest)");
  add_common_flags(cmd_dec, dec.common, dec_cap);

  GreedyOpts gre;
  std::string gre_cap;
  double gre_lambda = -1.0;
  auto* cmd_gre = app.add_subcommand(
      "greedy", "Greedy rank estimation: increase r until r + lambda*||S||_1 rises");
  cmd_gre->add_option("--input", gre.input, "Input BMAT")->required();
  cmd_gre->add_option("--lambda", gre_lambda,
                      "Sparsity weight (default 1/sqrt(max(n, m)))");
  cmd_gre->add_option("--lr", gre.lr, "Adam learning rate (default 0.003)");
  cmd_gre->add_option("--epochs", gre.epochs, "Training epochs per rank (default 50)");
  cmd_gre->add_option("--batch", gre.batch, "Batch size in columns (default 1000)");
  cmd_gre->add_option("--seed", gre.seed, "RNG seed (default 0)");
  cmd_gre->add_option("--rank-start", gre.rank_start, "First rank tried (default 1)");
  cmd_gre->add_option("--rank-step", gre.rank_step, "Rank increment (default 1)");
  cmd_gre->add_option("--rank-max", gre.rank_max,
                      "Last rank tried (default min(n, m))");
  cmd_gre->add_option("--out-l", gre.out_l, "Output BMAT for L")->required();
  cmd_gre->add_option("--out-s", gre.out_s, "Output BMAT for S")->required();
  add_common_flags(cmd_gre, gre.common, gre_cap);

  NmfOpts nmf;
  std::string nmf_cap;
  auto* cmd_nmf = app.add_subcommand(
      "nmf", "Projective NMF: W >= 0 minimizing ||Y - W W^T Y||_F^2; writes W and H = W^T Y");
  cmd_nmf->add_option("--input", nmf.input, "Input BMAT (non-negative)")->required();
  cmd_nmf->add_option("--rank", nmf.rank, "Factor rank")->required();
  cmd_nmf->add_option("--lr", nmf.lr, "Adam learning rate (default 0.003)");
  cmd_nmf->add_option("--epochs", nmf.epochs, "Training epochs (default 200)");
  cmd_nmf->add_option("--batch", nmf.batch, "Batch size in columns (default 1000)");
  cmd_nmf->add_option("--seed", nmf.seed, "RNG seed (default 0)");
  cmd_nmf->add_option("--out-w", nmf.out_w, "Output BMAT for W")->required();
  cmd_nmf->add_option("--out-h", nmf.out_h, "Output BMAT for H")->required();
  add_common_flags(cmd_nmf, nmf.common, nmf_cap);

  CascadeOpts cas;
  std::string cas_cap;
  auto* cmd_cas = app.add_subcommand(
      "cascade",
      "Joint decomposition + NMF: loss ||S||_1 + mu ||P - W2 W2^T P||_F^2, P = relu(S)");
  cmd_cas->add_option("--input", cas.input, "Input BMAT")->required();
  cmd_cas->add_option("--rank1", cas.rank1, "Rank of the background factor")->required();
  cmd_cas->add_option("--rank2", cas.rank2, "Rank of the footprint factor")->required();
  cmd_cas->add_option("--mu", cas.mu, "Coupling weight (default 1.0)");
  cmd_cas->add_option("--lr", cas.lr, "Adam learning rate (default 0.0002)");
  cmd_cas->add_option("--epochs", cas.epochs, "Training epochs (default 200)");
  cmd_cas->add_option("--batch", cas.batch, "Batch size in columns (default 512)");
  cmd_cas->add_option("--seed", cas.seed, "RNG seed (default 0)");
  cmd_cas->add_option("--out-spatial", cas.out_spatial, "Output BMAT for W2 (n x r2)")
      ->required();
  cmd_cas->add_option("--out-temporal", cas.out_temporal,
                      "Output BMAT for W2^T relu(S) (r2 x m)")
      ->required();
  cmd_cas->add_option("--out-background", cas.out_background,
                      "Optional BMAT for the rank-r1 background W1 W1^T Y");
  cmd_cas->add_option("--out-temporal-csv", cas.out_temporal_csv,
                      "Optional CSV of the temporal traces");
  cmd_cas->add_flag("--normalize-footprints", cas.normalize_footprints,
                    "l2-normalize spatial columns, rescaling temporal rows");
  cmd_cas->add_flag("--sequential", cas.sequential,
                    "Two-stage training instead of the joint default");
  add_common_flags(cmd_cas, cas.common, cas_cap);

  BenchOpts ben;
  std::string ben_cap;
  std::string ben_ranks = "2,10,20", ben_rhos = "0.05,0.2";
  double ben_lambda = -1.0;
  auto* cmd_ben = app.add_subcommand(
      "bench", "Phase-diagram sweep over (rank, rho) cells; writes a CSV grid");
  cmd_ben->add_option("--n", ben.n, "Square matrix size (default 200)");
  cmd_ben->add_option("--ranks", ben_ranks, "Comma list of true ranks");
  cmd_ben->add_option("--rhos", ben_rhos, "Comma list of sparse densities");
  cmd_ben->add_option("--trials", ben.trials, "Trials per cell (default 5)");
  cmd_ben->add_option("--lambda", ben_lambda, "Sparsity weight (default 1/sqrt(n))");
  cmd_ben->add_option("--lr", ben.lr, "Adam learning rate (default 0.003)");
  cmd_ben->add_option("--epochs", ben.epochs, "Epochs per rank (default 50)");
  cmd_ben->add_option("--batch", ben.batch, "Batch size (default 1000)");
  cmd_ben->add_option("--seed", ben.seed, "Master seed (default 1)");
  cmd_ben->add_flag("!--no-oracle", ben.oracle, "Skip the exact-method cross-check");
  cmd_ben->add_option("--oracle-max-n", ben.oracle_max_n,
                      "Largest n the oracle runs on (default 256)");
  cmd_ben->add_option("--out", ben.out_csv, "Output CSV")->required();
  add_common_flags(cmd_ben, ben.common, ben_cap);

  GenOpts gen;
  std::string gen_cap;
  auto* cmd_gen = app.add_subcommand(
      "gen", "Generate synthetic BMAT fixtures (lowrank|sparse|composite|video)");
  cmd_gen->add_option("--kind", gen.kind, "lowrank|sparse|composite|video")->required();
  cmd_gen->add_option("--out", gen.out, "Output BMAT")->required();
  cmd_gen->add_option("--seed", gen.seed, "RNG seed (default 0)");
  cmd_gen->add_option("--n", gen.n, "Square size for lowrank/sparse (default 100)");
  cmd_gen->add_option("--rank", gen.rank, "Low-rank factor rank (default 1)");
  cmd_gen->add_option("--rho", gen.rho, "Sparse density in [0, 1] (default 0)");
  cmd_gen->add_option("--rows", gen.rows, "Rows for composite (default --n)");
  cmd_gen->add_option("--cols", gen.cols, "Cols for composite (default --n)");
  cmd_gen->add_option("--chunk-cols", gen.chunk_cols,
                      "Streaming chunk width for composite (default 1024)");
  cmd_gen->add_option("--width", gen.width, "Video width (default 64)");
  cmd_gen->add_option("--height", gen.height, "Video height (default 64)");
  cmd_gen->add_option("--frames", gen.frames, "Video frames (default 500)");
  cmd_gen->add_option("--blobs", gen.blobs, "Blob count (default 8)");
  cmd_gen->add_flag("!--no-background", gen.background,
                    "Omit the rank-1 background from the video");
  cmd_gen->add_option("--out-truth-spatial", gen.out_truth_spatial,
                      "Optional ground-truth spatial masks BMAT");
  cmd_gen->add_option("--out-truth-temporal", gen.out_truth_temporal,
                      "Optional ground-truth activation traces BMAT");
  cmd_gen->add_option("--out-truth-background", gen.out_truth_background,
                      "Optional ground-truth background BMAT");
  add_common_flags(cmd_gen, gen.common, gen_cap);

  InfoOpts inf;
  std::string inf_cap;
  auto* cmd_inf = app.add_subcommand(
      "info", "Validate a BMAT header and print shape plus streamed norms");
  cmd_inf->add_option("--input", inf.input, "Input BMAT")->required();
  cmd_inf->add_option("--batch", inf.batch, "Streaming batch width (default 256)");
  add_common_flags(cmd_inf, inf.common, inf_cap);

  std::string replay_path;
  auto* cmd_rep = app.add_subcommand(
      "replay", "Re-run a command from its manifest, reproducing outputs bitwise");
  cmd_rep->add_option("manifest", replay_path, "Manifest file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_dec->parsed()) {
      finish_common(dec.common, dec_cap);
      run_decompose(dec);
    } else if (cmd_gre->parsed()) {
      finish_common(gre.common, gre_cap);
      if (gre_lambda >= 0.0) gre.lambda = gre_lambda;
      run_greedy(gre);
    } else if (cmd_nmf->parsed()) {
      finish_common(nmf.common, nmf_cap);
      run_nmf(nmf);
    } else if (cmd_cas->parsed()) {
      finish_common(cas.common, cas_cap);
      run_cascade(cas);
    } else if (cmd_ben->parsed()) {
      finish_common(ben.common, ben_cap);
      if (ben_lambda >= 0.0) ben.lambda = ben_lambda;
      for (const auto& part : CLI::detail::split(ben_ranks, ','))
        ben.ranks.push_back(std::stoll(part));
      for (const auto& part : CLI::detail::split(ben_rhos, ','))
        ben.rhos.push_back(std::stod(part));
      run_bench(ben);
    } else if (cmd_gen->parsed()) {
      finish_common(gen.common, gen_cap);
      run_gen(gen);
    } else if (cmd_inf->parsed()) {
      finish_common(inf.common, inf_cap);
      run_info(inf);
    } else if (cmd_rep->parsed()) {
      run_replay(replay_path);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
