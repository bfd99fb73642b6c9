#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "bear/bmat.hpp"
#include "bear/matrix.hpp"

namespace bear {

// Seekable provider of column batches over a matrix that may be far larger
// than RAM. Backed either by an owned in-memory Matrix or by a memory-mapped
// BMAT file; in the mapped case no more than one batch of columns is ever
// materialized.
//
// Each epoch visits every column exactly once (the final batch may be
// narrower). The visiting order is a Fisher-Yates permutation drawn from the
// stream Rng(derive_seed(seed, kShuffleTag, epoch)) when shuffling is on, and
// the identity otherwise, so it is a pure function of (seed, epoch).
//
// Single consumer; open several sources over the same file for concurrent
// read-only access.
class BatchSource {
 public:
  // limit_cols > 0 restricts the source to the first limit_cols columns
  // (training on a data prefix); 0 means all columns.
  static BatchSource from_matrix(Matrix y, index_t batch_size, std::uint64_t seed,
                                 bool shuffle = true, index_t limit_cols = 0);
  static BatchSource from_file(const std::filesystem::path& path, index_t batch_size,
                               std::uint64_t seed, bool shuffle = true,
                               index_t limit_cols = 0);

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  index_t batch_size() const { return batch_size_; }
  index_t batches_per_epoch() const {
    return (cols_ + batch_size_ - 1) / batch_size_;
  }
  bool shuffle() const { return shuffle_; }
  std::uint64_t seed() const { return seed_; }

  // Starts an epoch. sequential = true forces identity order regardless of the
  // shuffle flag (inference and metric passes use this).
  void begin_epoch(index_t epoch, bool sequential = false);

  // Gathers the next batch into `out` (rows x w, w <= batch_size) and returns
  // true, or returns false at epoch end. column_ids, when given, receives each
  // batch column's source column index.
  bool next_batch(Matrix& out, std::vector<index_t>* column_ids = nullptr);

  static constexpr std::uint64_t kShuffleTag = 0x5348554646ULL;  // "SHUFF"

 private:
  BatchSource() = default;

  std::optional<Matrix> memory_;
  std::shared_ptr<MappedBmat> mapped_;
  index_t rows_ = 0;
  index_t cols_ = 0;
  index_t batch_size_ = 0;
  std::uint64_t seed_ = 0;
  bool shuffle_ = true;

  std::vector<index_t> order_;
  index_t cursor_ = 0;
  bool epoch_open_ = false;
};

}  // namespace bear
