#include "bear/batch_source.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "bear/errors.hpp"
#include "bear/rng.hpp"

namespace bear {

namespace {
void ensure_finite_column(const float* col, index_t rows, index_t source_col) {
  for (index_t i = 0; i < rows; ++i) {
    if (!std::isfinite(col[i]))
      throw FormatError("non-finite entry at (" + std::to_string(i) + ", " +
                        std::to_string(source_col) + ")");
  }
}
}  // namespace

namespace {
index_t apply_limit(index_t cols, index_t limit_cols) {
  if (limit_cols < 0) throw ParameterError("limit_cols must be >= 0");
  return limit_cols > 0 ? std::min(cols, limit_cols) : cols;
}
}  // namespace

BatchSource BatchSource::from_matrix(Matrix y, index_t batch_size, std::uint64_t seed,
                                     bool shuffle, index_t limit_cols) {
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (y.empty()) throw ParameterError("BatchSource over an empty matrix");
  for (index_t j = 0; j < y.cols(); ++j) ensure_finite_column(y.col(j), y.rows(), j);
  BatchSource src;
  src.rows_ = y.rows();
  src.cols_ = apply_limit(y.cols(), limit_cols);
  src.memory_ = std::move(y);
  src.batch_size_ = std::min(batch_size, src.cols_);
  src.seed_ = seed;
  src.shuffle_ = shuffle;
  return src;
}

BatchSource BatchSource::from_file(const std::filesystem::path& path,
                                   index_t batch_size, std::uint64_t seed,
                                   bool shuffle, index_t limit_cols) {
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  BatchSource src;
  src.mapped_ = std::make_shared<MappedBmat>(path);
  src.rows_ = src.mapped_->rows();
  src.cols_ = apply_limit(src.mapped_->cols(), limit_cols);
  src.batch_size_ = std::min(batch_size, src.cols_);
  src.seed_ = seed;
  src.shuffle_ = shuffle;
  return src;
}

void BatchSource::begin_epoch(index_t epoch, bool sequential) {
  order_.resize(static_cast<std::size_t>(cols_));
  std::iota(order_.begin(), order_.end(), index_t{0});
  if (shuffle_ && !sequential) {
    Rng rng(derive_seed(seed_, kShuffleTag, static_cast<std::uint64_t>(epoch)));
    for (index_t i = cols_ - 1; i > 0; --i) {
      const index_t j = static_cast<index_t>(rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(order_[i], order_[j]);
    }
  }
  cursor_ = 0;
  epoch_open_ = true;
}

bool BatchSource::next_batch(Matrix& out, std::vector<index_t>* column_ids) {
  if (!epoch_open_) throw ParameterError("next_batch before begin_epoch");
  if (cursor_ >= cols_) return false;
  const index_t width = std::min(batch_size_, cols_ - cursor_);
  out.resize_uninit(rows_, width);
  if (column_ids) column_ids->resize(static_cast<std::size_t>(width));
  for (index_t t = 0; t < width; ++t) {
    const index_t j = order_[cursor_ + t];
    const float* src_col =
        memory_ ? memory_->col(j) : mapped_->col(j);
    std::memcpy(out.col(t), src_col, sizeof(float) * static_cast<std::size_t>(rows_));
    if (mapped_) ensure_finite_column(out.col(t), rows_, j);
    if (column_ids) (*column_ids)[static_cast<std::size_t>(t)] = j;
  }
  cursor_ += width;
  return true;
}

}  // namespace bear
