#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>

#include "bear/matrix.hpp"

namespace bear {

// BMAT: the toolkit's bit-exact binary matrix format.
//
//   bytes 0..7    magic "BEARMAT1"
//   bytes 8..11   dtype, unsigned 32-bit little-endian; 1 = 32-bit real LE
//   bytes 12..19  rows, unsigned 64-bit little-endian
//   bytes 20..27  cols, unsigned 64-bit little-endian
//   bytes 28..    payload, rows*cols 32-bit reals, column-major
//
// Total file size is exactly 28 + rows*cols*4 bytes. Little-endian only;
// big-endian hosts must convert on read (this implementation refuses to run
// on them rather than guess).

struct BmatHeader {
  std::uint32_t dtype = 1;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;

  std::uint64_t payload_bytes() const { return rows * cols * 4; }
  std::uint64_t file_bytes() const { return kHeaderBytes + payload_bytes(); }

  static constexpr std::uint64_t kHeaderBytes = 28;
  static constexpr std::uint32_t kDtypeF32 = 1;
  static constexpr char kMagic[9] = "BEARMAT1";
};

// Writes M as a BMAT file. Read-back reproduces M bit-exactly.
void write_bmat(const Matrix& m, const std::filesystem::path& path);

// Fully materializes a BMAT file. Validates magic, dtype, positive dims, the
// exact-size identity above, and entry finiteness. Oversized inputs fail with
// CapacityError once a memory budget is set; stream those through
// open_batch_source instead.
Matrix read_bmat(const std::filesystem::path& path);

// Header of an existing file plus the exact-size validation (payload is not
// read). Used by `info` and by the streaming readers.
BmatHeader read_bmat_header(const std::filesystem::path& path);

// Streaming column-chunk writer for larger-than-RAM outputs.
class BmatWriter {
 public:
  BmatWriter(const std::filesystem::path& path, index_t rows, index_t cols);
  BmatWriter(const BmatWriter&) = delete;
  BmatWriter& operator=(const BmatWriter&) = delete;
  ~BmatWriter();

  // Appends `ncols` column-major columns.
  void append(const float* data, index_t ncols);
  void append(const Matrix& chunk);

  // Flushes and validates that exactly `cols` columns were written.
  void close();

  index_t rows() const { return rows_; }
  index_t cols_written() const { return written_; }

 private:
  std::FILE* file_ = nullptr;
  std::filesystem::path path_;
  index_t rows_ = 0;
  index_t cols_ = 0;
  index_t written_ = 0;
};

// Read-only memory map of a BMAT file. Mapped bytes are not charged to the
// memory budget; only what callers copy out is.
class MappedBmat {
 public:
  explicit MappedBmat(const std::filesystem::path& path);
  MappedBmat(MappedBmat&& other) noexcept;
  MappedBmat& operator=(MappedBmat&& other) noexcept;
  MappedBmat(const MappedBmat&) = delete;
  MappedBmat& operator=(const MappedBmat&) = delete;
  ~MappedBmat();

  index_t rows() const { return static_cast<index_t>(header_.rows); }
  index_t cols() const { return static_cast<index_t>(header_.cols); }
  const float* col(index_t j) const {
    return reinterpret_cast<const float*>(base_ + BmatHeader::kHeaderBytes) +
           j * rows();
  }

 private:
  void unmap() noexcept;

  BmatHeader header_;
  const char* base_ = nullptr;
  std::uint64_t mapped_bytes_ = 0;
};

}  // namespace bear
