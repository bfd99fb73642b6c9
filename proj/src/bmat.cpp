#include "bear/bmat.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <limits>
#include <system_error>

#include "bear/errors.hpp"

namespace bear {

namespace {

void require_little_endian() {
  if constexpr (std::endian::native != std::endian::little)
    throw StorageError("BMAT I/O requires a little-endian host");
}

void put_u32(unsigned char* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

void put_u64(unsigned char* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint32_t get_u32(const unsigned char* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const unsigned char* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

void write_header(std::FILE* f, const BmatHeader& h, const std::filesystem::path& path) {
  unsigned char buf[BmatHeader::kHeaderBytes];
  std::memcpy(buf, BmatHeader::kMagic, 8);
  put_u32(buf + 8, h.dtype);
  put_u64(buf + 12, h.rows);
  put_u64(buf + 20, h.cols);
  if (std::fwrite(buf, 1, sizeof(buf), f) != sizeof(buf))
    throw StorageError("failed to write BMAT header to " + path.string());
}

BmatHeader parse_header(std::FILE* f, const std::filesystem::path& path) {
  unsigned char buf[BmatHeader::kHeaderBytes];
  if (std::fread(buf, 1, sizeof(buf), f) != sizeof(buf))
    throw FormatError(path.string() + ": file too short for a BMAT header");
  if (std::memcmp(buf, BmatHeader::kMagic, 8) != 0)
    throw FormatError(path.string() + ": bad magic, not a BMAT file");
  BmatHeader h;
  h.dtype = get_u32(buf + 8);
  h.rows = get_u64(buf + 12);
  h.cols = get_u64(buf + 20);
  if (h.dtype != BmatHeader::kDtypeF32)
    throw FormatError(path.string() + ": unsupported dtype code " +
                      std::to_string(h.dtype));
  if (h.rows == 0 || h.cols == 0)
    throw FormatError(path.string() + ": BMAT dims must be >= 1, got " +
                      std::to_string(h.rows) + "x" + std::to_string(h.cols));
  if (h.rows > (std::numeric_limits<std::uint64_t>::max() - BmatHeader::kHeaderBytes) /
                   4 / h.cols)
    throw FormatError(path.string() + ": BMAT dims overflow the size field");
  return h;
}

std::uint64_t file_size_of(const std::filesystem::path& path) {
  std::error_code ec;
  const std::uint64_t size = std::filesystem::file_size(path, ec);
  if (ec) throw StorageError(path.string() + ": cannot stat: " + ec.message());
  return size;
}

void check_exact_size(const BmatHeader& h, const std::filesystem::path& path) {
  const std::uint64_t actual = file_size_of(path);
  if (actual != h.file_bytes())
    throw FormatError(path.string() + ": size mismatch, header implies " +
                      std::to_string(h.file_bytes()) + " bytes but file has " +
                      std::to_string(actual));
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_bmat(const Matrix& m, const std::filesystem::path& path) {
  require_little_endian();
  if (m.rows() < 1 || m.cols() < 1)
    throw ParameterError("write_bmat: matrix must be at least 1x1");
  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw StorageError("cannot open " + path.string() + " for writing: " +
                             std::strerror(errno));
  BmatHeader h;
  h.rows = static_cast<std::uint64_t>(m.rows());
  h.cols = static_cast<std::uint64_t>(m.cols());
  write_header(f.get(), h, path);
  const std::size_t count = static_cast<std::size_t>(m.size());
  if (std::fwrite(m.data(), sizeof(float), count, f.get()) != count)
    throw StorageError("short write of BMAT payload to " + path.string());
  if (std::fflush(f.get()) != 0)
    throw StorageError("flush failed for " + path.string());
}

BmatHeader read_bmat_header(const std::filesystem::path& path) {
  require_little_endian();
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw StorageError("cannot open " + path.string() + ": " +
                             std::strerror(errno));
  const BmatHeader h = parse_header(f.get(), path);
  check_exact_size(h, path);
  return h;
}

Matrix read_bmat(const std::filesystem::path& path) {
  require_little_endian();
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw StorageError("cannot open " + path.string() + ": " +
                             std::strerror(errno));
  const BmatHeader h = parse_header(f.get(), path);
  check_exact_size(h, path);

  Matrix m;
  m.resize_uninit(static_cast<index_t>(h.rows), static_cast<index_t>(h.cols));
  const std::size_t count = static_cast<std::size_t>(m.size());
  if (std::fread(m.data(), sizeof(float), count, f.get()) != count)
    throw FormatError(path.string() + ": truncated payload");
  for (index_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i]))
      throw FormatError(path.string() + ": non-finite entry at flat index " +
                        std::to_string(i));
  }
  return m;
}

BmatWriter::BmatWriter(const std::filesystem::path& path, index_t rows, index_t cols)
    : path_(path), rows_(rows), cols_(cols) {
  require_little_endian();
  if (rows < 1 || cols < 1) throw ParameterError("BmatWriter: dims must be >= 1");
  file_ = std::fopen(path.string().c_str(), "wb");
  if (!file_) throw StorageError("cannot open " + path.string() + " for writing: " +
                                 std::strerror(errno));
  BmatHeader h;
  h.rows = static_cast<std::uint64_t>(rows);
  h.cols = static_cast<std::uint64_t>(cols);
  try {
    write_header(file_, h, path_);
  } catch (...) {
    std::fclose(file_);
    file_ = nullptr;
    throw;
  }
}

BmatWriter::~BmatWriter() {
  if (file_) std::fclose(file_);
}

void BmatWriter::append(const float* data, index_t ncols) {
  if (!file_) throw StorageError("BmatWriter: append after close");
  if (written_ + ncols > cols_)
    throw ParameterError("BmatWriter: appending past the declared column count");
  const std::size_t count = static_cast<std::size_t>(rows_) * ncols;
  if (std::fwrite(data, sizeof(float), count, file_) != count)
    throw StorageError("short write of BMAT payload to " + path_.string());
  written_ += ncols;
}

void BmatWriter::append(const Matrix& chunk) {
  if (chunk.rows() != rows_)
    throw DimensionError("BmatWriter: chunk has " + std::to_string(chunk.rows()) +
                         " rows, expected " + std::to_string(rows_));
  append(chunk.data(), chunk.cols());
}

void BmatWriter::close() {
  if (!file_) return;
  if (written_ != cols_) {
    std::fclose(file_);
    file_ = nullptr;
    throw StorageError("BmatWriter: closed after " + std::to_string(written_) +
                       " of " + std::to_string(cols_) + " columns");
  }
  const int rc = std::fflush(file_);
  std::fclose(file_);
  file_ = nullptr;
  if (rc != 0) throw StorageError("flush failed for " + path_.string());
}

MappedBmat::MappedBmat(const std::filesystem::path& path) {
  header_ = read_bmat_header(path);  // validates magic, dtype, exact size
  const int fd = ::open(path.string().c_str(), O_RDONLY);
  if (fd < 0) throw StorageError("cannot open " + path.string() + ": " +
                                 std::strerror(errno));
  mapped_bytes_ = header_.file_bytes();
  void* p = ::mmap(nullptr, mapped_bytes_, PROT_READ, MAP_PRIVATE, fd, 0);
  ::close(fd);
  if (p == MAP_FAILED)
    throw StorageError("mmap failed for " + path.string() + ": " +
                       std::strerror(errno));
  base_ = static_cast<const char*>(p);
}

MappedBmat::MappedBmat(MappedBmat&& other) noexcept
    : header_(other.header_), base_(other.base_), mapped_bytes_(other.mapped_bytes_) {
  other.base_ = nullptr;
  other.mapped_bytes_ = 0;
}

MappedBmat& MappedBmat::operator=(MappedBmat&& other) noexcept {
  if (this == &other) return *this;
  unmap();
  header_ = other.header_;
  base_ = other.base_;
  mapped_bytes_ = other.mapped_bytes_;
  other.base_ = nullptr;
  other.mapped_bytes_ = 0;
  return *this;
}

MappedBmat::~MappedBmat() { unmap(); }

void MappedBmat::unmap() noexcept {
  if (base_) {
    ::munmap(const_cast<char*>(base_), mapped_bytes_);
    base_ = nullptr;
  }
}

}  // namespace bear
