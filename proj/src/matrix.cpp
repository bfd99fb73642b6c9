#include "bear/matrix.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>

#include "bear/budget.hpp"
#include "bear/errors.hpp"
#include "bear/jacobi_svd.hpp"

namespace bear {

namespace {
std::uint64_t byte_count(index_t rows, index_t cols) {
  return static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) *
         sizeof(float);
}
}  // namespace

Matrix::Matrix(index_t rows, index_t cols) {
  allocate(rows, cols);
  if (data_) std::memset(data_.get(), 0, byte_count(rows_, cols_));
}

Matrix::Matrix(const Matrix& other) {
  allocate(other.rows_, other.cols_);
  if (data_) std::memcpy(data_.get(), other.data_.get(), byte_count(rows_, cols_));
}

Matrix& Matrix::operator=(const Matrix& other) {
  if (this == &other) return *this;
  Matrix copy(other);
  *this = std::move(copy);
  return *this;
}

Matrix::Matrix(Matrix&& other) noexcept
    : rows_(other.rows_), cols_(other.cols_), data_(std::move(other.data_)) {
  other.rows_ = 0;
  other.cols_ = 0;
}

Matrix& Matrix::operator=(Matrix&& other) noexcept {
  if (this == &other) return *this;
  release();
  rows_ = other.rows_;
  cols_ = other.cols_;
  data_ = std::move(other.data_);
  other.rows_ = 0;
  other.cols_ = 0;
  return *this;
}

Matrix::~Matrix() { release(); }

Matrix Matrix::of(std::initializer_list<std::initializer_list<float>> rows) {
  const index_t n = static_cast<index_t>(rows.size());
  const index_t m = n > 0 ? static_cast<index_t>(rows.begin()->size()) : 0;
  Matrix out(n, m);
  index_t i = 0;
  for (const auto& row : rows) {
    if (static_cast<index_t>(row.size()) != m)
      throw DimensionError("Matrix::of: ragged rows");
    index_t j = 0;
    for (float v : row) out(i, j++) = v;
    ++i;
  }
  return out;
}

void Matrix::allocate(index_t rows, index_t cols) {
  if (rows < 0 || cols < 0) throw ParameterError("matrix dimensions must be >= 0");
  rows_ = rows;
  cols_ = cols;
  if (size() > 0) {
    budget::acquire(byte_count(rows_, cols_));
    try {
      data_.reset(new float[static_cast<std::size_t>(size())]);
    } catch (...) {
      budget::release(byte_count(rows_, cols_));
      rows_ = cols_ = 0;
      throw;
    }
  }
}

void Matrix::release() noexcept {
  if (data_) {
    budget::release(byte_count(rows_, cols_));
    data_.reset();
  }
  rows_ = 0;
  cols_ = 0;
}

void Matrix::resize(index_t rows, index_t cols) {
  resize_uninit(rows, cols);
  if (data_) std::memset(data_.get(), 0, byte_count(rows_, cols_));
}

void Matrix::resize_uninit(index_t rows, index_t cols) {
  if (rows == rows_ && cols == cols_) return;
  if (rows * cols == rows_ * cols_ && data_) {  // same buffer, new shape
    rows_ = rows;
    cols_ = cols;
    return;
  }
  release();
  allocate(rows, cols);
}

void Matrix::fill(float value) {
  for (index_t i = 0; i < size(); ++i) data_[i] = value;
}

double l1_norm(const Matrix& m) {
  double acc = 0.0;
  const float* p = m.data();
  for (index_t i = 0; i < m.size(); ++i) acc += std::abs(static_cast<double>(p[i]));
  return acc;
}

double fro_norm(const Matrix& m) {
  double acc = 0.0;
  const float* p = m.data();
  for (index_t i = 0; i < m.size(); ++i) {
    const double x = static_cast<double>(p[i]);
    acc += x * x;
  }
  return std::sqrt(acc);
}

double relative_error(const Matrix& l_true, const Matrix& l_hat) {
  if (!l_true.same_shape(l_hat))
    throw DimensionError("relative_error: shapes differ (" +
                         std::to_string(l_true.rows()) + "x" +
                         std::to_string(l_true.cols()) + " vs " +
                         std::to_string(l_hat.rows()) + "x" +
                         std::to_string(l_hat.cols()) + ")");
  double diff2 = 0.0, ref2 = 0.0;
  const float* a = l_true.data();
  const float* b = l_hat.data();
  for (index_t i = 0; i < l_true.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    diff2 += d * d;
    const double x = static_cast<double>(a[i]);
    ref2 += x * x;
  }
  if (ref2 == 0.0)
    throw DegenerateInputError("relative_error: reference matrix has zero norm");
  return std::sqrt(diff2 / ref2);
}

bool allclose(const Matrix& a, const Matrix& b, double atol, double rtol) {
  if (!a.same_shape(b)) return false;
  const float* pa = a.data();
  const float* pb = b.data();
  for (index_t i = 0; i < a.size(); ++i) {
    const double x = pa[i], y = pb[i];
    if (!(std::abs(x - y) <= atol + rtol * std::abs(y))) return false;
  }
  return true;
}

SvdResult svd_small(const Matrix& m, index_t cap) {
  const index_t n = m.rows(), mm = m.cols();
  if (n == 0 || mm == 0) throw ParameterError("svd_small: empty matrix");
  if (std::min(n, mm) > cap)
    throw SizeError("svd_small: min(n, m) = " + std::to_string(std::min(n, mm)) +
                    " exceeds cap " + std::to_string(cap));

  std::vector<double> a(static_cast<std::size_t>(n) * mm);
  for (index_t i = 0; i < m.size(); ++i) a[i] = static_cast<double>(m.data()[i]);

  std::vector<double> u, sigma, v;
  if (!detail::jacobi_svd(std::move(a), n, mm, u, sigma, v))
    throw NumericalError("svd_small: Jacobi sweeps did not converge");

  const index_t k = std::min(n, mm);
  SvdResult out;
  out.u.resize_uninit(n, k);
  out.v.resize_uninit(mm, k);
  for (index_t i = 0; i < n * k; ++i) out.u.data()[i] = static_cast<float>(u[i]);
  for (index_t i = 0; i < mm * k; ++i) out.v.data()[i] = static_cast<float>(v[i]);
  out.singular_values = std::move(sigma);
  return out;
}

double nuclear_norm(const Matrix& m, index_t cap) {
  if (m.size() == 0) return 0.0;
  const SvdResult svd = svd_small(m, cap);
  double acc = 0.0;
  for (double s : svd.singular_values) acc += s;
  return acc;
}

}  // namespace bear
