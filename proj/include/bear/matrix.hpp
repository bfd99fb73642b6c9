#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <vector>

namespace bear {

using index_t = std::int64_t;

// Dense column-major matrix of 32-bit reals. Rows index pixels, columns index
// time frames, so a column batch is one contiguous slice. Buffers are
// registered with bear::budget so out-of-core paths can prove their memory
// bound. Norm and loss reductions accumulate in 64-bit.
//
// A Matrix is immutable-by-convention once handed to another thread; nothing
// in this class synchronizes writes.
class Matrix {
 public:
  Matrix() = default;
  Matrix(index_t rows, index_t cols);  // zero-filled

  Matrix(const Matrix& other);
  Matrix& operator=(const Matrix& other);
  Matrix(Matrix&& other) noexcept;
  Matrix& operator=(Matrix&& other) noexcept;
  ~Matrix();

  // Row-major literal for tests and small fixtures:
  // Matrix::of({{1, -2}, {0, 3}}) is [[1,-2],[0,3]].
  static Matrix of(std::initializer_list<std::initializer_list<float>> rows);

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  index_t size() const { return rows_ * cols_; }
  bool empty() const { return size() == 0; }

  float* data() { return data_.get(); }
  const float* data() const { return data_.get(); }
  float* col(index_t j) { return data_.get() + j * rows_; }
  const float* col(index_t j) const { return data_.get() + j * rows_; }

  float& operator()(index_t i, index_t j) { return data_[j * rows_ + i]; }
  float operator()(index_t i, index_t j) const { return data_[j * rows_ + i]; }

  // Reallocates; contents are zero afterwards.
  void resize(index_t rows, index_t cols);
  // Reallocates without clearing; caller overwrites every entry.
  void resize_uninit(index_t rows, index_t cols);

  void fill(float value);
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  void allocate(index_t rows, index_t cols);
  void release() noexcept;

  index_t rows_ = 0;
  index_t cols_ = 0;
  std::unique_ptr<float[]> data_;
};

// --- norms and metrics ------------------------------------------------------

// Sum of absolute values of all entries (empty matrix -> 0 by convention).
double l1_norm(const Matrix& m);

// Frobenius norm (empty matrix -> 0 by convention).
double fro_norm(const Matrix& m);

// ||l_true - l_hat||_F / ||l_true||_F. Throws DimensionError on shape
// mismatch, DegenerateInputError when ||l_true||_F == 0.
double relative_error(const Matrix& l_true, const Matrix& l_hat);

// Entrywise |a - b| <= atol + rtol*|b| for every entry; the comparison tests
// use. Shapes must match exactly.
bool allclose(const Matrix& a, const Matrix& b, double atol = 1e-6, double rtol = 1e-5);

// --- small-scale SVD --------------------------------------------------------

struct SvdResult {
  Matrix u;                             // n x k
  std::vector<double> singular_values;  // length k, non-increasing, >= 0
  Matrix v;                             // m x k
};

inline constexpr index_t kDefaultSvdCap = 2048;

// Thin SVD by one-sided Jacobi, computed in 64-bit internally. Intended for
// oracle-scale matrices: throws SizeError when min(n, m) > cap and
// NumericalError if the sweep limit is exhausted.
SvdResult svd_small(const Matrix& m, index_t cap = kDefaultSvdCap);

// Sum of singular values; diagnostic only.
double nuclear_norm(const Matrix& m, index_t cap = kDefaultSvdCap);

}  // namespace bear
