#pragma once

// Internal Eigen bridge. Dense products map Matrix buffers into Eigen views;
// nothing in the public API exposes Eigen types.

#include <Eigen/Core>

#include "bear/matrix.hpp"

namespace bear::la {

using Map = Eigen::Map<Eigen::MatrixXf>;
using CMap = Eigen::Map<const Eigen::MatrixXf>;

inline CMap view(const Matrix& m) { return CMap(m.data(), m.rows(), m.cols()); }
inline Map view(Matrix& m) { return Map(m.data(), m.rows(), m.cols()); }

// Views over a contiguous column range [j0, j0 + width).
inline CMap cols(const Matrix& m, index_t j0, index_t width) {
  return CMap(m.col(j0), m.rows(), width);
}
inline Map cols(Matrix& m, index_t j0, index_t width) {
  return Map(m.col(j0), m.rows(), width);
}

}  // namespace bear::la
