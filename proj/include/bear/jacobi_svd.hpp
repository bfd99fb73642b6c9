#pragma once

#include <cstdint>
#include <vector>

namespace bear::detail {

// 64-bit one-sided Jacobi SVD kernel shared by svd_small and the IALM oracle.
// a is n x m column-major and is consumed. On return u is n x k, v is m x k
// (k = min(n, m)), both column-major with orthonormal columns, and sigma holds
// the singular values in non-increasing order.
//
// Returns false if the sweep limit was exhausted before convergence.
bool jacobi_svd(std::vector<double> a, std::int64_t n, std::int64_t m,
                std::vector<double>& u, std::vector<double>& sigma,
                std::vector<double>& v, int max_sweeps = 60);

}  // namespace bear::detail
