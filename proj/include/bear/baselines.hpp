#pragma once

#include <cstdint>
#include <vector>

#include "bear/matrix.hpp"

namespace bear {

// Exact-method oracles used to cross-check the trained decompositions:
// inexact augmented-Lagrangian RPCA (nuclear norm + l1) and conventional
// Lee-Seung NMF. Both run in 64-bit internally and are meant for
// oracle-scale matrices only.

// Entrywise sign(x) * max(|x| - tau, 0).
Matrix soft_threshold(const Matrix& m, double tau);

// Singular value thresholding: U diag(max(sigma - tau, 0)) V^T.
Matrix svt(const Matrix& m, double tau, index_t cap = kDefaultSvdCap);

struct IalmConfig {
  double lambda = 0.0;    // required > 0
  double mu0 = 0.0;       // 0 = auto: 1.25 / sigma_1(Y)
  double rho = 1.5;       // penalty growth, > 1
  double tol = 1e-7;      // feasibility ||Y-L-S||_F / ||Y||_F
  int max_iters = 1000;
};

struct IalmResult {
  Matrix l;
  Matrix s;
  int iters = 0;
  bool converged = false;
  double feasibility_gap = 0.0;
};

// Alternates SVT on L and soft-thresholding on S with a growing penalty.
// Non-convergence is not an error: the best iterate comes back flagged.
IalmResult ialm_rpca(const Matrix& y, const IalmConfig& cfg);

struct NmfMuResult {
  Matrix w;  // n x r, >= 0
  Matrix h;  // r x m, >= 0
  std::vector<double> objective;  // ||Y - WH||_F^2 after each iteration
};

// Lee-Seung multiplicative updates for ||Y - WH||_F^2 with epsilon-stabilized
// denominators. The objective is non-increasing per iteration; iters = 0
// returns the seeded init.
NmfMuResult nmf_mu(const Matrix& y, index_t rank, int iters, std::uint64_t seed);

}  // namespace bear
