#pragma once

#include <cstdint>

#include "ckm/tensor.hpp"

namespace ckm {

// CP (canonical polyadic) factorization t ~= sum_r weights[r] * A.col(r) o B.col(r) o C.col(r)
// with unit-norm factor columns and nonnegative real weights.
struct CpFactors {
  Index rank = 0;
  MatrixXc A, B, C;      // n1 x R, n2 x R, n3 x R
  VectorXc weights;      // R (real nonnegative, stored complex)
  bool converged = true;
  int sweeps = 0;
};

struct CpOptions {
  int max_sweeps = 200;
  double tol = 1e-8;          // relative residual change convergence threshold
  int random_restarts = 3;    // extra random starts beyond the HOSVD-style one
  double ridge_rel = 1e-10;   // ridge = ridge_rel * ||t||_F^2 in each LS solve
  std::uint64_t seed = 0x5eedULL;
  // Residual per ALS sweep (diagnostics; filled by cp_decompose for the
  // winning start so tests can assert monotone decrease).
  bool record_residuals = false;
};

// Khatri-Rao (column-wise Kronecker) with the rows of `right` running fastest:
// out(j + right.rows()*k, r) = right(j, r) * left(k, r).
MatrixXc khatri_rao(const MatrixXc& left, const MatrixXc& right);

// Dominant rank-1 component via higher-order power iteration.
// Throws std::invalid_argument on an all-zero tensor.
CpFactors best_rank1(const Tensor3C& t, int max_iters = 100, double tol = 1e-10);

// Rank-R CP via alternating least squares, HOSVD-style init plus random
// restarts; best (lowest residual) start wins. R must not exceed the product
// of the other two mode dimensions for any mode.
CpFactors cp_decompose(const Tensor3C& t, Index rank, const CpOptions& opts = {});

// Same, also reporting the winning start's per-sweep residuals.
CpFactors cp_decompose(const Tensor3C& t, Index rank, const CpOptions& opts,
                       std::vector<double>* residual_trace);

Tensor3C cp_reconstruct(const CpFactors& f, const std::array<Index, 3>& dims);

}  // namespace ckm
