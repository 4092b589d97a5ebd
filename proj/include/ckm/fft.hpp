#pragma once

#include "ckm/tensor.hpp"

namespace ckm {

// Unnormalized column-wise DFT, X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
MatrixXc dft_cols(const MatrixXc& x);

// Unnormalized column-wise inverse-direction DFT (positive exponent).
MatrixXc idft_cols(const MatrixXc& x);

}  // namespace ckm
