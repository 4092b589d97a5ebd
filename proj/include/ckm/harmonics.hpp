#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ckm/tensor.hpp"

namespace ckm {

// Digital-frequency band on an N-point uniform aperture. Frequencies are in
// cycles per element/sample; 1.0 is the full unambiguous span.
struct FreqBand {
  double lo = 0.0;
  double hi = 0.0;
  Index length = 0;  // number of aperture points N
};

// Wrap a digital frequency to the canonical interval [-0.5, 0.5).
double wrap_frequency(double omega);

// steering(n, w)[k] = exp(-j 2 pi w k), k = 0..n-1.
VectorXc steering(Index n, double omega);

// Dominant digital frequency of a single-snapshot harmonic mixture, via MUSIC
// with forward-backward spatial smoothing (subarray ceil(2N/3), signal
// subspace dimension 1), dense grid search plus parabolic refinement.
// Supported for len(v) >= 3; throws on shorter or all-zero input.
double music_freq(const VectorXc& v, int grid_res = 4096);

// Real base Slepian sequences: the m most concentrated length-n sequences for
// half-bandwidth W, orthonormal columns, concentration non-increasing.
Eigen::MatrixXd dpss_base(Index n, double half_bandwidth, Index m);

// Spectral concentration of each column in [-W, W] (quadratic form with the
// sinc kernel). Mainly a diagnostic / test aid.
std::vector<double> dpss_concentrations(const Eigen::MatrixXd& base, double half_bandwidth);

// Orthonormal band basis: ceil(n*(hi-lo))+1 Slepian sequences (capped at n, or
// ncols_override if nonzero) modulated to the band center. Throws if
// hi - lo <= 0 or hi - lo > 1.
MatrixXc dpss_band(const FreqBand& band, Index ncols_override = 0);

// Columns (1/sqrt(n)) * steering(n, omega0 + i/n) for each index i. Exactly
// orthonormal for indices distinct mod n; throws on duplicates.
MatrixXc shifted_orthobasis(Index n, double omega0, const std::vector<int>& indices);

// ||col^H * unfolded||_F^2: energy of an unfolding captured by one basis vector.
double projection_power(const VectorXc& col, const MatrixXc& unfolded);

}  // namespace ckm
