#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ckm/geometry.hpp"
#include "ckm/tensor.hpp"

namespace ckm {

inline constexpr double kSpeedOfLight = 299792458.0;

// Uniform linear array. Elements sit at origin + k * spacing * axis,
// k = 0..n_elems-1. Broadside is the axis rotated +90 degrees.
struct ArrayConfig {
  Index n_elems = 1;
  double spacing = 0.05;    // meters
  double wavelength = 0.1;  // meters
  Vec2 origin{};
  Vec2 axis{1.0, 0.0};  // unit vector along the element line
};

inline Vec2 broadside(const ArrayConfig& a) { return {-a.axis.y, a.axis.x}; }

struct OfdmConfig {
  Index n_sc = 1;
  double delta_f = 0.0;  // subcarrier spacing, Hz
};

struct ScattererCluster {
  std::vector<Vec2> positions;
  std::vector<cplx> gains;  // raw scattering gains (path-length decay applied at assembly)
};

struct Environment {
  std::vector<ScattererCluster> clusters;
};

// One propagation path tx -> scatterer -> rx. Angles are measured from the
// respective array broadside; gain carries the geometric 1/(d_tx + d_rx)
// decay (the scatterer's own complex gain lives in the Environment).
struct PathParams {
  double aoa = 0.0;    // radians at the rx array
  double aod = 0.0;    // radians at the tx array
  double delay = 0.0;  // seconds, total path
  cplx gain{};
};

struct PilotConfig {
  MatrixXc X;     // n_tx x p, row-orthogonal, squared Frobenius norm = p
  Index p = 0;    // pilot symbols in time
  Index p_f = 1;  // pilot subcarrier period
};

// Array/OFDM bundle shared by the map builder and the estimators.
struct SceneContext {
  ArrayConfig tx;
  ArrayConfig rx;
  OfdmConfig ofdm;
};

// Per cluster center: n_scatterers positions ~ N(center, stddev^2 I), gains
// drawn from the standard complex Gaussian.
Environment sample_environment(const std::vector<Vec2>& centers, Index n_scatterers,
                               double stddev, std::uint64_t seed);

// Throws std::invalid_argument when the scatterer coincides with an endpoint.
PathParams path_params(Vec2 p_tx, Vec2 p_rx, Vec2 p_scat, const ArrayConfig& tx,
                       const ArrayConfig& rx);

// Digital frequencies {aoa, aod, delay} of one path:
// (d_rx/lambda) sin(aoa), (d_tx/lambda) sin(aod), delta_f * (delay - delay_ref).
// delay_ref sets the sampling-time reference (0 = absolute propagation delay).
std::array<double, 3> path_frequencies(const PathParams& pp, const ArrayConfig& tx,
                                       const ArrayConfig& rx, const OfdmConfig& ofdm,
                                       double delay_ref = 0.0);

// Sum over scatterers of gain * steering(aoa) o steering(aod) o steering(delay),
// dims n_rx x n_tx x n_sc.
Tensor3C assemble_channel(const Environment& env, Vec2 p_tx, Vec2 p_rx,
                          const ArrayConfig& tx, const ArrayConfig& rx,
                          const OfdmConfig& ofdm, double delay_ref = 0.0);

// Random row-orthogonal pilot matrix with squared Frobenius norm p. Requires
// p >= n_tx.
MatrixXc pilot_matrix(Index n_tx, Index p, std::uint64_t seed);

// {0, p_f, 2 p_f, ...} below n_sc.
std::vector<Index> pilot_subcarriers(Index n_sc, Index p_f);

struct TransmitOut {
  Tensor3C y;     // n_rx x p x n_pilot_sc
  Tensor3C hbar;  // n_rx x n_tx x n_pilot_sc (channel on the pilot grid)
};

// y = hbar x_2 X^T + white complex Gaussian noise of per-element variance
// noise_var.
TransmitOut transmit(const Tensor3C& h, const PilotConfig& pilots, double noise_var,
                     std::uint64_t seed);

// h plus white complex Gaussian error with expected energy
// |h|_F^2 * 10^(-error_db/10).
Tensor3C perturb_channel(const Tensor3C& h, double error_db, std::uint64_t seed);

// noise variance such that |h|_F^2 / (n1 n2 n3 noise_var) = 10^(snr_db/10).
double snr_to_noise_var(const Tensor3C& h, double snr_db);

}  // namespace ckm
