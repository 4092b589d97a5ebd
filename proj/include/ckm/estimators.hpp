#pragma once

#include <array>
#include <vector>

#include "ckm/ckm_builder.hpp"
#include "ckm/scene.hpp"
#include "ckm/tensor.hpp"

namespace ckm {

struct EstimationConfig {
  int refine_steps = 3;             // boundary perturbations per direction
  double refine_step_size = 0.1;    // fraction of the axis width
  double interp_rcond = 0.3;        // comb-fit truncation in interpolate_cluster
  std::array<Index, 3> omp_grid{0, 0, 0};  // dictionary grid per mode; 0 = 2x dim
  int omp_max_atoms = 64;
  double omp_resid_tol = 0.05;  // stop when residual < tol * ||y||
};

// Per-mode Slepian band bases for one cluster's parameter box: AoA band
// [d/lambda sin(aoa_min), d/lambda sin(aoa_max)] over N_rx, AoD likewise over
// N_tx, delay band p_f * delta_f * (tau - delay_ref) over the pilot grid.
// Degenerate (min = max) axes give one column; a band wider than one cycle is
// clamped to a full cycle with a warning on stderr.
SubspaceTriple range_to_subspaces(const ParamRange& r, const SceneContext& ctx, Index n_pilot_sc,
                                  int p_f, double delay_ref = 0.0);

// Core tensor of the observation in the cluster's subspace coordinates:
// y x1 G_aoa^H x2 G_aod^H (X^T)^+ x3 G_delay^H, pseudo-inverse applied first.
Tensor3C estimate_core(const Tensor3C& y, const SubspaceTriple& sub, const MatrixXc& x);

// Coordinate-wise greedy boundary search (one pass): each of the six range
// boundaries tries +-{1..refine_steps} * refine_step_size * width and keeps
// the value maximizing core power. Output core power >= input core power.
ParamRange refine_range(const Tensor3C& y, const ParamRange& r0, const MatrixXc& x,
                        const SceneContext& ctx, int p_f, double delay_ref = 0.0,
                        const EstimationConfig& cfg = {});

// Pilot-grid single-cluster channel from its core: core x1 G x2 G x3 G.
Tensor3C reconstruct_cluster(const Tensor3C& core, const SubspaceTriple& sub);

// Remove a reconstructed cluster's contribution: y - h_k x2 X^T.
Tensor3C cancel_cluster(const Tensor3C& y, const Tensor3C& h_k, const MatrixXc& x);

// Widen a pilot-grid cluster estimate to all n_sc subcarriers: h_k x3
// (G_tilde G^H) with G_tilde the Slepian band basis over the full grid for the
// same delay range and the same column count as the pilot basis g_delay.
// rcond truncates the comb fit's relative singular values: sparse pilot combs
// leave trailing band directions nearly unobserved, and extending them blows
// the estimate up by 1/sigma.
Tensor3C interpolate_cluster(const Tensor3C& h_k, const MatrixXc& g_delay_pilot,
                             const ParamRange& r, const OfdmConfig& ofdm, int p_f,
                             double delay_ref = 0.0, double rcond = 0.3);

// Full map-assisted estimator: clusters processed in descending initial core
// power; per cluster refine -> core -> reconstruct -> cancel -> interpolate;
// returns the sum of interpolated single-cluster estimates on the full band.
Tensor3C estimate_clusterckm(const Tensor3C& y, const std::vector<ParamRange>& ranges,
                             const MatrixXc& x, const SceneContext& ctx, int p_f,
                             double delay_ref = 0.0, const EstimationConfig& cfg = {});

// Plain least squares per pilot subcarrier plus delay-domain FFT
// interpolation (window centered on the circular mean of tap power).
Tensor3C estimate_ls(const Tensor3C& y, const MatrixXc& x, int p_f, Index n_sc);

// Orthogonal matching pursuit over a Kronecker dictionary of DFT-grid
// steering vectors, then the same FFT interpolation as LS.
Tensor3C estimate_omp(const Tensor3C& y, const MatrixXc& x, int p_f, Index n_sc,
                      const SceneContext& ctx, const EstimationConfig& cfg = {});

// 10 log10(||h_hat - h_true||^2 / ||h_true||^2), floored at -300 dB.
// Throws on zero h_true.
double rmse_db(const Tensor3C& h_hat, const Tensor3C& h_true);

}  // namespace ckm
