#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ckm/cp.hpp"
#include "ckm/geometry.hpp"
#include "ckm/scene.hpp"
#include "ckm/tensor.hpp"

namespace ckm {

// One labeled noisy channel capture. delay_ref records the timing reference
// its tensor was assembled with (0 = absolute propagation delay).
struct HistoricalSample {
  Tensor3C h_hat;
  Vec2 p_tx;
  Vec2 p_rx;
  double delay_ref = 0.0;
};

// Orthonormal per-mode bases spanning one cluster's channel subspace.
struct SubspaceTriple {
  MatrixXc g_aoa;    // n_rx x r1
  MatrixXc g_aod;    // n_tx x r2
  MatrixXc g_delay;  // n_sc (or pilot grid) x r3
};

// Axis-aligned box of multipath parameters for one cluster.
struct ParamRange {
  double aoa_min = 0.0, aoa_max = 0.0;      // radians
  double aod_min = 0.0, aod_max = 0.0;      // radians
  double delay_min = 0.0, delay_max = 0.0;  // seconds, absolute
};

// The map itself: equivalent-scatterer positions grouped per cluster.
struct ClusterCkm {
  std::vector<std::vector<Vec2>> es_clusters;
};

struct BuilderConfig {
  double power_thresh = 0.05;  // subspace column keep threshold vs max bin
  double stop_frac = 0.02;     // stop dividing below this energy fraction
  int max_clusters = 8;
  double energy_frac = 0.95;  // equivalent-path rank criterion
  Index max_rank = 12;
  int k_min = 1;
  int k_max = 8;
  double outlier_sigma = 3.0;
  bool coarse = false;  // skip channel division (whole-tensor CP)
  std::uint64_t seed = 0xc3a5ULL;
  CpOptions cp;  // CP options for rank selection / localization
};

// MUSIC frequency estimates {aoa, aod, delay} (digital frequencies) of the
// dominant rank-1 component's three factors. Throws on a zero tensor.
std::array<double, 3> estimate_cluster_center(const Tensor3C& h);

// Per mode, columns of the center-shifted orthonormal DFT basis whose
// projected power is >= power_thresh * (max bin power), restricted to the
// cyclically contiguous run containing the maximum bin.
SubspaceTriple build_cluster_subspace(const Tensor3C& h, const std::array<double, 3>& center,
                                      double power_thresh);

// Orthogonal projection of h onto the triple's subspace (all three modes).
Tensor3C separate_cluster(const Tensor3C& h, const SubspaceTriple& sub);

// Iteratively peel single-cluster channels off h until the residual energy
// drops below stop_frac * |h|^2 or max_clusters parts are extracted.
std::vector<Tensor3C> divide_channel(const Tensor3C& h, double power_thresh, double stop_frac,
                                     int max_clusters);

// Smallest rank R <= max_rank whose CP residual energy is below
// (1 - energy_frac) * |h|^2; max_rank if none qualifies. When `factors` is
// non-null it receives the decomposition at the returned rank.
Index ep_rank(const Tensor3C& h, double energy_frac, Index max_rank, const CpOptions& cp = {},
              CpFactors* factors = nullptr);

// Equivalent-scatterer positions of a single-cluster channel: rank-R CP, then
// per component AoA + delay via MUSIC and a ray/ellipse intersection
// r = (d^2 - |v|^2) / (2 (d - u.v)), v = p_tx - p_rx, u the ray direction from
// p_rx, d = c * (estimated delay + delay_ref). Components with no valid
// intersection are dropped.
std::vector<Vec2> locate_es(const Tensor3C& h_k, Vec2 p_tx, Vec2 p_rx, Index rank,
                            const SceneContext& ctx, double delay_ref = 0.0,
                            const CpOptions& cp = {});

// Same, from an existing CP decomposition.
std::vector<Vec2> locate_es_from_factors(const CpFactors& f, Vec2 p_tx, Vec2 p_rx,
                                         const SceneContext& ctx, double delay_ref = 0.0);

// Centroid clustering over k in [k_min, k_max] selected by Davies-Bouldin
// index, then outlier removal beyond outlier_sigma * RMS cluster radius and
// one centroid recompute. Fewer than k_min points: one group with everything.
ClusterCkm recluster(const std::vector<Vec2>& points, int k_min, int k_max,
                     double outlier_sigma, std::uint64_t seed);

// Full construction: divide each sample's channel (unless coarse), pick each
// part's equivalent-path rank, locate equivalent scatterers, pool, recluster.
ClusterCkm build_ckm(const std::vector<HistoricalSample>& samples, const SceneContext& ctx,
                     const BuilderConfig& cfg);

// Per ES group, min/max of the path parameters of every tx -> es -> rx path,
// each axis expanded by margin * width on both sides.
std::vector<ParamRange> query(const ClusterCkm& ckm, Vec2 p_tx, Vec2 p_rx,
                              const SceneContext& ctx, double margin = 0.1);

}  // namespace ckm
