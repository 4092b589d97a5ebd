#include "ckm/ckm_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ckm/harmonics.hpp"
#include "ckm/kmeans.hpp"
#include "ckm/rng.hpp"

namespace ckm {

namespace {

// Columns of the center-shifted DFT basis forming the contiguous power run
// around the strongest bin. Multipath interference can null individual bins
// inside a cluster's span, so the run may bridge up to `gap` consecutive
// sub-threshold bins (gap stays small so well-separated clusters cannot be
// joined through a wide quiet region).
MatrixXc mode_subspace(const Tensor3C& h, int mode, double center, double thresh) {
  const Index n = h.dims[mode - 1];
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  MatrixXc basis = shifted_orthobasis(n, center, all);
  MatrixXc proj = basis.adjoint() * unfold(h, mode);
  Eigen::VectorXd power = proj.rowwise().squaredNorm();

  // Anchor on the center's own peak: climb uphill from bin 0 (the center
  // frequency) to the nearest local maximum. Using the global argmax instead
  // can anchor different modes on different clusters of a mixture, leaving a
  // near-empty intersection. Identical for single-cluster profiles.
  Index imax = 0;
  while (true) {
    const Index up = (imax + 1) % n, dn = (imax + n - 1) % n;
    Index next = imax;
    if (power(up) > power(next)) next = up;
    if (power(dn) > power(next)) next = dn;
    if (next == imax) break;
    imax = next;
  }
  const double cut = thresh * power(imax);
  const Index gap = n >= 64 ? 3 : (n >= 8 ? 1 : 0);

  std::vector<char> kept(static_cast<std::size_t>(n), 0);
  kept[static_cast<std::size_t>(imax)] = 1;
  Index n_kept = 1;
  Index left = imax, right = imax;
  for (int dir = 0; dir < 2; ++dir) {
    Index& edge = dir == 0 ? left : right;
    const Index step = dir == 0 ? -1 : +1;
    const Index other = dir == 0 ? right : left;
    while (true) {
      // Look ahead past at most `gap` quiet bins for the next loud bin.
      Index hit = -1;
      for (Index j = 1; j <= gap + 1; ++j) {
        const Index idx = ((edge + step * j) % n + n) % n;
        if (idx == other || kept[static_cast<std::size_t>(idx)]) break;
        if (power(idx) >= cut) {
          hit = j;
          break;
        }
      }
      if (hit < 0) break;
      for (Index j = 1; j <= hit; ++j) {
        const Index idx = ((edge + step * j) % n + n) % n;
        kept[static_cast<std::size_t>(idx)] = 1;
        ++n_kept;
      }
      edge = ((edge + step * hit) % n + n) % n;
      if (n_kept >= n) break;
    }
    if (n_kept >= n) break;
  }

  MatrixXc out(n, n_kept);
  Index col = 0;
  for (Index i = 0; i < n; ++i)
    if (kept[static_cast<std::size_t>(i)]) out.col(col++) = basis.col(i);
  return out;
}

}  // namespace

std::array<double, 3> estimate_cluster_center(const Tensor3C& h) {
  CpFactors f = best_rank1(h);
  return {music_freq(f.A.col(0)), music_freq(f.B.col(0)), music_freq(f.C.col(0))};
}

SubspaceTriple build_cluster_subspace(const Tensor3C& h, const std::array<double, 3>& center,
                                      double power_thresh) {
  if (power_thresh <= 0.0 || power_thresh >= 1.0)
    throw std::invalid_argument("build_cluster_subspace: power_thresh must be in (0,1)");
  SubspaceTriple sub;
  sub.g_aoa = mode_subspace(h, 1, center[0], power_thresh);
  sub.g_aod = mode_subspace(h, 2, center[1], power_thresh);
  sub.g_delay = mode_subspace(h, 3, center[2], power_thresh);
  return sub;
}

Tensor3C separate_cluster(const Tensor3C& h, const SubspaceTriple& sub) {
  if (sub.g_aoa.rows() != h.dims[0] || sub.g_aod.rows() != h.dims[1] ||
      sub.g_delay.rows() != h.dims[2])
    throw std::invalid_argument("separate_cluster: subspace/tensor shape mismatch");
  // Project into the triple's coordinates and expand back.
  Tensor3C core = mode_n_product(h, sub.g_aoa.adjoint(), 1);
  core = mode_n_product(core, sub.g_aod.adjoint(), 2);
  core = mode_n_product(core, sub.g_delay.adjoint(), 3);
  Tensor3C out = mode_n_product(core, sub.g_aoa, 1);
  out = mode_n_product(out, sub.g_aod, 2);
  out = mode_n_product(out, sub.g_delay, 3);
  return out;
}

std::vector<Tensor3C> divide_channel(const Tensor3C& h, double power_thresh, double stop_frac,
                                     int max_clusters) {
  if (stop_frac <= 0.0 || stop_frac >= 1.0)
    throw std::invalid_argument("divide_channel: stop_frac must be in (0,1)");
  std::vector<Tensor3C> parts;
  const double total = frobenius_sq(h);
  if (total <= 0.0) return parts;
  Tensor3C res = h;
  while (static_cast<int>(parts.size()) < max_clusters && frobenius_sq(res) >= stop_frac * total) {
    const auto center = estimate_cluster_center(res);
    const SubspaceTriple sub = build_cluster_subspace(res, center, power_thresh);
    Tensor3C part = separate_cluster(res, sub);
    // No progress (subspace missed the residual's content): bail out rather
    // than spin on the same center extracting nothing.
    if (frobenius_sq(part) < 1e-3 * frobenius_sq(res)) break;
    res = subtract(res, part);
    parts.push_back(std::move(part));
  }
  return parts;
}

Index ep_rank(const Tensor3C& h, double energy_frac, Index max_rank, const CpOptions& cp,
              CpFactors* factors) {
  if (energy_frac <= 0.0 || energy_frac >= 1.0)
    throw std::invalid_argument("ep_rank: energy_frac must be in (0,1)");
  const double total = frobenius_sq(h);
  const double target = (1.0 - energy_frac) * total;
  for (Index r = 1; r <= max_rank; ++r) {
    CpOptions o = cp;
    o.seed = seed_mix(cp.seed, static_cast<std::uint64_t>(r));
    CpFactors f = cp_decompose(h, r, o);
    const double resid = frobenius_sq(subtract(h, cp_reconstruct(f, h.dims)));
    if (resid < target || r == max_rank) {
      if (factors) *factors = std::move(f);
      return r;
    }
  }
  return max_rank;  // unreachable
}

std::vector<Vec2> locate_es_from_factors(const CpFactors& f, Vec2 p_tx, Vec2 p_rx,
                                         const SceneContext& ctx, double delay_ref) {
  std::vector<Vec2> out;
  const Vec2 v = p_tx - p_rx;
  const Vec2 bs = broadside(ctx.rx);
  for (Index r = 0; r < f.rank; ++r) {
    const double w_aoa = music_freq(f.A.col(r));
    const double w_del = music_freq(f.C.col(r));
    const double sin_theta = w_aoa * ctx.rx.wavelength / ctx.rx.spacing;
    if (std::abs(sin_theta) > 1.0) continue;
    const double theta = std::asin(sin_theta);
    const Vec2 u = std::cos(theta) * bs + std::sin(theta) * ctx.rx.axis;
    const double d = kSpeedOfLight * (w_del / ctx.ofdm.delta_f + delay_ref);
    if (d <= norm(v)) continue;  // delay shorter than the direct path
    const double den = d - dot(u, v);
    if (den <= 0.0) continue;  // ray does not meet the ellipse
    const double rr = (d * d - dot(v, v)) / (2.0 * den);
    if (rr <= 0.0) continue;
    out.push_back(p_rx + rr * u);
  }
  return out;
}

std::vector<Vec2> locate_es(const Tensor3C& h_k, Vec2 p_tx, Vec2 p_rx, Index rank,
                            const SceneContext& ctx, double delay_ref, const CpOptions& cp) {
  if (rank < 1) throw std::invalid_argument("locate_es: rank must be >= 1");
  CpFactors f = rank == 1 ? best_rank1(h_k) : cp_decompose(h_k, rank, cp);
  return locate_es_from_factors(f, p_tx, p_rx, ctx, delay_ref);
}

ClusterCkm recluster(const std::vector<Vec2>& points, int k_min, int k_max,
                     double outlier_sigma, std::uint64_t seed) {
  if (points.empty()) throw std::invalid_argument("recluster: no points");
  ClusterCkm out;
  if (static_cast<int>(points.size()) < std::max(1, k_min)) {
    out.es_clusters.push_back(points);
    return out;
  }
  const int lo = std::max(1, k_min);
  const int hi = std::min(k_max, static_cast<int>(points.size()));

  KmeansResult best;
  double best_dbi = std::numeric_limits<double>::infinity();
  bool have = false;
  for (int k = lo; k <= hi; ++k) {
    KmeansResult r = kmeans(points, k, seed_mix(seed, static_cast<std::uint64_t>(k)));
    const double dbi = davies_bouldin(points, r);
    if (!have || dbi < best_dbi) {
      best = std::move(r);
      best_dbi = dbi;
      have = true;
    }
  }

  const int k = static_cast<int>(best.centroids.size());
  std::vector<double> rms(k, 0.0);
  std::vector<int> cnt(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = best.assignment[i];
    const double d = distance(points[i], best.centroids[c]);
    rms[c] += d * d;
    ++cnt[c];
  }
  for (int c = 0; c < k; ++c) rms[c] = cnt[c] > 0 ? std::sqrt(rms[c] / cnt[c]) : 0.0;

  std::vector<std::vector<Vec2>> groups(k);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = best.assignment[i];
    if (distance(points[i], best.centroids[c]) <= outlier_sigma * rms[c])
      groups[c].push_back(points[i]);
  }

  // One centroid recompute on the retained points, then order groups by it.
  std::vector<std::pair<Vec2, std::vector<Vec2>>> keep;
  for (auto& g : groups) {
    if (g.empty()) continue;
    Vec2 c{};
    for (const Vec2& p : g) c = c + p;
    c = (1.0 / static_cast<double>(g.size())) * c;
    keep.emplace_back(c, std::move(g));
  }
  std::sort(keep.begin(), keep.end(), [](const auto& a, const auto& b) {
    return a.first.x != b.first.x ? a.first.x < b.first.x : a.first.y < b.first.y;
  });
  for (auto& [c, g] : keep) out.es_clusters.push_back(std::move(g));
  if (out.es_clusters.empty()) out.es_clusters.push_back(points);  // degenerate guard
  return out;
}

ClusterCkm build_ckm(const std::vector<HistoricalSample>& samples, const SceneContext& ctx,
                     const BuilderConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("build_ckm: no samples");
  std::vector<Vec2> pool;
  std::uint64_t part_id = 0;
  for (const HistoricalSample& s : samples) {
    std::vector<Tensor3C> parts;
    if (cfg.coarse)
      parts.push_back(s.h_hat);
    else
      parts = divide_channel(s.h_hat, cfg.power_thresh, cfg.stop_frac, cfg.max_clusters);
    for (const Tensor3C& part : parts) {
      CpOptions cp = cfg.cp;
      cp.seed = seed_mix(cfg.seed, ++part_id);
      CpFactors f;
      ep_rank(part, cfg.energy_frac, cfg.max_rank, cp, &f);
      std::vector<Vec2> es = locate_es_from_factors(f, s.p_tx, s.p_rx, ctx, s.delay_ref);
      pool.insert(pool.end(), es.begin(), es.end());
    }
  }
  if (pool.empty()) throw std::runtime_error("build_ckm: no equivalent scatterers located");
  return recluster(pool, cfg.k_min, cfg.k_max, cfg.outlier_sigma, seed_mix(cfg.seed, 0));
}

std::vector<ParamRange> query(const ClusterCkm& ckm, Vec2 p_tx, Vec2 p_rx,
                              const SceneContext& ctx, double margin) {
  std::vector<ParamRange> out;
  out.reserve(ckm.es_clusters.size());
  for (const auto& group : ckm.es_clusters) {
    if (group.empty()) throw std::invalid_argument("query: empty equivalent-scatterer group");
    ParamRange r;
    r.aoa_min = r.aod_min = r.delay_min = std::numeric_limits<double>::infinity();
    r.aoa_max = r.aod_max = r.delay_max = -std::numeric_limits<double>::infinity();
    for (const Vec2& es : group) {
      const PathParams pp = path_params(p_tx, p_rx, es, ctx.tx, ctx.rx);
      r.aoa_min = std::min(r.aoa_min, pp.aoa);
      r.aoa_max = std::max(r.aoa_max, pp.aoa);
      r.aod_min = std::min(r.aod_min, pp.aod);
      r.aod_max = std::max(r.aod_max, pp.aod);
      r.delay_min = std::min(r.delay_min, pp.delay);
      r.delay_max = std::max(r.delay_max, pp.delay);
    }
    const double wa = r.aoa_max - r.aoa_min;
    const double wo = r.aod_max - r.aod_min;
    const double wd = r.delay_max - r.delay_min;
    r.aoa_min -= margin * wa;
    r.aoa_max += margin * wa;
    r.aod_min -= margin * wo;
    r.aod_max += margin * wo;
    r.delay_min = std::max(r.delay_min - margin * wd, std::numeric_limits<double>::min());
    r.delay_max += margin * wd;
    out.push_back(r);
  }
  return out;
}

}  // namespace ckm
