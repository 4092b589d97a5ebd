// Scratch diagnostic for channel division / ES localization. Not built by
// CMake; compile by hand when poking at divide_channel behavior.
#include <cstdio>
#include <numeric>
#include <vector>

#include "ckm/ckm_builder.hpp"
#include "ckm/cp.hpp"
#include "ckm/geometry.hpp"
#include "ckm/harmonics.hpp"
#include "ckm/scene.hpp"
#include "ckm/tensor.hpp"

using namespace ckm;

namespace {

SceneContext paper_context(Index n_sc) {
  SceneContext ctx;
  ctx.tx = {3, 0.05, 0.1, {0, 0}, {0, -1}};
  ctx.rx = {16, 0.05, 0.1, {-150, 0}, {0, -1}};
  ctx.ofdm = {n_sc, 100e6 / static_cast<double>(n_sc)};
  return ctx;
}

double link_delay_ref(Vec2 p_tx, Vec2 p_rx, double guard_m = 150.0) {
  return (distance(p_tx, p_rx) + guard_m) / kSpeedOfLight;
}

double fsq(const Tensor3C& t) {
  double e = 0.0;
  for (const cplx& v : t.data) e += std::norm(v);
  return e;
}

cplx tdot(const Tensor3C& a, const Tensor3C& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += std::conj(a.data[i]) * b.data[i];
  return s;
}

std::array<double, 3> true_center_freqs(Vec2 c, Vec2 p_tx, Vec2 p_rx, const SceneContext& ctx,
                                        double ref) {
  const PathParams pp = path_params(p_tx, p_rx, c, ctx.tx, ctx.rx);
  return path_frequencies(pp, ctx.tx, ctx.rx, ctx.ofdm, ref);
}

// Replicates the library's run-selection so the kept bins can be printed.
void dump_mode_bins(const Tensor3C& h, int mode, double center, double thresh) {
  const Index n = h.dims[mode - 1];
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  MatrixXc basis = shifted_orthobasis(n, center, all);
  Eigen::VectorXd power = (basis.adjoint() * unfold(h, mode)).rowwise().squaredNorm();
  Index imax = 0;
  const double pmax = power.maxCoeff(&imax);
  std::printf("    mode %d n=%3ld center=%+.4f argmax=%ld\n", mode, (long)n, center, (long)imax);
  std::printf("      bins (idx:pct of max): ");
  for (Index i = 0; i < n; ++i) {
    const double pct = 100.0 * power(i) / pmax;
    if (pct >= 100.0 * thresh * 0.2 || n <= 16)  // show down to 1/5 of the cut
      std::printf("%ld:%.1f ", (long)i, pct);
  }
  std::printf("\n");
}

void mode_captures(const Tensor3C& h, const SubspaceTriple& sub) {
  const double total = fsq(h);
  auto cap = [&](const MatrixXc& g, int mode) {
    Tensor3C c = mode_n_product(h, g.adjoint(), mode);
    return fsq(c) / total;
  };
  std::printf("    cols=(%ld,%ld,%ld) capture aoa=%.4f aod=%.4f delay=%.4f\n",
              (long)sub.g_aoa.cols(), (long)sub.g_aod.cols(), (long)sub.g_delay.cols(),
              cap(sub.g_aoa, 1), cap(sub.g_aod, 2), cap(sub.g_delay, 3));
}

void report_divide(const char* name, Vec2 p_tx, const std::vector<Vec2>& centers,
                   std::uint64_t seed, double thresh) {
  std::printf("== %s  tx=(%g,%g) thresh=%g ==\n", name, p_tx.x, p_tx.y, thresh);
  SceneContext ctx = paper_context(210);
  const Vec2 p_rx{-150, 0};
  const double ref = link_delay_ref(p_tx, p_rx);
  Environment env = sample_environment(centers, 50, 10.0, seed);
  Tensor3C h = assemble_channel(env, p_tx, p_rx, ctx.tx, ctx.rx, ctx.ofdm, ref);
  std::vector<Tensor3C> truth;
  for (std::size_t k = 0; k < env.clusters.size(); ++k) {
    Environment one;
    one.clusters.push_back(env.clusters[k]);
    truth.push_back(assemble_channel(one, p_tx, p_rx, ctx.tx, ctx.rx, ctx.ofdm, ref));
    const auto f = true_center_freqs(centers[k], p_tx, p_rx, ctx, ref);
    std::printf("  truth %zu e=%.3f freqs=(%+.4f, %+.4f, %+.4f)\n", k, fsq(truth[k]), f[0], f[1],
                f[2]);
  }
  const double total = fsq(h);

  Tensor3C res = h;
  for (int it = 0; it < 8; ++it) {
    if (fsq(res) < 0.02 * total) break;
    const auto c = estimate_cluster_center(res);
    SubspaceTriple sub = build_cluster_subspace(res, c, thresh);
    Tensor3C part = separate_cluster(res, sub);
    std::printf("  it %d center=(%+.4f, %+.4f, %+.4f) part=%.3f resid->%.3f\n", it, c[0], c[1],
                c[2], fsq(part) / total, (fsq(res) - fsq(part)) / total);
    mode_captures(res, sub);
    std::printf("    align:");
    for (const auto& t : truth)
      std::printf(" %.3f", std::abs(tdot(part, t)) / std::sqrt(fsq(part) * fsq(t)));
    std::printf("\n");
    res = subtract(res, part);
  }
}

void report_single_detail(Vec2 p_tx, std::uint64_t seed) {
  std::printf("== single-cluster detail  tx=(%g,%g) seed=%llu ==\n", p_tx.x, p_tx.y,
              (unsigned long long)seed);
  SceneContext ctx = paper_context(210);
  const Vec2 p_rx{-150, 0};
  const double ref = link_delay_ref(p_tx, p_rx);
  Environment env = sample_environment({{0, 200}}, 50, 10.0, seed);
  Tensor3C h = assemble_channel(env, p_tx, p_rx, ctx.tx, ctx.rx, ctx.ofdm, ref);
  const auto tc = true_center_freqs({0, 200}, p_tx, p_rx, ctx, ref);
  std::printf("  true center freqs=(%+.4f, %+.4f, %+.4f)\n", tc[0], tc[1], tc[2]);
  // true per-path frequency spread
  double lo[3] = {1e9, 1e9, 1e9}, hi[3] = {-1e9, -1e9, -1e9};
  for (const Vec2& s : env.clusters[0].positions) {
    const auto f = true_center_freqs(s, p_tx, p_rx, ctx, ref);
    for (int m = 0; m < 3; ++m) {
      lo[m] = std::min(lo[m], f[m]);
      hi[m] = std::max(hi[m], f[m]);
    }
  }
  std::printf("  true spread aoa=[%+.4f,%+.4f] aod=[%+.4f,%+.4f] delay=[%+.4f,%+.4f]\n", lo[0],
              hi[0], lo[1], hi[1], lo[2], hi[2]);

  const auto c = estimate_cluster_center(h);
  std::printf("  est center=(%+.4f, %+.4f, %+.4f)\n", c[0], c[1], c[2]);
  for (int m = 1; m <= 3; ++m) dump_mode_bins(h, m, c[m - 1], 0.02);
  SubspaceTriple sub = build_cluster_subspace(h, c, 0.02);
  mode_captures(h, sub);
  Tensor3C part = separate_cluster(h, sub);
  std::printf("  part fraction=%.4f\n", fsq(part) / fsq(h));
}

void report_ckm(Vec2 p_tx, std::uint64_t seed) {
  std::printf("== build_ckm single sample  tx=(%g,%g) seed=%llu ==\n", p_tx.x, p_tx.y,
              (unsigned long long)seed);
  SceneContext ctx = paper_context(210);
  const Vec2 p_rx{-150, 0};
  const double ref = link_delay_ref(p_tx, p_rx);
  Environment env = sample_environment({{0, 200}}, 50, 10.0, seed);
  Tensor3C h = assemble_channel(env, p_tx, p_rx, ctx.tx, ctx.rx, ctx.ofdm, ref);
  // true ranges for comparison
  double lo[3] = {1e9, 1e9, 1e9}, hi[3] = {-1e9, -1e9, -1e9};
  for (const Vec2& s : env.clusters[0].positions) {
    const auto f = true_center_freqs(s, p_tx, p_rx, ctx, ref);
    for (int m = 0; m < 3; ++m) {
      lo[m] = std::min(lo[m], f[m]);
      hi[m] = std::max(hi[m], f[m]);
    }
  }
  std::printf("  true aoa=[%+.4f,%+.4f] delay=[%+.4f,%+.4f]\n", lo[0], hi[0], lo[2], hi[2]);

  auto parts = divide_channel(h, 0.02, 0.08, 8);
  std::printf("  parts=%zu\n", parts.size());
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    CpFactors f;
    const Index r = ep_rank(parts[pi], 0.95, 8, {}, &f);
    std::printf("  part %zu e=%.3f rank=%ld\n", pi, fsq(parts[pi]) / fsq(h), (long)r);
    for (Index q = 0; q < f.rank; ++q) {
      const double w_aoa = music_freq(f.A.col(q));
      const double w_del = music_freq(f.C.col(q));
      const double wgt = std::abs(f.weights(q));
      // replicate locate_es_from_factors geometry
      const double sin_t = w_aoa * ctx.rx.wavelength / ctx.rx.spacing;
      const double d = kSpeedOfLight * (w_del / ctx.ofdm.delta_f + ref);
      std::printf("    ep %ld w=%.3f aoa=%+.4f delay=%+.4f d=%.1f sin=%+.3f", (long)q, wgt, w_aoa,
                  w_del, d, sin_t);
      if (std::abs(sin_t) <= 1.0) {
        const Vec2 bs = broadside(ctx.rx);
        const Vec2 u{std::sqrt(1 - sin_t * sin_t) * bs.x + sin_t * ctx.rx.axis.x,
                     std::sqrt(1 - sin_t * sin_t) * bs.y + sin_t * ctx.rx.axis.y};
        const Vec2 v = p_tx - p_rx;
        const double den = d - dot(u, v);
        if (den > 0 && d > norm(v)) {
          const double rr = (d * d - dot(v, v)) / (2 * den);
          const Vec2 es = p_rx + rr * u;
          std::printf(" es=(%.1f,%.1f) dist=%.1f", es.x, es.y, distance(es, {0, 200}));
        }
      }
      std::printf("\n");
    }
    const auto es = locate_es_from_factors(f, p_tx, p_rx, ctx, ref);
    std::printf("    kept %zu es\n", es.size());
  }

  BuilderConfig cfg;
  cfg.k_min = 1;
  cfg.k_max = 1;
  cfg.max_rank = 8;
  cfg.power_thresh = 0.02;
  cfg.stop_frac = 0.08;
  ClusterCkm ckm = build_ckm({{h, p_tx, p_rx, ref}}, ctx, cfg);
  for (const auto& grp : ckm.es_clusters)
    for (const Vec2& es : grp)
      std::printf("  final es=(%.1f,%.1f) dist=%.1f\n", es.x, es.y, distance(es, {0, 200}));
}

}  // namespace

int main() {
  report_divide("four clusters", {200, 100}, {{0, 200}, {0, -200}, {150, -100}, {150, 100}}, 4242,
                0.05);
  std::printf("\n");
  report_single_detail({100, 60}, 17);
  std::printf("\n");
  report_ckm({100, 60}, 808);
  return 0;
}
