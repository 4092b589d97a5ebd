// Scratch: compare queried parameter ranges against true per-cluster ranges.
#include <cstdio>
#include <string>
#include <vector>

#include "ckm/bench.hpp"
#include "ckm/rng.hpp"
#include "ckm/ckm_builder.hpp"
#include "ckm/io.hpp"
#include "ckm/scene.hpp"

using namespace ckm;

static void print_range(const char* tag, const ParamRange& r) {
  std::printf("%-8s aoa [%8.4f, %8.4f]  aod [%8.4f, %8.4f]  delay(ns) [%9.2f, %9.2f]\n", tag,
              r.aoa_min, r.aoa_max, r.aod_min, r.aod_max, r.delay_min * 1e9, r.delay_max * 1e9);
}

int main(int argc, char** argv) {
  ExperimentConfig cfg;
  const std::uint64_t trial_seed = seed_mix(cfg.seed, 0);
  const Environment env = trial_environment(cfg, trial_seed);
  const SceneContext ctx = comm_context(cfg);
  const double dref = link_delay_ref(cfg, cfg.tx_target, cfg.rx_target);

  // True per-cluster ranges at the target link.
  std::vector<ParamRange> truth(env.clusters.size());
  for (std::size_t c = 0; c < env.clusters.size(); ++c) {
    bool first = true;
    for (const Vec2& s : env.clusters[c].positions) {
      const PathParams pp =
          path_params(cfg.tx_target, cfg.rx_target, s, tx_array(cfg), rx_array(cfg));
      const double d = pp.delay - dref;
      if (first) {
        truth[c] = {pp.aoa, pp.aoa, pp.aod, pp.aod, d, d};
        first = false;
      } else {
        truth[c].aoa_min = std::min(truth[c].aoa_min, pp.aoa);
        truth[c].aoa_max = std::max(truth[c].aoa_max, pp.aoa);
        truth[c].aod_min = std::min(truth[c].aod_min, pp.aod);
        truth[c].aod_max = std::max(truth[c].aod_max, pp.aod);
        truth[c].delay_min = std::min(truth[c].delay_min, d);
        truth[c].delay_max = std::max(truth[c].delay_max, d);
      }
    }
    std::printf("cluster %zu center (%.0f,%.0f)\n", c, 0.0,
              0.0);
    print_range("  true", truth[c]);
  }

  for (int a = 1; a < argc; ++a) {
    const ClusterCkm ckm = load_ckm(std::string(argv[a]));
    std::printf("\n== %s ==\n", argv[a]);
    const std::vector<ParamRange> q =
        query(ckm, cfg.tx_target, cfg.rx_target, ctx, cfg.query_margin);
    for (std::size_t g = 0; g < q.size(); ++g) {
      // group centroid + radius for orientation
      Vec2 c{0, 0};
      for (const Vec2& p : ckm.es_clusters[g]) {
        c.x += p.x;
        c.y += p.y;
      }
      c.x /= static_cast<double>(ckm.es_clusters[g].size());
      c.y /= static_cast<double>(ckm.es_clusters[g].size());
      double maxr = 0;
      for (const Vec2& p : ckm.es_clusters[g]) {
        const double dx = p.x - c.x, dy = p.y - c.y;
        maxr = std::max(maxr, std::sqrt(dx * dx + dy * dy));
      }
      std::printf("group %zu  n=%zu  centroid (%7.1f,%7.1f)  maxr %5.1f\n", g,
                  ckm.es_clusters[g].size(), c.x, c.y, maxr);
      print_range("  query", q[g]);
    }
  }
  return 0;
}
