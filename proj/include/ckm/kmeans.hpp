#pragma once

#include <cstdint>
#include <vector>

#include "ckm/geometry.hpp"

namespace ckm {

struct KmeansResult {
  std::vector<Vec2> centroids;  // k
  std::vector<int> assignment;  // one entry per input point
  double inertia = 0.0;         // sum of squared point-to-centroid distances
};

// Lloyd iterations with kmeans++ seeding; best of `restarts` runs by inertia.
// Requires 1 <= k <= points.size(). Empty clusters are re-seeded with the
// point currently farthest from its centroid.
KmeansResult kmeans(const std::vector<Vec2>& points, int k, std::uint64_t seed,
                    int restarts = 10, int max_iters = 100);

// Davies-Bouldin index (lower is better) with RMS cluster dispersion.
// k = 1 has no pairwise term: returns 0 when all points coincide with the
// centroid (a perfect single cluster), +infinity otherwise. Coincident
// centroids also yield +infinity.
double davies_bouldin(const std::vector<Vec2>& points, const KmeansResult& r);

}  // namespace ckm
