#include "ckm/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "ckm/rng.hpp"

namespace ckm {

namespace {

double sq(double v) { return v * v; }

double sq_dist(Vec2 a, Vec2 b) { return sq(a.x - b.x) + sq(a.y - b.y); }

std::vector<Vec2> seed_plus_plus(const std::vector<Vec2>& pts, int k, Rng& rng) {
  std::vector<Vec2> centroids;
  centroids.reserve(k);
  centroids.push_back(pts[rng.below(pts.size())]);
  std::vector<double> d2(pts.size());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& c : centroids) best = std::min(best, sq_dist(pts[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // All points already covered; duplicate any point.
      centroids.push_back(pts[rng.below(pts.size())]);
      continue;
    }
    double target = rng.uniform() * total;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      target -= d2[i];
      if (target <= 0.0) {
        pick = i;
        break;
      }
      pick = i;
    }
    centroids.push_back(pts[pick]);
  }
  return centroids;
}

KmeansResult lloyd(const std::vector<Vec2>& pts, int k, Rng& rng, int max_iters) {
  KmeansResult r;
  r.centroids = seed_plus_plus(pts, k, rng);
  r.assignment.assign(pts.size(), 0);
  const auto n = pts.size();

  for (int it = 0; it < max_iters; ++it) {
    bool changed = (it == 0);
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(pts[i], r.centroids[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (best != r.assignment[i]) changed = true;
      r.assignment[i] = best;
    }

    // Re-seed empty clusters with the farthest point from its own centroid.
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) ++count[r.assignment[i]];
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      double far_d = -1.0;
      std::size_t far_i = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (count[r.assignment[i]] <= 1) continue;
        const double d = sq_dist(pts[i], r.centroids[r.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far_i = i;
        }
      }
      if (far_d < 0.0) break;  // every cluster is a singleton already
      --count[r.assignment[far_i]];
      r.assignment[far_i] = c;
      ++count[c];
      changed = true;
    }

    if (!changed) break;
    std::vector<Vec2> sums(k, Vec2{});
    std::vector<int> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[r.assignment[i]] = sums[r.assignment[i]] + pts[i];
      ++cnt[r.assignment[i]];
    }
    for (int c = 0; c < k; ++c)
      if (cnt[c] > 0) r.centroids[c] = (1.0 / cnt[c]) * sums[c];
  }

  r.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) r.inertia += sq_dist(pts[i], r.centroids[r.assignment[i]]);
  return r;
}

}  // namespace

KmeansResult kmeans(const std::vector<Vec2>& points, int k, std::uint64_t seed,
                    int restarts, int max_iters) {
  if (points.empty()) throw std::invalid_argument("kmeans: no points");
  if (k < 1 || k > static_cast<int>(points.size()))
    throw std::invalid_argument("kmeans: k out of range");
  KmeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int s = 0; s < std::max(1, restarts); ++s) {
    Rng rng(seed_mix(seed, static_cast<std::uint64_t>(s)));
    KmeansResult r = lloyd(points, k, rng, max_iters);
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

double davies_bouldin(const std::vector<Vec2>& points, const KmeansResult& r) {
  const int k = static_cast<int>(r.centroids.size());
  std::vector<double> disp(k, 0.0);
  std::vector<int> cnt(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    disp[r.assignment[i]] += sq_dist(points[i], r.centroids[r.assignment[i]]);
    ++cnt[r.assignment[i]];
  }
  for (int c = 0; c < k; ++c) disp[c] = cnt[c] > 0 ? std::sqrt(disp[c] / cnt[c]) : 0.0;

  if (k == 1) return disp[0] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();

  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      const double d = std::sqrt(sq_dist(r.centroids[i], r.centroids[j]));
      const double ratio = d > 0.0 ? (disp[i] + disp[j]) / d
                                   : std::numeric_limits<double>::infinity();
      worst = std::max(worst, ratio);
    }
    acc += worst;
  }
  return acc / k;
}

}  // namespace ckm
