#include "mrrecon/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mrrecon {
namespace {

struct Vec2 {
  double x, y;
};

using Polygon = std::vector<Vec2>;

// Keeps the part of `poly` closer to p than to q (half-plane bounded by the bisector).
Polygon clip_to_bisector(const Polygon& poly, Vec2 p, Vec2 q) {
  const Vec2 normal{q.x - p.x, q.y - p.y};
  const Vec2 mid{0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
  auto side = [&](Vec2 v) { return (v.x - mid.x) * normal.x + (v.y - mid.y) * normal.y; };

  Polygon out;
  out.reserve(poly.size() + 1);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    const double sa = side(a);
    const double sb = side(b);
    if (sa <= 0.0) out.push_back(a);
    if ((sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0)) {
      const double t = sa / (sa - sb);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  return out;
}

double area(const Polygon& poly) {
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(acc);
}

double max_radius(const Polygon& poly, Vec2 p) {
  double r2 = 0.0;
  for (const auto& v : poly) r2 = std::max(r2, (v.x - p.x) * (v.x - p.x) + (v.y - p.y) * (v.y - p.y));
  return std::sqrt(r2);
}

}  // namespace

std::vector<double> clipped_voronoi_areas(std::span<const KPoint> points) {
  // Group exact duplicates.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a].kx != points[b].kx ? points[a].kx < points[b].kx : points[a].ky < points[b].ky;
  });
  std::vector<Vec2> sites;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& k = points[order[i]];
    if (i == 0 || !(k == points[order[i - 1]])) {
      sites.push_back({k.kx, k.ky});
      members.emplace_back();
    }
    members.back().push_back(order[i]);
  }

  if (sites.size() < 3)
    throw DegenerateVoronoi("Voronoi density needs at least 3 distinct samples; use radial-spiral or uniform density");
  bool collinear = true;
  const Vec2 o = sites[0], a = sites[1];
  for (std::size_t i = 2; i < sites.size() && collinear; ++i) {
    const double cross = (a.x - o.x) * (sites[i].y - o.y) - (a.y - o.y) * (sites[i].x - o.x);
    if (cross != 0.0) collinear = false;
  }
  if (collinear)
    throw DegenerateVoronoi("all samples are collinear; use radial-spiral or uniform density instead of Voronoi");

  // Uniform bucket grid over the square for neighbour search.
  const auto buckets = static_cast<int>(std::max(1.0, std::floor(std::sqrt(sites.size() / 2.0))));
  const double h = 1.0 / buckets;
  auto bucket_of = [&](double x) { return std::clamp(static_cast<int>(std::floor((x + 0.5) * buckets)), 0, buckets - 1); };
  std::vector<std::vector<std::size_t>> grid(static_cast<std::size_t>(buckets * buckets));
  for (std::size_t i = 0; i < sites.size(); ++i)
    grid[static_cast<std::size_t>(bucket_of(sites[i].y) * buckets + bucket_of(sites[i].x))].push_back(i);

  const Polygon square{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
  std::vector<double> weights(points.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Vec2 p = sites[i];
    const int bx = bucket_of(p.x), by = bucket_of(p.y);
    Polygon cell = square;
    for (int ring = 0; ring <= buckets; ++ring) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          const int cx = bx + dx, cy = by + dy;
          if (cx < 0 || cy < 0 || cx >= buckets || cy >= buckets) continue;
          for (auto j : grid[static_cast<std::size_t>(cy * buckets + cx)])
            if (j != i) cell = clip_to_bisector(cell, p, sites[j]);
        }
      }
      // Sites in later rings are at least ring*h away; they can only cut the
      // cell if closer than twice its circumradius around p.
      if (ring * h >= 2.0 * max_radius(cell, p)) break;
    }
    const double share = area(cell) / static_cast<double>(members[i].size());
    for (auto idx : members[i]) weights[idx] = share;
  }
  return weights;
}

}  // namespace mrrecon
