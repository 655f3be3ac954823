// Reference implementations used only by the tests. Each one is written
// independently of the library code it checks: brute force where possible,
// different algorithms otherwise.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

namespace oracle {

struct P3 {
  double x, y, z;
};

// O(n^2) connected components with union-find; components below min_size
// dropped, each sorted, ordered by smallest member.
inline std::vector<std::vector<std::size_t>> union_find_clusters(const std::vector<P3>& pts, double eps,
                                                                 std::size_t min_size) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y, dz = pts[i].z - pts[j].z;
      if (dx * dx + dy * dy + dz * dz <= eps * eps) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& g : groups) {
    if (!g.empty() && g.size() >= min_size) out.push_back(g);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

// Best total weight over every injective row -> column map (rows may stay
// unassigned, contributing 0). Exponential; for n <= 6.
inline double brute_force_assignment(const std::vector<std::vector<double>>& w) {
  const std::size_t rows = w.size();
  const std::size_t cols = rows ? w[0].size() : 0;
  double best = 0.0;
  std::vector<char> used(cols, 0);
  auto rec = [&](auto&& self, std::size_t r, double acc) -> void {
    if (r == rows) {
      best = std::max(best, acc);
      return;
    }
    self(self, r + 1, acc);
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      self(self, r + 1, acc + w[r][c]);
      used[c] = 0;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

// Plain Dijkstra on an 8-connected grid with the planner's cost and
// corner rule. cells[y * width + x] holds 0-255 values; returns +inf when
// unreachable.
inline double dijkstra(const std::vector<std::uint8_t>& cells, int width, int height, double res, int sx, int sy,
                       int gx, int gy, int lethal, double weight) {
  const double inf = std::numeric_limits<double>::infinity();
  auto blocked = [&](int x, int y) { return cells[static_cast<std::size_t>(y) * width + x] >= lethal; };
  std::vector<double> dist(cells.size(), inf);
  using E = std::pair<double, int>;
  std::priority_queue<E, std::vector<E>, std::greater<>> pq;
  dist[sy * width + sx] = 0.0;
  pq.push({0.0, sy * width + sx});
  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    const int x = i % width, y = i / width;
    if (x == gx && y == gy) return d;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= width || ny >= height || blocked(nx, ny)) continue;
        if (dx && dy && blocked(x + dx, y) && blocked(x, y + dy)) continue;
        const double step = (dx && dy ? std::sqrt(2.0) : 1.0) * res;
        const double nd = d + step * (1.0 + weight * cells[ny * width + nx] / 255.0);
        if (nd < dist[ny * width + nx]) {
          dist[ny * width + nx] = nd;
          pq.push({nd, ny * width + nx});
        }
      }
    }
  }
  return inf;
}

// Vertical least squares z = a x + b y + c through the normal equations
// (Cramer's rule), returned as a unit normal with n.z > 0 and offset d.
struct PlaneFit {
  std::array<double, 3> n;
  double d;
};

inline PlaneFit ls_plane_z(const std::vector<P3>& pts) {
  long double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, s1 = 0, sxz = 0, syz = 0, sz = 0;
  for (const auto& p : pts) {
    sxx += p.x * p.x;
    sxy += p.x * p.y;
    sx += p.x;
    syy += p.y * p.y;
    sy += p.y;
    s1 += 1;
    sxz += p.x * p.z;
    syz += p.y * p.z;
    sz += p.z;
  }
  auto det3 = [](long double a, long double b, long double c, long double d, long double e, long double f,
                 long double g, long double h, long double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  };
  const long double D = det3(sxx, sxy, sx, sxy, syy, sy, sx, sy, s1);
  const long double a = det3(sxz, sxy, sx, syz, syy, sy, sz, sy, s1) / D;
  const long double b = det3(sxx, sxz, sx, sxy, syz, sy, sx, sz, s1) / D;
  const long double c = det3(sxx, sxy, sxz, sxy, syy, syz, sx, sy, sz) / D;
  const long double len = std::sqrt(a * a + b * b + 1.0L);
  return {{static_cast<double>(-a / len), static_cast<double>(-b / len), static_cast<double>(1.0L / len)},
          static_cast<double>(-c / len)};
}

// Compensated (Neumaier) sum.
inline double neumaier_sum(const std::vector<double>& v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

// Overlap area of two axis-aligned rectangles given as [x0, x1) x [y0, y1).
inline double rect_iou(double ax0, double ay0, double ax1, double ay1, double bx0, double by0, double bx1,
                       double by1) {
  const double iw = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double ih = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = iw * ih;
  const double uni = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

}  // namespace oracle
