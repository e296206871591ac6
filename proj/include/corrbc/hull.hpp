#pragma once

#include "rational.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

namespace corrbc {

template <class S>
struct Point2 {
  S x{};
  S y{};
  friend bool operator==(const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }
  friend bool operator<(const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }
};

template <class S>
S cross(const Point2<S>& o, const Point2<S>& a, const Point2<S>& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Convex hull (counterclockwise, collinear points dropped) by monotone chain.
template <class S>
std::vector<Point2<S>> convex_hull(std::vector<Point2<S>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<Point2<S>> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && !(cross(h[k - 2], h[k - 1], pts[i]) > S(0))) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && !(cross(h[k - 2], h[k - 1], pts[i - 1]) > S(0))) --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  return h;
}

// Nonnegative point set with its convex hull; the origin is always included.
template <class S>
struct Region2D {
  std::vector<Point2<S>> points;
  std::vector<Point2<S>> hull;

  static Region2D from_points(std::vector<Point2<S>> pts, bool axis_projections = false) {
    Region2D r;
    r.points = pts;
    std::vector<Point2<S>> all = pts;
    all.push_back({S(0), S(0)});
    if (axis_projections)
      for (const auto& p : pts) {
        all.push_back({p.x, S(0)});
        all.push_back({S(0), p.y});
      }
    r.hull = convex_hull(all);
    return r;
  }

  bool contains(const Point2<S>& p, S tol = S(0)) const {
    if (hull.empty()) return false;
    if (hull.size() == 1) return p == hull[0];
    if (hull.size() == 2) {
      const S c = cross(hull[0], hull[1], p);
      if (c > tol || c < -tol) return false;
      const auto lo = std::min(hull[0], hull[1]), hi = std::max(hull[0], hull[1]);
      return !(p.x < lo.x - tol) && !(p.x > hi.x + tol) && !(p.y < std::min(lo.y, hi.y) - tol) &&
             !(p.y > std::max(lo.y, hi.y) + tol);
    }
    for (std::size_t i = 0; i < hull.size(); ++i)
      if (cross(hull[i], hull[(i + 1) % hull.size()], p) < -tol) return false;
    return true;
  }

  bool contains(const Region2D& other, S tol = S(0)) const {
    for (const auto& v : other.hull)
      if (!contains(v, tol)) return false;
    return true;
  }

  // Largest t with (t, t) in the hull.
  S equal_rate() const {
    S best(0);
    const std::size_t n = hull.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = hull[i];
      const auto& b = hull[(i + 1) % n];
      if (a.x == a.y && a.x > best) best = a.x;
      const S den = (b.y - a.y) - (b.x - a.x);
      if (den == S(0)) continue;
      const S u = (a.x - a.y) / den;
      if (u < S(0) || u > S(1)) continue;
      const S t = a.x + u * (b.x - a.x);
      if (t > best) best = t;
    }
    return best;
  }
};

template <class S>
bool same_vertex_set(const std::vector<Point2<S>>& a, std::vector<Point2<S>> b) {
  std::vector<Point2<S>> x = a;
  std::sort(x.begin(), x.end());
  std::sort(b.begin(), b.end());
  return x == b;
}

using QPoint = Point2<Q>;
using DPoint = Point2<double>;
using QRegion = Region2D<Q>;
using DRegion = Region2D<double>;

// ---------------------------------------------------------------- 3-D facets

using Q3 = std::array<Q, 3>;

struct Facet3 {
  Q3 normal;                     ///< outward, scaled so the first nonzero entry has magnitude 1
  Q offset;                      ///< normal . x <= offset on the point set
  std::vector<std::size_t> on;   ///< indices of points on the facet, ascending
};

// Brute force over point triples; exact, so only meant for small clouds.
inline std::vector<Facet3> hull3_facets(const std::vector<Q3>& pts) {
  auto sub = [](const Q3& a, const Q3& b) { return Q3{a[0] - b[0], a[1] - b[1], a[2] - b[2]}; };
  auto dot = [](const Q3& a, const Q3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; };
  std::vector<Facet3> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const Q3 u = sub(pts[j], pts[i]), v = sub(pts[k], pts[i]);
        Q3 nrm{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
        if (nrm[0] == Q(0) && nrm[1] == Q(0) && nrm[2] == Q(0)) continue;
        Q off = dot(nrm, pts[i]);
        bool above = false, below = false;
        for (const auto& p : pts) {
          const Q d = dot(nrm, p) - off;
          if (d > Q(0)) above = true;
          if (d < Q(0)) below = true;
        }
        if (above && below) continue;
        if (above) {
          for (auto& c : nrm) c = -c;
          off = -off;
        }
        Q scale(0);
        for (const auto& c : nrm)
          if (c != Q(0)) {
            scale = c < Q(0) ? -c : c;
            break;
          }
        for (auto& c : nrm) c /= scale;
        off /= scale;
        if (std::any_of(out.begin(), out.end(), [&](const Facet3& f) { return f.normal == nrm && f.offset == off; }))
          continue;
        Facet3 f{nrm, off, {}};
        for (std::size_t m = 0; m < n; ++m)
          if (dot(nrm, pts[m]) == off) f.on.push_back(m);
        out.push_back(std::move(f));
      }
  return out;
}

}  // namespace corrbc
