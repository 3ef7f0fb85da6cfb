#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "dynpca/error.hpp"
#include "dynpca/linalg.hpp"

namespace dynpca {

template <std::size_t D>
using PointCloud = std::vector<Vec<D>>;

/// K vertices in D dimensions: a segment (K=2), triangle (K=3) or
/// tetrahedron (K=4).
template <std::size_t D, std::size_t K>
struct Simplex {
  static_assert(K >= 2 && K <= D + 1, "simplex must have between 2 and D+1 vertices");
  static constexpr std::size_t kDim = D;
  static constexpr std::size_t kVertices = K;

  std::array<Vec<D>, K> v{};

  friend bool operator==(const Simplex&, const Simplex&) = default;
};

using Segment2 = Simplex<2, 2>;
using Triangle2 = Simplex<2, 3>;
using Triangle3 = Simplex<3, 3>;
using Tetra3 = Simplex<3, 4>;

namespace detail {

constexpr double factorial(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f;
}

}  // namespace detail

/// Signed D-volume of a full-dimensional simplex:
/// det(x_0 - x_D, ..., x_{D-1} - x_D) / D!.
template <std::size_t D>
double signed_measure(const Simplex<D, D + 1>& s) {
  Matrix<D> m{};
  for (std::size_t l = 0; l < D; ++l) m[l] = sub(s.v[l], s.v[D]);
  return determinant(m) / detail::factorial(D);
}

/// Unsigned (K-1)-dimensional measure: length, area or volume.
template <std::size_t D, std::size_t K>
double simplex_measure(const Simplex<D, K>& s) {
  if constexpr (K == D + 1) {
    return std::abs(signed_measure(s));
  } else if constexpr (K == 2) {
    return norm(sub(s.v[1], s.v[0]));
  } else if constexpr (D == 3 && K == 3) {
    return 0.5 * norm(cross(sub(s.v[1], s.v[0]), sub(s.v[2], s.v[0])));
  } else {
    constexpr std::size_t E = K - 1;
    std::array<Vec<D>, E> edge{};
    for (std::size_t l = 0; l < E; ++l) edge[l] = sub(s.v[l + 1], s.v[0]);
    Matrix<E> gram{};
    for (std::size_t a = 0; a < E; ++a)
      for (std::size_t b = 0; b < E; ++b) gram[a][b] = dot(edge[a], edge[b]);
    return std::sqrt(std::max(0.0, determinant(gram))) / detail::factorial(E);
  }
}

template <std::size_t D, std::size_t K>
Vec<D> simplex_centroid(const Simplex<D, K>& s) {
  Vec<D> c{};
  for (const auto& x : s.v) c = add(c, x);
  return scale(c, 1.0 / static_cast<double>(K));
}

/// Indexed triangle surface. Volume computations expect a closed surface
/// with consistently outward-facing (counter-clockwise seen from outside)
/// triangles.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  Triangle3 triangle(std::size_t k) const {
    const auto& t = triangles[k];
    return Triangle3{{vertices[t[0]], vertices[t[1]], vertices[t[2]]}};
  }

  std::vector<Triangle3> faces() const {
    std::vector<Triangle3> out;
    out.reserve(triangles.size());
    for (std::size_t k = 0; k < triangles.size(); ++k) out.push_back(triangle(k));
    return out;
  }

  /// Throws IndexOutOfRange or Degenerate (area <= 1e-12).
  void validate() const {
    for (const auto& v : vertices)
      if (!is_finite(v)) throw Error(ErrorCode::NonFinite, "mesh vertex is not finite");
    for (std::size_t k = 0; k < triangles.size(); ++k) {
      for (auto idx : triangles[k])
        if (idx >= vertices.size())
          throw Error(ErrorCode::IndexOutOfRange, "triangle " + std::to_string(k) + " references vertex " +
                                                      std::to_string(idx));
      if (simplex_measure(triangle(k)) <= 1e-12)
        throw Error(ErrorCode::Degenerate, "triangle " + std::to_string(k) + " has zero area");
    }
  }

  /// V - E + F over the referenced edges; 2 for a closed genus-0 surface.
  long euler_characteristic() const {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
    for (const auto& t : triangles)
      for (int e = 0; e < 3; ++e) {
        auto a = t[e], b = t[(e + 1) % 3];
        edges[{std::min(a, b), std::max(a, b)}]++;
      }
    return static_cast<long>(vertices.size()) - static_cast<long>(edges.size()) +
           static_cast<long>(triangles.size());
  }

  /// Every edge shared by exactly two triangles traversed in opposite directions.
  bool is_closed() const {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
    for (const auto& t : triangles)
      for (int e = 0; e < 3; ++e) directed[{t[e], t[(e + 1) % 3]}]++;
    for (const auto& [edge, count] : directed) {
      if (count != 1) return false;
      auto it = directed.find({edge.second, edge.first});
      if (it == directed.end() || it->second != 1) return false;
    }
    return true;
  }
};

/// Simple polygon given by its vertices in boundary order.
struct Polygon {
  std::vector<Vec2> vertices;

  std::size_t size() const { return vertices.size(); }

  Segment2 edge(std::size_t k) const {
    return Segment2{{vertices[k], vertices[(k + 1) % vertices.size()]}};
  }

  std::vector<Segment2> edges() const {
    std::vector<Segment2> out;
    out.reserve(vertices.size());
    for (std::size_t k = 0; k < vertices.size(); ++k) out.push_back(edge(k));
    return out;
  }

  /// Shoelace area, positive for counter-clockwise order.
  double signed_area() const {
    double a = 0.0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
      const auto& p = vertices[k];
      const auto& q = vertices[(k + 1) % vertices.size()];
      a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * a;
  }

  void validate() const {
    if (vertices.size() < 3) throw Error(ErrorCode::Degenerate, "polygon needs at least three vertices");
    for (const auto& v : vertices)
      if (!is_finite(v)) throw Error(ErrorCode::NonFinite, "polygon vertex is not finite");
  }

  /// O(n^2) check that no two non-adjacent edges touch.
  bool is_simple() const {
    const std::size_t n = vertices.size();
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
      const double v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
      return (v > 0.0) - (v < 0.0);
    };
    auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
      return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= p[1] &&
             p[1] <= std::max(a[1], b[1]);
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;
        const auto [a, b] = edge(i).v;
        const auto [c, d] = edge(j).v;
        const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
        if (o1 != o2 && o3 != o4) return false;
        if (o1 == 0 && on_segment(a, b, c)) return false;
        if (o2 == 0 && on_segment(a, b, d)) return false;
        if (o3 == 0 && on_segment(c, d, a)) return false;
        if (o4 == 0 && on_segment(c, d, b)) return false;
      }
    }
    return true;
  }
};

/// Decomposition of a star-shaped polyhedron into one tetrahedron per
/// boundary triangle, all sharing `apex`. Each tet stores the triangle
/// vertices followed by the apex.
struct StarTetra {
  Vec3 apex{};
  std::vector<Tetra3> tets;

  double volume() const {
    double v = 0.0;
    for (const auto& t : tets) v += simplex_measure(t);
    return v;
  }
};

/// Points at or below this count get an exact O(n^2) diameter.
inline constexpr std::size_t kExactDiameterLimit = 10'000;

/// Largest pairwise distance. Above kExactDiameterLimit points this returns
/// the axis-aligned bounding-box diagonal, an upper bound within a factor
/// of sqrt(D).
template <std::size_t D>
double diameter(std::span<const Vec<D>> points) {
  if (points.size() < 2) return 0.0;
  if (points.size() <= kExactDiameterLimit) {
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const Vec<D> d = sub(points[i], points[j]);
        best = std::max(best, dot(d, d));
      }
    return std::sqrt(best);
  }
  Vec<D> lo = points[0], hi = points[0];
  for (const auto& p : points)
    for (std::size_t i = 0; i < D; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  return norm(sub(hi, lo));
}

template <typename T>
struct Normalized {
  T value;
  /// Factor the input coordinates were multiplied by.
  double scale;
};

/// Scales about the origin so the point set has diameter 1.
template <std::size_t D>
Normalized<PointCloud<D>> normalize_to_unit_diameter(std::span<const Vec<D>> points) {
  const double diam = diameter(points);
  if (!(diam > 0.0)) throw Error(ErrorCode::Degenerate, "all points coincide");
  const double s = 1.0 / diam;
  PointCloud<D> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(s == 1.0 ? p : scale(p, s));
  return {std::move(out), s};
}

template <std::size_t D>
Normalized<PointCloud<D>> normalize_to_unit_diameter(const PointCloud<D>& points) {
  return normalize_to_unit_diameter(std::span<const Vec<D>>(points));
}

inline Normalized<TriMesh> normalize_to_unit_diameter(const TriMesh& mesh) {
  auto scaled = normalize_to_unit_diameter(std::span<const Vec3>(mesh.vertices));
  return {TriMesh{std::move(scaled.value), mesh.triangles}, scaled.scale};
}

/// Area-weighted centroid of the boundary triangles. Strictly interior for a
/// closed convex surface.
inline Vec3 select_interior_point(const TriMesh& mesh) {
  double total = 0.0;
  Vec3 acc{};
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto t = mesh.triangle(k);
    const double a = simplex_measure(t);
    total += a;
    acc = add(acc, scale(simplex_centroid(t), a));
  }
  if (!(total > 0.0)) throw Error(ErrorCode::Degenerate, "mesh has zero surface area");
  return scale(acc, 1.0 / total);
}

/// Length-weighted centroid of the polygon boundary.
inline Vec2 select_interior_point(const Polygon& poly) {
  double total = 0.0;
  Vec2 acc{};
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto e = poly.edge(k);
    const double l = simplex_measure(e);
    total += l;
    acc = add(acc, scale(simplex_centroid(e), l));
  }
  if (!(total > 0.0)) throw Error(ErrorCode::Degenerate, "polygon has zero perimeter");
  return scale(acc, 1.0 / total);
}

/// Simplex formed by a boundary facet and the apex (apex last).
template <std::size_t D>
Simplex<D, D + 1> cone(const Simplex<D, D>& facet, const Vec<D>& apex) {
  Simplex<D, D + 1> s;
  for (std::size_t l = 0; l < D; ++l) s.v[l] = facet.v[l];
  s.v[D] = apex;
  return s;
}

namespace detail {

/// Cones every facet over `apex` and checks that all cones share the
/// orientation of the total. A cone of measure <= 1e-14 means the apex lies
/// on a facet plane, which also counts as outside.
template <std::size_t D>
std::vector<Simplex<D, D + 1>> cone_all(std::span<const Simplex<D, D>> facets, const Vec<D>& apex) {
  std::vector<Simplex<D, D + 1>> out;
  out.reserve(facets.size());
  double total = 0.0;
  std::vector<double> signed_vol;
  signed_vol.reserve(facets.size());
  for (const auto& f : facets) {
    out.push_back(cone(f, apex));
    signed_vol.push_back(signed_measure(out.back()));
    total += signed_vol.back();
  }
  if (total == 0.0) throw Error(ErrorCode::Degenerate, "boundary encloses zero volume");
  const double orientation = total > 0.0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < signed_vol.size(); ++k) {
    const double oriented = orientation * signed_vol[k];
    if (oriented < -1e-12)
      throw Error(ErrorCode::ApexOutside, "apex is outside facet " + std::to_string(k));
    if (oriented <= 1e-14)
      throw Error(ErrorCode::ApexOutside, "apex lies on the plane of facet " + std::to_string(k));
  }
  return out;
}

}  // namespace detail

/// One tetrahedron per boundary triangle, all sharing `o`. `o` must see every
/// facet from the same side: any interior point of a convex mesh, or a kernel
/// point of a star-shaped one.
inline StarTetra star_tetrahedralize(const TriMesh& mesh, const Vec3& o) {
  const auto faces = mesh.faces();
  return StarTetra{o, detail::cone_all<3>(faces, o)};
}

/// Fan of triangles (edge, o) covering a star-shaped polygon.
inline std::vector<Triangle2> fan_triangulate(const Polygon& poly, const Vec2& o) {
  const auto edges = poly.edges();
  return detail::cone_all<2>(edges, o);
}

/// Strict interior test against every face plane of a convex, outward-oriented
/// mesh; points within 1e-12 of a plane count as outside.
inline bool is_inside(const TriMesh& mesh, const Vec3& q) {
  if (mesh.triangles.empty()) return false;
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto t = mesh.triangle(k);
    const Vec3 n = cross(sub(t.v[1], t.v[0]), sub(t.v[2], t.v[0]));
    const double len = norm(n);
    if (len == 0.0) return false;
    if (dot(n, sub(q, t.v[0])) / len >= -1e-12) return false;
  }
  return true;
}

/// Strict interior test for a convex polygon of either orientation.
inline bool is_inside(const Polygon& poly, const Vec2& q) {
  const double orientation = poly.signed_area() >= 0.0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto [a, b] = poly.edge(k).v;
    const Vec2 e = sub(b, a);
    const double len = norm(e);
    if (len == 0.0) return false;
    const double side = orientation * (e[0] * (q[1] - a[1]) - e[1] * (q[0] - a[0])) / len;
    if (side <= 1e-12) return false;
  }
  return true;
}

}  // namespace dynpca
