#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dynpca/error.hpp"
#include "dynpca/geometry.hpp"
#include "dynpca/linalg.hpp"

namespace dynpca {

/// Continuous PCA treats a body as a uniform unit-density measure and
/// decomposes it into simplices: boundary segments, fan triangles, boundary
/// triangles or star tetrahedra. A simplex with K vertices x_1..x_K has
///
///   centroid           (x_1 + ... + x_K) / K
///   second moment      E[(x - c)(x - c)^T]
///                        = (s s^T + sum_j d_j d_j^T) / (K (K + 1))
///
/// about any point c, where d_j = x_j - c and s = sum_j d_j. The divisor is
/// 6, 12 and 20 for segments, triangles and tetrahedra.

enum class PrimitiveKind { segment2d, triangle2d, triangle3d, tetra3d };

enum class CpcaMode { polygon_area, polygon_boundary, polyhedron_volume, polyhedron_boundary };

inline const char* to_string(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::segment2d: return "segment2d";
    case PrimitiveKind::triangle2d: return "triangle2d";
    case PrimitiveKind::triangle3d: return "triangle3d";
    case PrimitiveKind::tetra3d: return "tetra3d";
  }
  return "?";
}

inline const char* to_string(CpcaMode m) {
  switch (m) {
    case CpcaMode::polygon_area: return "polygon_area";
    case CpcaMode::polygon_boundary: return "polygon_boundary";
    case CpcaMode::polyhedron_volume: return "polyhedron_volume";
    case CpcaMode::polyhedron_boundary: return "polyhedron_boundary";
  }
  return "?";
}

template <std::size_t D, std::size_t K>
constexpr PrimitiveKind kind_of() {
  static_assert((D == 2 && (K == 2 || K == 3)) || (D == 3 && (K == 3 || K == 4)),
                "unsupported primitive");
  if constexpr (D == 2) return K == 2 ? PrimitiveKind::segment2d : PrimitiveKind::triangle2d;
  else return K == 3 ? PrimitiveKind::triangle3d : PrimitiveKind::tetra3d;
}

inline PrimitiveKind kind_of(CpcaMode mode) {
  switch (mode) {
    case CpcaMode::polygon_area: return PrimitiveKind::triangle2d;
    case CpcaMode::polygon_boundary: return PrimitiveKind::segment2d;
    case CpcaMode::polyhedron_volume: return PrimitiveKind::tetra3d;
    case CpcaMode::polyhedron_boundary: return PrimitiveKind::triangle3d;
  }
  return PrimitiveKind::tetra3d;
}

/// Measure (length, area or volume), centroid and covariance of a body.
template <std::size_t D>
struct ContinuousSummary {
  PrimitiveKind kind{};
  double measure = 0.0;
  Vec<D> centroid{};
  SymMatrix<D> cov{};
};

template <std::size_t D>
struct CentroidMeasure {
  Vec<D> centroid{};
  double measure = 0.0;
};

inline constexpr double kDegenerateMeasure = 1e-14;

template <std::size_t D, std::size_t K>
CentroidMeasure<D> primitive_centroid_measure(const Simplex<D, K>& p) {
  for (const auto& x : p.v)
    if (!is_finite(x)) throw Error(ErrorCode::NonFinite, "primitive vertex is not finite");
  const double m = simplex_measure(p);
  if (!(m > kDegenerateMeasure)) throw Error(ErrorCode::Degenerate, "primitive has (near) zero measure");
  return {simplex_centroid(p), m};
}

/// Second moment of the uniform measure on `p` about `mu`. Equals the
/// primitive's own covariance when `mu` is its centroid.
template <std::size_t D, std::size_t K>
SymMatrix<D> primitive_covariance(const Simplex<D, K>& p, const Vec<D>& mu) {
  Vec<D> s{};
  SymMatrix<D> m;
  for (const auto& x : p.v) {
    const Vec<D> d = sub(x, mu);
    s = add(s, d);
    m.add_outer(d);
  }
  m.add_outer(s);
  return m * (1.0 / static_cast<double>(K * (K + 1)));
}

/// Assembles a body from its decomposition: weights w_k = m_k / m,
/// centroid sum_k w_k c_k, covariance sum_k w_k M_k(centroid).
template <std::size_t D, std::size_t K>
ContinuousSummary<D> summarize_primitives(std::span<const Simplex<D, K>> prims) {
  ContinuousSummary<D> out;
  out.kind = kind_of<D, K>();
  std::vector<double> measures;
  measures.reserve(prims.size());
  Vec<D> first{};
  for (const auto& p : prims) {
    const auto cm = primitive_centroid_measure(p);
    measures.push_back(cm.measure);
    out.measure += cm.measure;
    first = add(first, scale(cm.centroid, cm.measure));
  }
  if (!(out.measure > 0.0)) throw Error(ErrorCode::Degenerate, "body has zero total measure");
  out.centroid = scale(first, 1.0 / out.measure);
  for (std::size_t k = 0; k < prims.size(); ++k)
    out.cov += primitive_covariance(prims[k], out.centroid) * (measures[k] / out.measure);
  return out;
}

template <std::size_t D, std::size_t K>
ContinuousSummary<D> summarize_primitives(const std::vector<Simplex<D, K>>& prims) {
  return summarize_primitives(std::span<const Simplex<D, K>>(prims));
}

/// Static continuous PCA of a polygon's area or boundary. The area mode fans
/// from `kernel` when given, otherwise from the boundary centroid.
inline ContinuousSummary<2> cpca_static(const Polygon& poly, CpcaMode mode,
                                        std::optional<Vec2> kernel = std::nullopt) {
  poly.validate();
  switch (mode) {
    case CpcaMode::polygon_boundary:
      return summarize_primitives(poly.edges());
    case CpcaMode::polygon_area:
      return summarize_primitives(fan_triangulate(poly, kernel.value_or(select_interior_point(poly))));
    default:
      throw Error(ErrorCode::KindMismatch, std::string("mode ") + to_string(mode) + " needs a polyhedron");
  }
}

/// Static continuous PCA of a closed triangle mesh's volume or surface. The
/// volume mode tetrahedralizes from `kernel` when given, otherwise from the
/// boundary centroid.
inline ContinuousSummary<3> cpca_static(const TriMesh& mesh, CpcaMode mode,
                                        std::optional<Vec3> kernel = std::nullopt) {
  mesh.validate();
  switch (mode) {
    case CpcaMode::polyhedron_boundary:
      return summarize_primitives(mesh.faces());
    case CpcaMode::polyhedron_volume:
      return summarize_primitives(
          star_tetrahedralize(mesh, kernel.value_or(select_interior_point(mesh))).tets);
    default:
      throw Error(ErrorCode::KindMismatch, std::string("mode ") + to_string(mode) + " needs a polygon");
  }
}

/// Updates a summary after the decomposition gains `added` and loses
/// `removed` primitives, in O(|added| + |removed|):
///
///   m'   = m + m_a - m_d
///   mu'  = (m/m') mu + mu_a - mu_d,   mu_a = (1/m') sum_a m_k c_k (same for d)
///   cov' = (m/m') [cov + (mu - mu')(mu - mu')^T]
///          + (1/m') [sum_a m_k M_k(mu') - sum_d m_k M_k(mu')]
///
/// The first covariance term moves the old body's second moment from mu to
/// mu'; see docs/cpca_delta.md for the derivation.
template <std::size_t D, std::size_t K>
ContinuousSummary<D> cpca_apply_delta(const ContinuousSummary<D>& base, std::span<const Simplex<D, K>> added,
                                      std::span<const Simplex<D, K>> removed) {
  if (base.kind != kind_of<D, K>())
    throw Error(ErrorCode::KindMismatch, std::string("summary holds ") + to_string(base.kind) + ", delta holds " +
                                             to_string(kind_of<D, K>()));
  if (added.empty() && removed.empty()) return base;

  auto accumulate = [](std::span<const Simplex<D, K>> prims, std::vector<double>& measures, double& total,
                       Vec<D>& first) {
    measures.reserve(prims.size());
    for (const auto& p : prims) {
      const auto cm = primitive_centroid_measure(p);
      measures.push_back(cm.measure);
      total += cm.measure;
      first = add(first, scale(cm.centroid, cm.measure));
    }
  };
  std::vector<double> added_measure, removed_measure;
  double added_total = 0.0, removed_total = 0.0;
  Vec<D> added_first{}, removed_first{};
  accumulate(added, added_measure, added_total, added_first);
  accumulate(removed, removed_measure, removed_total, removed_first);

  const double measure = base.measure + added_total - removed_total;
  if (!(measure > kDegenerateMeasure * (base.measure + added_total)))
    throw Error(ErrorCode::EmptyResult, "delta removes the whole body");

  const double keep = base.measure / measure;
  const Vec<D> mu_a = scale(added_first, 1.0 / measure);
  const Vec<D> mu_d = scale(removed_first, 1.0 / measure);

  ContinuousSummary<D> out;
  out.kind = base.kind;
  out.measure = measure;
  out.centroid = sub(add(scale(base.centroid, keep), mu_a), mu_d);

  out.cov = base.cov;
  out.cov.add_outer(sub(base.centroid, out.centroid));
  out.cov *= keep;
  for (std::size_t k = 0; k < added.size(); ++k)
    out.cov += primitive_covariance(added[k], out.centroid) * (added_measure[k] / measure);
  for (std::size_t k = 0; k < removed.size(); ++k)
    out.cov -= primitive_covariance(removed[k], out.centroid) * (removed_measure[k] / measure);
  return out;
}

template <std::size_t D, std::size_t K>
ContinuousSummary<D> cpca_apply_delta(const ContinuousSummary<D>& base, const std::vector<Simplex<D, K>>& added,
                                      const std::vector<Simplex<D, K>>& removed) {
  return cpca_apply_delta(base, std::span<const Simplex<D, K>>(added), std::span<const Simplex<D, K>>(removed));
}

enum class ApexPolicy {
  /// Verify the apex is still strictly interior; rebuild if not.
  check_inside,
  /// The caller guarantees the apex is never evicted (for example a point
  /// offset inward from a vertex that is never deleted).
  pinned,
};

template <std::size_t D>
struct RebuildOutcome {
  ContinuousSummary<D> summary;
  Vec<D> apex{};
  bool rebuilt = false;
  /// Primitives whose moments were evaluated for this update.
  std::size_t primitives_evaluated = 0;
};

namespace detail {

template <std::size_t D, typename Body>
RebuildOutcome<D> volume_edit(const ContinuousSummary<D>& base, const Body& edited, const Vec<D>& apex,
                              std::span<const Simplex<D, D>> removed_facets,
                              std::span<const Simplex<D, D>> added_facets, ApexPolicy policy) {
  constexpr CpcaMode mode = D == 3 ? CpcaMode::polyhedron_volume : CpcaMode::polygon_area;
  if (policy == ApexPolicy::pinned || is_inside(edited, apex)) {
    std::vector<Simplex<D, D + 1>> added, removed;
    added.reserve(added_facets.size());
    removed.reserve(removed_facets.size());
    for (const auto& f : added_facets) added.push_back(cone(f, apex));
    for (const auto& f : removed_facets) removed.push_back(cone(f, apex));
    return {cpca_apply_delta<D, D + 1>(base, added, removed), apex, false, added.size() + removed.size()};
  }
  const Vec<D> fresh = select_interior_point(edited);
  std::size_t facets = 0;
  if constexpr (D == 3) facets = edited.triangles.size();
  else facets = edited.size();
  return {cpca_static(edited, mode, fresh), fresh, true, facets};
}

}  // namespace detail

/// Volume update after an edit of a convex polyhedron's boundary. While the
/// apex stays strictly inside `edited`, only the cones over the changed
/// facets are evaluated; otherwise a new apex is chosen and the whole body
/// is re-tetrahedralized.
inline RebuildOutcome<3> cpca_delete_with_rebuild(const ContinuousSummary<3>& base, const TriMesh& edited,
                                                  const Vec3& apex, std::span<const Triangle3> removed_faces,
                                                  std::span<const Triangle3> added_faces,
                                                  ApexPolicy policy = ApexPolicy::check_inside) {
  return detail::volume_edit<3>(base, edited, apex, removed_faces, added_faces, policy);
}

/// Area update after an edit of a convex polygon's boundary.
inline RebuildOutcome<2> cpca_delete_with_rebuild(const ContinuousSummary<2>& base, const Polygon& edited,
                                                  const Vec2& apex, std::span<const Segment2> removed_edges,
                                                  std::span<const Segment2> added_edges,
                                                  ApexPolicy policy = ApexPolicy::check_inside) {
  return detail::volume_edit<2>(base, edited, apex, removed_edges, added_edges, policy);
}

}  // namespace dynpca
