#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynpca/error.hpp"
#include "dynpca/linalg.hpp"

namespace dynpca {

/// Count, mean and population (1/n) covariance of a point multiset.
///
/// The closed-form updates below act on this summary alone, so its size is
/// fixed by D and independent of how many points it describes. An empty
/// summary has zero mean and zero covariance.
template <std::size_t D>
struct MomentSummary {
  std::uint64_t count = 0;
  Vec<D> mean{};
  SymMatrix<D> cov{};
  /// Incremental updates applied since the last from-scratch summarize.
  std::uint64_t updates_since_rebuild = 0;
};

namespace detail {

template <std::size_t D>
void require_finite(const Vec<D>& p) {
  if (!is_finite(p)) throw Error(ErrorCode::NonFinite, "point has a NaN or infinite coordinate");
}

template <std::size_t D>
void require_finite(const MomentSummary<D>& s) {
  if (!is_finite(s.mean) || !s.cov.is_finite())
    throw Error(ErrorCode::NonFinite, "summary has a NaN or infinite entry");
}

}  // namespace detail

/// Two-pass mean and covariance of `points`.
template <std::size_t D>
MomentSummary<D> summarize(std::span<const Vec<D>> points) {
  MomentSummary<D> s;
  if (points.empty()) return s;
  Vec<D> sum{};
  for (const auto& p : points) {
    detail::require_finite(p);
    for (std::size_t i = 0; i < D; ++i) sum[i] += p[i];
  }
  const double n = static_cast<double>(points.size());
  s.count = points.size();
  s.mean = scale(sum, 1.0 / n);

  // Accumulate into a plain array; the packed matrix only receives the result.
  std::array<double, SymMatrix<D>::kPacked> acc{};
  for (const auto& p : points) {
    const Vec<D> d = sub(p, s.mean);
    std::size_t k = 0;
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = i; j < D; ++j) acc[k++] += d[i] * d[j];
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = i; j < D; ++j) s.cov(i, j) = acc[k++] / n;
  return s;
}

template <std::size_t D>
MomentSummary<D> summarize(const std::vector<Vec<D>>& points) {
  return summarize(std::span<const Vec<D>>(points));
}

/// Merges a summarized batch of m points into a summary of n points:
///   mean' = (n mean + m mean_b) / (n + m)
///   cov'  = (n cov + m cov_b) / (n + m) + n m / (n + m)^2 (mean - mean_b)(mean - mean_b)^T
/// Cost depends only on D.
template <std::size_t D>
MomentSummary<D> apply_add(const MomentSummary<D>& base, const MomentSummary<D>& batch) {
  detail::require_finite(base);
  detail::require_finite(batch);
  if (batch.count == 0) return base;
  if (base.count == 0) {
    MomentSummary<D> out = batch;
    out.updates_since_rebuild = base.updates_since_rebuild + batch.updates_since_rebuild + 1;
    return out;
  }
  const double n = static_cast<double>(base.count);
  const double m = static_cast<double>(batch.count);
  const double total = n + m;
  const Vec<D> delta = sub(base.mean, batch.mean);

  MomentSummary<D> out;
  out.count = base.count + batch.count;
  out.mean = add(base.mean, scale(delta, -m / total));
  out.cov = base.cov * (n / total) + batch.cov * (m / total);
  out.cov.add_outer(delta, n * m / (total * total));
  out.updates_since_rebuild = base.updates_since_rebuild + batch.updates_since_rebuild + 1;
  return out;
}

/// Removes a summarized sub-multiset of m points from a summary of n > m points:
///   mean' = (n mean - m mean_b) / (n - m)
///   cov'  = (n cov - m cov_b) / (n - m) - n m / (n - m)^2 (mean - mean_b)(mean - mean_b)^T
///
/// Membership of the batch is the caller's responsibility; passing points that
/// were never added produces a meaningless (possibly indefinite) covariance.
template <std::size_t D>
MomentSummary<D> apply_delete(const MomentSummary<D>& base, const MomentSummary<D>& batch) {
  detail::require_finite(base);
  detail::require_finite(batch);
  if (batch.count == 0) return base;
  if (batch.count >= base.count)
    throw Error(ErrorCode::EmptyResult, "deleting at least as many points as the summary holds");
  const double n = static_cast<double>(base.count);
  const double m = static_cast<double>(batch.count);
  const double rest = n - m;
  const Vec<D> delta = sub(base.mean, batch.mean);

  MomentSummary<D> out;
  out.count = base.count - batch.count;
  out.mean = add(base.mean, scale(delta, m / rest));
  out.cov = base.cov * (n / rest) - batch.cov * (m / rest);
  out.cov.add_outer(delta, -n * m / (rest * rest));
  out.updates_since_rebuild = base.updates_since_rebuild + 1;
  return out;
}

/// Single-point insertion:
///   cov' = n/(n+1) cov + n/(n+1)^2 (p - mean)(p - mean)^T
template <std::size_t D>
MomentSummary<D> add_one(const MomentSummary<D>& base, const Vec<D>& p) {
  detail::require_finite(p);
  MomentSummary<D> out;
  out.updates_since_rebuild = base.updates_since_rebuild + 1;
  if (base.count == 0) {
    out.count = 1;
    out.mean = p;
    return out;
  }
  const double n = static_cast<double>(base.count);
  const Vec<D> d = sub(p, base.mean);
  out.count = base.count + 1;
  out.mean = add(base.mean, scale(d, 1.0 / (n + 1.0)));
  out.cov = base.cov * (n / (n + 1.0));
  out.cov.add_outer(d, n / ((n + 1.0) * (n + 1.0)));
  return out;
}

/// Single-point removal; n is the count before deletion:
///   cov' = n/(n-1) cov - n/(n-1)^2 (p - mean)(p - mean)^T
template <std::size_t D>
MomentSummary<D> delete_one(const MomentSummary<D>& base, const Vec<D>& p) {
  detail::require_finite(p);
  if (base.count <= 1) throw Error(ErrorCode::EmptyResult, "cannot delete from a summary of fewer than two points");
  const double n = static_cast<double>(base.count);
  const Vec<D> d = sub(p, base.mean);
  MomentSummary<D> out;
  out.count = base.count - 1;
  out.mean = sub(base.mean, scale(d, 1.0 / (n - 1.0)));
  out.cov = base.cov * (n / (n - 1.0));
  out.cov.add_outer(d, -n / ((n - 1.0) * (n - 1.0)));
  out.updates_since_rebuild = base.updates_since_rebuild + 1;
  return out;
}

/// v^T cov v for a unit direction v.
template <std::size_t D>
double variance_along(const MomentSummary<D>& s, const Vec<D>& v) {
  if (!is_finite(v) || std::abs(norm(v) - 1.0) > 1e-9)
    throw Error(ErrorCode::NotUnit, "direction is not a unit vector");
  return s.cov.quadratic_form(v);
}

/// Smallest covariance eigenvalue. Negative values beyond rounding level mean
/// accumulated cancellation (or a delete of points that were never added).
template <std::size_t D>
double drift_estimate(const MomentSummary<D>& s) {
  return jacobi_eigendecompose(s.cov).eigenvalues[D - 1];
}

/// Decides when a caller should re-summarize from the stored points. The
/// library never rebuilds on its own.
struct RebuildPolicy {
  std::uint64_t max_updates = 1'000'000;
  double drift_tolerance = 1e-9;

  template <std::size_t D>
  bool due(const MomentSummary<D>& s) const {
    if (s.updates_since_rebuild >= max_updates) return true;
    return drift_estimate(s) < -drift_tolerance * std::max(1.0, s.cov.inf_norm());
  }
};

}  // namespace dynpca
