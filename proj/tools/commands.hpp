#pragma once

// Subcommands of the dynpca tool. Kept in a header so the test suites can
// drive the same code paths in-process.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dynpca/dynpca.hpp"

namespace dynpca::cli {

enum class Algo { ap, agp, egp };

inline const char* to_string(Algo a) {
  switch (a) {
    case Algo::ap: return "ap";
    case Algo::agp: return "agp";
    case Algo::egp: return "egp";
  }
  return "?";
}

/// Raised for invalid command-line values; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BenchConfig {
  std::string input;
  std::size_t synthetic = 0;
  Algo algo = Algo::ap;
  std::vector<double> epsilons;
  std::vector<std::size_t> batches{100};
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  bool omit_timing = false;
};

struct TimingStats {
  double mean = 0.0;
  double median = 0.0;
};

inline TimingStats stats_of(std::vector<double> seconds) {
  TimingStats s;
  if (seconds.empty()) return s;
  s.mean = std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
  std::sort(seconds.begin(), seconds.end());
  const std::size_t h = seconds.size() / 2;
  s.median = seconds.size() % 2 ? seconds[h] : 0.5 * (seconds[h - 1] + seconds[h]);
  return s;
}

template <typename F>
double time_call(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// One static-versus-dynamic comparison for a batch size, epsilon and edit.
struct Comparison {
  std::string op;
  std::size_t m = 0;
  double epsilon = 0.0;
  TimingStats static_time, dynamic_time;
  /// Largest relative volume difference between the two pipelines.
  double volume_gap = 0.0;
};

struct BenchOutcome {
  io::Report report;
  std::vector<Comparison> comparisons;
};

/// Gaussian cloud with axis spreads 3 : 2 : 1 (and so on), rotated by a
/// seeded random rotation so no principal axis is coordinate-aligned.
template <std::size_t D>
PointCloud<D> synthetic_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix<D> q{};
  for (std::size_t i = 0; i < D; ++i) {
    Vec<D> v{};
    for (auto& x : v) x = g(rng);
    for (std::size_t j = 0; j < i; ++j) v = sub(v, scale(q[j], dot(v, q[j])));
    q[i] = scale(v, 1.0 / norm(v));
  }
  PointCloud<D> out(n);
  for (auto& p : out) {
    Vec<D> v{};
    for (std::size_t i = 0; i < D; ++i) v[i] = g(rng) * static_cast<double>(D - i);
    p = mat_vec(q, v);
  }
  return out;
}

namespace detail {

inline std::string lower_extension(const std::string& path) {
  const auto dot_pos = path.find_last_of('.');
  if (dot_pos == std::string::npos) return {};
  std::string ext = path.substr(dot_pos + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

inline bool is_mesh_path(const std::string& path) {
  const auto ext = lower_extension(path);
  return ext == "off" || ext == "obj";
}

/// Points from a .xyz/.txt/.csv file, or the vertices of an .off/.obj mesh.
inline io::PointTable load_table(const std::string& path) {
  const auto ext = lower_extension(path);
  if (ext == "off" || ext == "obj") {
    const auto mesh = io::load_mesh(path, ext == "off" ? io::MeshFormat::off : io::MeshFormat::obj);
    io::PointTable t;
    t.dim = 3;
    for (const auto& v : mesh.vertices) t.coords.insert(t.coords.end(), v.begin(), v.end());
    return t;
  }
  return io::load_points(path, ext == "csv" ? io::PointFormat::csv : io::PointFormat::xyz);
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <std::size_t D>
std::string fmt(const Vec<D>& v) {
  std::string s;
  for (std::size_t i = 0; i < D; ++i) s += (i ? " " : "") + fmt(v[i]);
  return s;
}

template <std::size_t D>
Extents<D> bounding_extents(const PointCloud<D>& pts) {
  return extreme_scan(pts, Frame<D>::identity());
}

/// Extremal search over a point set that is represented twice: as the raw
/// array and (for the grid algorithms) as an occupancy grid.
template <std::size_t D>
Extents<D> search(Algo algo, const PointCloud<D>& pts, const OccupancyGrid<D>* grid, const Frame<D>& frame,
                  std::size_t& candidates) {
  if (algo == Algo::ap) {
    candidates = pts.size();
    return extreme_scan(pts, frame);
  }
  return extreme_grid(*grid, frame, algo == Algo::agp ? GridVariant::corners : GridVariant::columns, &candidates);
}

template <std::size_t D>
struct RepResult {
  double static_seconds = 0.0, dynamic_seconds = 0.0;
  double static_volume = 0.0, dynamic_volume = 0.0;
  std::size_t static_candidates = 0, dynamic_candidates = 0;
};

/// Runs `body(rep, grid_copy)` for every repetition, split over `threads`
/// workers. Each worker owns its grid copy; timed regions never span
/// threads.
template <std::size_t D, typename Body>
void for_each_rep(std::size_t reps, std::size_t threads, const OccupancyGrid<D>* grid, Body&& body) {
  auto worker = [&](std::size_t first) {
    std::optional<OccupancyGrid<D>> local;
    if (grid) local.emplace(*grid);
    for (std::size_t r = first; r < reps; r += threads) body(r, local ? &*local : nullptr);
  };
  if (threads <= 1) {
    worker(0);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads && t < reps; ++t) pool.emplace_back(worker, t);
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Static versus dynamic PCA box pipelines under random batch edits.
///
/// For every batch size m, epsilon and repetition, m points are added
/// (drawn uniformly from the input's bounding box) or m existing points are
/// deleted. The static pipeline recomputes the summary from scratch, the
/// dynamic one applies the closed-form update; both then run the extremal
/// search and the eigensolver. Point arrays and grid copies are prepared
/// outside the timed regions.
template <std::size_t D>
BenchOutcome run_bench(const BenchConfig& cfg, const PointCloud<D>& points) {
  if (cfg.reps == 0) throw UsageError("--reps must be at least 1");
  if (cfg.threads == 0) throw UsageError("--threads must be at least 1");
  for (auto m : cfg.batches)
    if (m == 0) throw UsageError("--batch values must be positive");
  if constexpr (D != 3)
    if (cfg.algo == Algo::egp) throw UsageError("egp needs 3D input");
  if (points.size() < 2) throw Error(ErrorCode::EmptyInput, "benchmark needs at least two points");

  const bool grid_algo = cfg.algo != Algo::ap;
  std::vector<double> eps_list = grid_algo ? cfg.epsilons : std::vector<double>{0.0};
  if (grid_algo && eps_list.empty()) eps_list = {0.01};
  for (double e : eps_list)
    if (grid_algo && !(e > 0.0)) throw UsageError("--epsilon values must be positive");

  const auto bounds = detail::bounding_extents(points);
  const double diam = diameter<D>(points);
  const auto base = summarize(points);
  const std::string tag = to_string(cfg.algo);
  auto secs = [&](double s) { return cfg.omit_timing ? 0.0 : s; };

  BenchOutcome outcome;
  for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
    const double eps = eps_list[ei] * diam;
    std::optional<OccupancyGrid<D>> grid;
    if (grid_algo) {
      std::vector<double> build;
      for (std::size_t r = 0; r < std::min<std::size_t>(cfg.reps, 10); ++r)
        build.push_back(time_call([&] { grid.emplace(OccupancyGrid<D>::anchored(eps, points)); }));
      outcome.report.push_back({tag + "-grid", "build", points.size(), 0, eps_list[ei], secs(stats_of(build).mean),
                                0.0, grid->cell_count()});
    }

    for (std::size_t mi = 0; mi < cfg.batches.size(); ++mi) {
      const std::size_t m = cfg.batches[mi];
      for (int op = 0; op < 2; ++op) {
        const bool adding = op == 0;
        if (!adding && m >= points.size())
          throw Error(ErrorCode::EmptyResult, "cannot delete " + std::to_string(m) + " of " +
                                                  std::to_string(points.size()) + " points");
        std::vector<detail::RepResult<D>> results(cfg.reps);

        detail::for_each_rep<D>(cfg.reps, cfg.threads, grid ? &*grid : nullptr, [&](std::size_t rep,
                                                                                     OccupancyGrid<D>* g) {
          std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                            static_cast<std::uint32_t>(ei), static_cast<std::uint32_t>(mi),
                            static_cast<std::uint32_t>(op), static_cast<std::uint32_t>(rep)};
          std::mt19937_64 rng(seq);
          PointCloud<D> changed, after;
          if (adding) {
            changed.resize(m);
            for (auto& p : changed)
              for (std::size_t i = 0; i < D; ++i)
                p[i] = std::uniform_real_distribution<double>(bounds.lo[i], bounds.hi[i])(rng);
            after = points;
            after.insert(after.end(), changed.begin(), changed.end());
          } else {
            std::vector<std::size_t> idx(points.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t k = 0; k < m; ++k) std::swap(idx[k], idx[k + rng() % (idx.size() - k)]);
            std::vector<char> gone(points.size(), 0);
            for (std::size_t k = 0; k < m; ++k) {
              gone[idx[k]] = 1;
              changed.push_back(points[idx[k]]);
            }
            after.reserve(points.size() - m);
            for (std::size_t k = 0; k < points.size(); ++k)
              if (!gone[k]) after.push_back(points[k]);
          }
          std::optional<OccupancyGrid<D>> static_grid;
          if (g) {
            static_grid.emplace(*g);
            adding ? static_grid->update(changed, {}) : static_grid->update({}, changed);
          }

          auto& res = results[rep];
          Extents<D> se, de;
          Frame<D> sf, df;
          res.static_seconds = time_call([&] {
            const auto s = summarize(after);
            sf = principal_frame(s.cov);
            se = detail::search(cfg.algo, after, static_grid ? &*static_grid : nullptr, sf, res.static_candidates);
          });
          res.dynamic_seconds = time_call([&] {
            const auto s = adding ? apply_add(base, summarize(changed)) : apply_delete(base, summarize(changed));
            if (g) adding ? g->update(changed, {}) : g->update({}, changed);
            df = principal_frame(s.cov);
            de = detail::search(cfg.algo, after, g, df, res.dynamic_candidates);
          });
          if (g) adding ? g->update({}, changed) : g->update(changed, {});
          res.static_volume = se.volume();
          res.dynamic_volume = de.volume();
        });

        Comparison c{adding ? "add" : "delete", m, eps_list[ei], {}, {}, 0.0};
        std::vector<double> st, dt;
        double sv = 0.0, dv = 0.0, sc = 0.0, dc = 0.0;
        for (const auto& r : results) {
          st.push_back(r.static_seconds);
          dt.push_back(r.dynamic_seconds);
          sv += r.static_volume;
          dv += r.dynamic_volume;
          sc += static_cast<double>(r.static_candidates);
          dc += static_cast<double>(r.dynamic_candidates);
          const double scale_v = std::max(std::abs(r.static_volume), 1e-300);
          c.volume_gap = std::max(c.volume_gap, std::abs(r.static_volume - r.dynamic_volume) / scale_v);
        }
        c.static_time = stats_of(st);
        c.dynamic_time = stats_of(dt);
        const double reps = static_cast<double>(cfg.reps);
        outcome.report.push_back({tag + "-static", c.op, points.size(), m, eps_list[ei], secs(c.static_time.mean),
                                  sv / reps, static_cast<std::uint64_t>(std::llround(sc / reps))});
        outcome.report.push_back({tag + "-dynamic", c.op, points.size(), m, eps_list[ei],
                                  secs(c.dynamic_time.mean), dv / reps,
                                  static_cast<std::uint64_t>(std::llround(dc / reps))});
        outcome.comparisons.push_back(c);
      }
    }
  }
  return outcome;
}

struct CpcaConfig {
  std::string input;
  std::optional<CpcaMode> mode;
  std::optional<std::vector<double>> kernel;
  std::size_t edits = 10;
  std::uint64_t seed = 1;
  bool omit_timing = false;
};

struct CpcaModeResult {
  CpcaMode mode{};
  std::size_t primitives = 0;
  double measure = 0.0;
  std::vector<double> centroid;
  std::vector<std::vector<double>> cov;
  double box_volume = 0.0;
  /// Largest deviation between the delta-maintained summary and a
  /// from-scratch summary over the edit sequence.
  double delta_error = 0.0;
  std::size_t rebuilds = 0;
  std::size_t primitives_evaluated = 0;
  double static_seconds = 0.0;
  double delta_seconds = 0.0;
};

namespace detail {

template <std::size_t D>
double summary_distance(const ContinuousSummary<D>& a, const ContinuousSummary<D>& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) {
      diff += (a.cov(i, j) - b.cov(i, j)) * (a.cov(i, j) - b.cov(i, j));
      ref += b.cov(i, j) * b.cov(i, j);
    }
  double err = std::sqrt(diff) / std::max(std::sqrt(ref), 1e-300);
  err = std::max(err, std::abs(a.measure - b.measure) / b.measure);
  err = std::max(err, norm(sub(a.centroid, b.centroid)) / std::max(1.0, norm(b.centroid)));
  return err;
}

/// Reversible "tent" edits: a facet is replaced by a cone over a new vertex
/// raised slightly outward from its centroid. Undo restores the facet.
struct MeshEditor {
  TriMesh mesh;
  struct Tent {
    std::size_t face;
    std::array<std::uint32_t, 3> original;
  };
  std::vector<Tent> stack;

  std::pair<std::vector<Triangle3>, std::vector<Triangle3>> raise(std::size_t face, double lift) {
    const auto f = mesh.triangle(face);
    const Vec3 n = cross(sub(f.v[1], f.v[0]), sub(f.v[2], f.v[0]));
    const Vec3 apex = add(simplex_centroid(f), scale(n, lift * std::sqrt(simplex_measure(f)) / norm(n)));
    const auto t = mesh.triangles[face];
    const auto p = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(apex);
    mesh.triangles[face] = {t[0], t[1], p};
    mesh.triangles.push_back({t[1], t[2], p});
    mesh.triangles.push_back({t[2], t[0], p});
    stack.push_back({face, t});
    const std::size_t k = mesh.triangles.size();
    return {{f}, {mesh.triangle(face), mesh.triangle(k - 2), mesh.triangle(k - 1)}};
  }

  std::pair<std::vector<Triangle3>, std::vector<Triangle3>> undo() {
    const Tent t = stack.back();
    stack.pop_back();
    const std::size_t k = mesh.triangles.size();
    std::vector<Triangle3> removed{mesh.triangle(t.face), mesh.triangle(k - 2), mesh.triangle(k - 1)};
    mesh.triangles[t.face] = t.original;
    mesh.triangles.resize(k - 2);
    mesh.vertices.pop_back();
    return {removed, {mesh.triangle(t.face)}};
  }

  std::size_t facets() const { return mesh.triangles.size(); }
};

struct PolygonEditor {
  Polygon mesh;
  std::vector<std::size_t> stack;

  std::pair<std::vector<Segment2>, std::vector<Segment2>> raise(std::size_t edge, double lift) {
    const auto e = mesh.edge(edge);
    const Vec2 d = sub(e.v[1], e.v[0]);
    const double orientation = mesh.signed_area() >= 0.0 ? 1.0 : -1.0;
    const Vec2 outward = scale(Vec2{d[1], -d[0]}, orientation);
    const Vec2 apex = add(simplex_centroid(e), scale(outward, lift));
    mesh.vertices.insert(mesh.vertices.begin() + static_cast<long>(edge) + 1, apex);
    stack.push_back(edge + 1);
    return {{e}, {mesh.edge(edge), mesh.edge(edge + 1)}};
  }

  std::pair<std::vector<Segment2>, std::vector<Segment2>> undo() {
    const std::size_t pos = stack.back();
    stack.pop_back();
    std::vector<Segment2> removed{mesh.edge(pos - 1), mesh.edge(pos)};
    mesh.vertices.erase(mesh.vertices.begin() + static_cast<long>(pos));
    return {removed, {mesh.edge(pos - 1)}};
  }

  std::size_t facets() const { return mesh.size(); }
};

template <std::size_t D>
std::vector<double> to_vector(const Vec<D>& v) {
  return {v.begin(), v.end()};
}

template <std::size_t D>
std::vector<std::vector<double>> to_rows(const SymMatrix<D>& m) {
  std::vector<std::vector<double>> out(D, std::vector<double>(D));
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) out[i][j] = m(i, j);
  return out;
}

template <std::size_t D, typename Body>
const std::vector<Vec<D>>& vertices_of(const Body& b) {
  return b.vertices;
}

/// Applies `cfg.edits` random reversible edits to `body`, maintaining both
/// summaries of the body (boundary and volume/area) by deltas, and compares
/// them with from-scratch summaries after every edit.
template <std::size_t D, typename Editor, typename Body>
std::vector<CpcaModeResult> run_cpca_body(const Body& body, const CpcaConfig& cfg, CpcaMode boundary_mode,
                                          CpcaMode volume_mode, std::optional<Vec<D>> kernel) {
  using Facet = Simplex<D, D>;
  std::vector<CpcaModeResult> out;
  const std::vector<CpcaMode> modes =
      cfg.mode ? std::vector<CpcaMode>{*cfg.mode} : std::vector<CpcaMode>{volume_mode, boundary_mode};

  for (CpcaMode mode : modes) {
    CpcaModeResult res;
    res.mode = mode;
    const bool volume = mode == volume_mode;
    Vec<D> apex = kernel.value_or(select_interior_point(body));

    ContinuousSummary<D> fresh;
    const double static_seconds = time_call([&] { fresh = cpca_static(body, mode, apex); });
    res.static_seconds = cfg.omit_timing ? 0.0 : static_seconds;
    if constexpr (D == 3) res.primitives = body.triangles.size();
    else res.primitives = body.size();
    res.measure = fresh.measure;
    res.centroid = to_vector(fresh.centroid);
    res.cov = to_rows(fresh.cov);
    res.box_volume = extreme_scan(vertices_of<D>(body), principal_frame(fresh.cov)).volume();

    // From-scratch reference; nullopt when the apex no longer sees the
    // whole boundary of the edited body.
    auto reference = [&](const Body& b) -> std::optional<ContinuousSummary<D>> {
      try {
        return volume ? cpca_static(b, mode, apex) : cpca_static(b, mode);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ApexOutside) throw;
        return std::nullopt;
      }
    };

    Editor ed{body, {}};
    ContinuousSummary<D> running = fresh;
    std::mt19937_64 rng(cfg.seed);
    double delta_seconds = 0.0;
    for (std::size_t e = 0; e < cfg.edits; ++e) {
      const bool undo = !ed.stack.empty() && rng() % 3 == 0;
      std::pair<std::vector<Facet>, std::vector<Facet>> change;
      std::optional<ContinuousSummary<D>> expected;
      if (undo) {
        change = ed.undo();
        expected = reference(ed.mesh);
      } else {
        const std::size_t face = rng() % ed.facets();
        double lift = 0.2;
        for (int tries = 0; tries < 20 && !expected; ++tries, lift *= 0.5) {
          change = ed.raise(face, lift);
          expected = reference(ed.mesh);
          if (!expected) ed.undo();
        }
        if (!expected) continue;
      }
      if (!expected) throw Error(ErrorCode::ApexOutside, "undo left the apex outside the kernel");
      const auto& [removed, added] = change;
      delta_seconds += time_call([&] {
        if (volume) {
          const auto r = cpca_delete_with_rebuild(running, ed.mesh, apex, removed, added);
          running = r.summary;
          apex = r.apex;
          res.rebuilds += r.rebuilt;
          res.primitives_evaluated += r.primitives_evaluated;
        } else {
          running = cpca_apply_delta<D, D>(running, added, removed);
          res.primitives_evaluated += added.size() + removed.size();
        }
      });
      res.delta_error = std::max(res.delta_error, summary_distance(running, *expected));
    }
    res.delta_seconds = cfg.omit_timing || cfg.edits == 0 ? 0.0 : delta_seconds / static_cast<double>(cfg.edits);
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace detail

/// Continuous PCA of a mesh (.off/.obj: volume and surface) or a polygon
/// (2D point file in boundary order: area and boundary), followed by a
/// seeded sequence of facet edits maintained by deltas.
inline std::vector<CpcaModeResult> run_cpca(const CpcaConfig& cfg) {
  if (detail::is_mesh_path(cfg.input)) {
    const auto ext = detail::lower_extension(cfg.input);
    const auto mesh = io::load_mesh(cfg.input, ext == "off" ? io::MeshFormat::off : io::MeshFormat::obj);
    mesh.validate();
    if (cfg.mode && kind_of(*cfg.mode) != PrimitiveKind::tetra3d && kind_of(*cfg.mode) != PrimitiveKind::triangle3d)
      throw UsageError(std::string("mode ") + to_string(*cfg.mode) + " needs a polygon input");
    std::optional<Vec3> kernel;
    if (cfg.kernel) {
      if (cfg.kernel->size() != 3) throw UsageError("--kernel needs 3 coordinates for a mesh");
      kernel = Vec3{(*cfg.kernel)[0], (*cfg.kernel)[1], (*cfg.kernel)[2]};
    }
    return detail::run_cpca_body<3, detail::MeshEditor>(mesh, cfg, CpcaMode::polyhedron_boundary,
                                                          CpcaMode::polyhedron_volume, kernel);
  }
  const auto table = detail::load_table(cfg.input);
  if (table.dim != 2)
    throw Error(ErrorCode::DimensionMismatch, "polygon input needs 2 coordinates per vertex, found " +
                                                  std::to_string(table.dim));
  const Polygon poly{to_cloud<2>(table)};
  poly.validate();
  if (cfg.mode && kind_of(*cfg.mode) != PrimitiveKind::triangle2d && kind_of(*cfg.mode) != PrimitiveKind::segment2d)
    throw UsageError(std::string("mode ") + to_string(*cfg.mode) + " needs a mesh input");
  std::optional<Vec2> kernel;
  if (cfg.kernel) {
    if (cfg.kernel->size() != 2) throw UsageError("--kernel needs 2 coordinates for a polygon");
    kernel = Vec2{(*cfg.kernel)[0], (*cfg.kernel)[1]};
  }
  return detail::run_cpca_body<2, detail::PolygonEditor>(poly, cfg, CpcaMode::polygon_boundary,
                                                           CpcaMode::polygon_area, kernel);
}

struct BoxConfig {
  std::string input;
  std::size_t synthetic = 0;
  std::uint64_t seed = 1;
  Algo algo = Algo::ap;
  std::vector<double> epsilons;
  bool tight = false;
  bool cell_centers = false;
  bool omit_timing = false;
};

template <std::size_t D>
io::Report run_box(const BoxConfig& cfg, const PointCloud<D>& points, std::ostream& out) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "input has no points");
  if constexpr (D != 3)
    if (cfg.algo == Algo::egp) throw UsageError("egp needs 3D input");
  if (cfg.cell_centers && cfg.algo != Algo::agp) throw UsageError("--cell-centers applies to agp only");
  if (cfg.tight && cfg.algo == Algo::ap) throw UsageError("--tight applies to agp and egp only");
  const bool grid_algo = cfg.algo != Algo::ap;
  std::vector<double> eps_list = grid_algo ? cfg.epsilons : std::vector<double>{0.0};
  if (grid_algo && eps_list.empty()) eps_list = {0.01};
  for (double e : eps_list)
    if (grid_algo && !(e > 0.0)) throw UsageError("--epsilon values must be positive");

  const double diam = diameter<D>(points);
  io::Report report;
  for (double rel_eps : eps_list) {
    std::size_t candidates = 0;
    OrientedBox<D> box;
    const double seconds = time_call([&] {
      const auto summary = summarize(points);
      box.frame = principal_frame(summary.cov);
      if (!grid_algo) {
        box.extents = extreme_scan(points, box.frame);
        candidates = points.size();
        return;
      }
      const double eps = rel_eps * (diam > 0.0 ? diam : 1.0);
      const auto grid = OccupancyGrid<D>::anchored(eps, points, cfg.tight);
      if (cfg.cell_centers) {
        box.extents = extreme_cell_centers(grid, box.frame, &candidates);
      } else {
        box.extents = detail::search<D>(cfg.algo, points, &grid, box.frame, candidates);
      }
      if (cfg.tight) {
        const auto t = refine_tight(grid, box.frame, box.extents);
        box.extents = t.extents;
        candidates += t.points_examined;
      }
    });
    std::string name = to_string(cfg.algo);
    if (cfg.cell_centers) name += "-centers";
    if (cfg.tight) name += "-tight";
    out << "algorithm " << name << '\n';
    if (grid_algo) out << "epsilon " << detail::fmt(rel_eps) << " (cell size " << detail::fmt(rel_eps * diam) << ")\n";
    out << "points " << points.size() << '\n';
    for (std::size_t i = 0; i < D; ++i)
      out << "axis" << i << ' ' << detail::fmt(box.frame.axes[i]) << "  extent [" << detail::fmt(box.extents.lo[i])
          << ", " << detail::fmt(box.extents.hi[i]) << "]\n";
    out << "volume " << detail::fmt(box.volume()) << '\n';
    out << "candidates " << candidates << '\n';
    report.push_back(
        {name, "box", points.size(), 0, rel_eps, cfg.omit_timing ? 0.0 : seconds, box.volume(), candidates});
  }
  return report;
}

namespace detail {

inline void emit_report(const io::Report& report, const std::string& path, io::ReportFormat format,
                        std::ostream& out) {
  if (path.empty()) return;
  if (path == "-") io::write_report(report, out, format);
  else io::write_report(report, path, format);
}

template <std::size_t D>
PointCloud<D> load_cloud(const std::string& input, std::size_t synthetic, std::uint64_t seed) {
  if (synthetic > 0) return synthetic_cloud<D>(synthetic, seed);
  return to_cloud<D>(load_table(input));
}

inline std::size_t input_dimension(const std::string& input, std::size_t synthetic,
                                   std::optional<io::PointTable>& table) {
  if (synthetic > 0) return 3;
  table = load_table(input);
  return table->dim;
}

template <typename F2, typename F3>
void dispatch_dim(std::size_t dim, F2&& two, F3&& three) {
  if (dim == 2) two();
  else if (dim == 3) three();
  else throw Error(ErrorCode::DimensionMismatch, "inputs must have 2 or 3 coordinates per point, found " +
                                                     std::to_string(dim));
}

}  // namespace detail

/// Parses `args` (without the program name) and runs one subcommand.
/// Returns 0 on success, 2 on usage errors and 1 on data errors.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic PCA bounding boxes and continuous PCA", "dynpca"};
  app.require_subcommand(1);

  const std::map<std::string, Algo> algos{{"ap", Algo::ap}, {"agp", Algo::agp}, {"egp", Algo::egp}};
  const std::map<std::string, io::ReportFormat> formats{{"csv", io::ReportFormat::csv},
                                                        {"json", io::ReportFormat::json}};

  std::string out_path, format_name = "csv";
  io::ReportFormat format = io::ReportFormat::csv;
  auto add_report_options = [&](CLI::App* sub) {
    sub->add_option("--out", out_path, "Report destination ('-' for stdout)");
    sub->add_option("--format", format_name, "Report format")->check(CLI::IsMember({"csv", "json"}));
  };

  BoxConfig box_cfg;
  std::string box_mode = "ap";
  auto* box = app.add_subcommand("box", "Compute one PCA bounding box");
  box->add_option("--input", box_cfg.input, "Point file (.xyz, .csv) or mesh (.off, .obj)");
  box->add_option("--synthetic", box_cfg.synthetic, "Use a seeded synthetic 3D cloud of this many points");
  box->add_option("--mode", box_mode, "Extremal search")->check(CLI::IsMember({"ap", "agp", "egp"}));
  box->add_option("--epsilon", box_cfg.epsilons, "Cell size relative to the input diameter (repeatable)");
  box->add_option("--seed", box_cfg.seed, "Seed for --synthetic");
  box->add_flag("--tight", box_cfg.tight, "Refine grid extents to the exact extremal points");
  box->add_flag("--cell-centers", box_cfg.cell_centers, "Use cell centers grown by half a cell diagonal");
  box->add_flag("--omit-timing", box_cfg.omit_timing, "Write 0 to the seconds column");
  add_report_options(box);

  BenchConfig bench_cfg;
  std::string bench_mode = "ap";
  auto* bench = app.add_subcommand("bench", "Compare static and dynamic box pipelines");
  bench->add_option("--input", bench_cfg.input, "Point file (.xyz, .csv) or mesh (.off, .obj)");
  bench->add_option("--synthetic", bench_cfg.synthetic, "Use a seeded synthetic 3D cloud of this many points");
  bench->add_option("--mode", bench_mode, "Extremal search")->check(CLI::IsMember({"ap", "agp", "egp", "cpca"}));
  bench->add_option("--epsilon", bench_cfg.epsilons, "Cell size relative to the input diameter (repeatable)");
  bench->add_option("--batch", bench_cfg.batches, "Points added or deleted per edit (repeatable)");
  bench->add_option("--reps", bench_cfg.reps, "Repetitions per configuration");
  bench->add_option("--seed", bench_cfg.seed, "Random seed");
  bench->add_option("--threads", bench_cfg.threads, "Worker threads across repetitions");
  bench->add_flag("--omit-timing", bench_cfg.omit_timing, "Write 0 to the seconds column");
  add_report_options(bench);

  CpcaConfig cpca_cfg;
  std::string cpca_mode = "all";
  std::string kernel_text;
  auto* cpca = app.add_subcommand("cpca", "Continuous PCA of a mesh or polygon with delta updates");
  cpca->add_option("--input", cpca_cfg.input, "Mesh (.off, .obj) or polygon vertices (.xyz, .csv)")->required();
  cpca->add_option("--mode", cpca_mode, "Summary to compute")
      ->check(CLI::IsMember({"all", "polygon_area", "polygon_boundary", "polyhedron_volume", "polyhedron_boundary"}));
  cpca->add_option("--kernel", kernel_text, "Apex for star-shaped input, e.g. 0.5,0.5,0.5");
  cpca->add_option("--edits", cpca_cfg.edits, "Number of random facet edits");
  cpca->add_option("--seed", cpca_cfg.seed, "Random seed");
  cpca->add_flag("--omit-timing", cpca_cfg.omit_timing, "Write 0 to the seconds column");
  add_report_options(cpca);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  format = formats.at(format_name);

  try {
    if (box->parsed()) {
      box_cfg.algo = algos.at(box_mode);
      if (box_cfg.input.empty() == (box_cfg.synthetic == 0)) throw UsageError("give exactly one of --input or --synthetic");
      std::optional<io::PointTable> table;
      const auto dim = detail::input_dimension(box_cfg.input, box_cfg.synthetic, table);
      io::Report report;
      detail::dispatch_dim(
          dim, [&] { report = run_box<2>(box_cfg, to_cloud<2>(*table), out); },
          [&] {
            report = run_box<3>(box_cfg, table ? to_cloud<3>(*table) : synthetic_cloud<3>(box_cfg.synthetic, box_cfg.seed),
                                out);
          });
      detail::emit_report(report, out_path, format, out);
    } else if (bench->parsed()) {
      if (bench_mode == "cpca") throw UsageError("continuous PCA has its own subcommand: dynpca cpca");
      bench_cfg.algo = algos.at(bench_mode);
      if (bench_cfg.input.empty() == (bench_cfg.synthetic == 0))
        throw UsageError("give exactly one of --input or --synthetic");
      std::optional<io::PointTable> table;
      const auto dim = detail::input_dimension(bench_cfg.input, bench_cfg.synthetic, table);
      BenchOutcome result;
      detail::dispatch_dim(
          dim, [&] { result = run_bench<2>(bench_cfg, to_cloud<2>(*table)); },
          [&] {
            result = run_bench<3>(bench_cfg, table ? to_cloud<3>(*table)
                                                   : synthetic_cloud<3>(bench_cfg.synthetic, bench_cfg.seed));
          });
      std::ostream& summary = out_path.empty() || out_path == "-" ? err : out;
      for (const auto& c : result.comparisons) {
        summary << bench_mode << ' ' << c.op << " m=" << c.m;
        if (bench_cfg.algo != Algo::ap) summary << " epsilon=" << detail::fmt(c.epsilon);
        summary << " static mean " << detail::fmt(c.static_time.mean) << " s, median "
                << detail::fmt(c.static_time.median) << " s; dynamic mean " << detail::fmt(c.dynamic_time.mean)
                << " s, median " << detail::fmt(c.dynamic_time.median) << " s; speedup "
                << detail::fmt(c.static_time.median / std::max(c.dynamic_time.median, 1e-12))
                << "; volume gap " << detail::fmt(c.volume_gap) << '\n';
      }
      detail::emit_report(result.report, out_path.empty() ? "-" : out_path, format, out);
    } else if (cpca->parsed()) {
      if (cpca_mode != "all") {
        for (CpcaMode m : {CpcaMode::polygon_area, CpcaMode::polygon_boundary, CpcaMode::polyhedron_volume,
                           CpcaMode::polyhedron_boundary})
          if (cpca_mode == to_string(m)) cpca_cfg.mode = m;
      }
      if (!kernel_text.empty()) {
        std::vector<double> k;
        std::stringstream ss(kernel_text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          double v = 0.0;
          if (!io::detail::parse_double(io::detail::trim(tok), v) || !std::isfinite(v))
            throw UsageError("--kernel must be comma-separated numbers");
          k.push_back(v);
        }
        cpca_cfg.kernel = k;
      }
      std::vector<CpcaModeResult> results;
      try {
        results = run_cpca(cpca_cfg);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::ApexOutside)
          err << "hint: the body is not star-shaped about the chosen apex; pass an interior kernel point with "
                 "--kernel\n";
        throw;
      }
      io::Report report;
      bool within = true;
      for (const auto& r : results) {
        out << "mode " << to_string(r.mode) << '\n';
        out << "measure " << detail::fmt(r.measure) << '\n';
        out << "centroid";
        for (double c : r.centroid) out << ' ' << detail::fmt(c);
        out << "\ncov\n";
        for (const auto& row : r.cov) {
          out << ' ';
          for (double c : row) out << ' ' << detail::fmt(c);
          out << '\n';
        }
        out << "box_volume " << detail::fmt(r.box_volume) << '\n';
        out << "delta_error " << detail::fmt(r.delta_error) << " (edits " << cpca_cfg.edits << ", rebuilds "
            << r.rebuilds << ")\n";
        within = within && r.delta_error <= 1e-8;
        const std::string tag = std::string("cpca-") + to_string(r.mode);
        report.push_back({tag, "static", r.primitives, 0, 0.0, r.static_seconds, r.box_volume, r.primitives});
        report.push_back({tag, "delta", r.primitives, cpca_cfg.edits, 0.0, r.delta_seconds, r.box_volume,
                          r.primitives_evaluated});
      }
      detail::emit_report(report, out_path, format, out);
      if (!within) {
        err << "error: delta-maintained summary deviates from the from-scratch summary by more than 1e-8\n";
        return 1;
      }
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace dynpca::cli
