#pragma once

#include <charconv>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dynpca/error.hpp"
#include "dynpca/geometry.hpp"
#include "dynpca/linalg.hpp"
#include "json.hpp"

namespace dynpca::io {

enum class PointFormat { xyz, csv };
enum class MeshFormat { off, obj };
enum class ReportFormat { csv, json };

/// Points of a dimension only known after parsing, stored row-major.
struct PointTable {
  std::size_t dim = 0;
  std::vector<double> coords;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {coords.data() + i * dim, dim}; }
};

template <std::size_t D>
PointCloud<D> to_cloud(const PointTable& table) {
  if (table.size() > 0 && table.dim != D)
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(D) + " coordinates per point, file has " + std::to_string(table.dim));
  PointCloud<D> out(table.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t k = 0; k < D; ++k) out[i][k] = table.coords[i * D + k];
  return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  return hash == std::string_view::npos ? s : s.substr(0, hash);
}

inline bool parse_double(std::string_view tok, double& out) {
  tok = trim(tok);
  if (tok.empty()) return false;
  if (tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

inline bool parse_long(std::string_view tok, long& out) {
  tok = trim(tok);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return !tok.empty() && ec == std::errc{} && ptr == tok.data() + tok.size();
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string_view> split_char(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return in;
}

}  // namespace detail

/// xyz: whitespace-separated reals, one point per line, '#' starts a comment.
/// csv: comma-separated reals; a non-numeric first row is taken as a header.
inline PointTable parse_points(std::istream& in, PointFormat format) {
  PointTable table;
  std::string line;
  std::size_t lineno = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(detail::strip_comment(line));
    if (body.empty()) continue;
    const auto fields = format == PointFormat::xyz ? detail::split_ws(body) : detail::split_char(body, ',');
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (auto f : fields) {
      double v;
      if (!detail::parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (format == PointFormat::csv && first_row) {
        first_row = false;
        continue;
      }
      throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected numeric fields", lineno);
    }
    first_row = false;
    for (double v : row)
      if (!std::isfinite(v))
        throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": non-finite coordinate", lineno);
    if (table.dim == 0) {
      table.dim = row.size();
    } else if (row.size() != table.dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "line " + std::to_string(lineno) + ": expected " + std::to_string(table.dim) + " fields, found " +
                      std::to_string(row.size()),
                  lineno);
    }
    table.coords.insert(table.coords.end(), row.begin(), row.end());
  }
  return table;
}

inline PointTable load_points(const std::string& path, PointFormat format) {
  auto in = detail::open_input(path);
  return parse_points(in, format);
}

namespace detail {

inline void add_fan(TriMesh& mesh, const std::vector<long>& face, std::size_t lineno) {
  for (long idx : face)
    if (idx < 0 || static_cast<std::size_t>(idx) >= mesh.vertices.size())
      throw Error(ErrorCode::IndexOutOfRange,
                  "line " + std::to_string(lineno) + ": vertex index " + std::to_string(idx) + " out of range",
                  lineno);
  if (face.size() < 3)
    throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": face has fewer than 3 vertices", lineno);
  for (std::size_t k = 1; k + 1 < face.size(); ++k)
    mesh.triangles.push_back({static_cast<std::uint32_t>(face[0]), static_cast<std::uint32_t>(face[k]),
                              static_cast<std::uint32_t>(face[k + 1])});
}

inline TriMesh parse_off(std::istream& in) {
  TriMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> Error {
    return Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": " + msg, lineno);
  };
  // Non-empty, comment-stripped token lines.
  auto next = [&](std::vector<std::string_view>& toks) {
    while (std::getline(in, line)) {
      ++lineno;
      toks = split_ws(trim(strip_comment(line)));
      if (!toks.empty()) return true;
    }
    return false;
  };

  std::vector<std::string_view> toks;
  if (!next(toks) || toks[0] != "OFF") throw fail("missing OFF header");
  toks.erase(toks.begin());
  if (toks.empty() && !next(toks)) throw fail("missing element counts");
  long nv = 0, nf = 0;
  if (toks.size() < 2 || !parse_long(toks[0], nv) || !parse_long(toks[1], nf) || nv < 0 || nf < 0)
    throw fail("bad element counts");

  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!next(toks)) throw fail("unexpected end of file in vertex list");
    Vec3 v{};
    if (toks.size() < 3) throw fail("vertex needs 3 coordinates");
    for (int k = 0; k < 3; ++k)
      if (!parse_double(toks[k], v[k]) || !std::isfinite(v[k])) throw fail("bad vertex coordinate");
    mesh.vertices.push_back(v);
  }
  for (long i = 0; i < nf; ++i) {
    if (!next(toks)) throw fail("unexpected end of file in face list");
    long k = 0;
    if (!parse_long(toks[0], k) || k < 0 || toks.size() < static_cast<std::size_t>(k) + 1)
      throw fail("bad face record");
    std::vector<long> face(static_cast<std::size_t>(k));
    for (long j = 0; j < k; ++j)
      if (!parse_long(toks[static_cast<std::size_t>(j) + 1], face[static_cast<std::size_t>(j)]))
        throw fail("bad face index");
    add_fan(mesh, face, lineno);
  }
  return mesh;
}

inline TriMesh parse_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(trim(strip_comment(line)));
    if (toks.empty()) continue;
    if (toks[0] == "v") {
      Vec3 v{};
      if (toks.size() < 4) throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": vertex needs 3 coordinates", lineno);
      for (int k = 0; k < 3; ++k)
        if (!parse_double(toks[static_cast<std::size_t>(k) + 1], v[k]) || !std::isfinite(v[k]))
          throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": bad vertex coordinate", lineno);
      mesh.vertices.push_back(v);
    } else if (toks[0] == "f") {
      std::vector<long> face;
      for (std::size_t j = 1; j < toks.size(); ++j) {
        const auto ref = toks[j].substr(0, toks[j].find('/'));
        long idx = 0;
        if (!parse_long(ref, idx) || idx == 0)
          throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": bad face index", lineno);
        face.push_back(idx > 0 ? idx - 1 : static_cast<long>(mesh.vertices.size()) + idx);
      }
      add_fan(mesh, face, lineno);
    }
  }
  return mesh;
}

}  // namespace detail

/// ASCII OFF or OBJ; polygons with more than three vertices are split into a
/// fan around their first vertex. Normals, texture coordinates and colors
/// are ignored.
inline TriMesh parse_mesh(std::istream& in, MeshFormat format) {
  return format == MeshFormat::off ? detail::parse_off(in) : detail::parse_obj(in);
}

inline TriMesh load_mesh(const std::string& path, MeshFormat format) {
  auto in = detail::open_input(path);
  return parse_mesh(in, format);
}

struct ReportRow {
  std::string algo;
  std::string op;
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  double epsilon = 0.0;
  double seconds = 0.0;
  double volume = 0.0;
  std::uint64_t candidates = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

using Report = std::vector<ReportRow>;

inline constexpr const char* kReportHeader = "algo,op,n,m,epsilon,seconds,volume,candidates";

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void validate_row(const ReportRow& r) {
  for (double v : {r.epsilon, r.seconds, r.volume})
    if (!std::isfinite(v) || v < 0.0)
      throw Error(ErrorCode::InvalidArgument, "report values must be finite and non-negative");
  for (const auto* s : {&r.algo, &r.op})
    if (s->find_first_of(",\"\n\r") != std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "report tags may not contain commas, quotes or newlines");
}

}  // namespace detail

inline void write_report(const Report& report, std::ostream& out, ReportFormat format) {
  for (const auto& r : report) detail::validate_row(r);
  if (format == ReportFormat::csv) {
    out << kReportHeader << '\n';
    for (const auto& r : report) {
      out << r.algo << ',' << r.op << ',' << r.n << ',' << r.m << ',' << detail::format_real(r.epsilon) << ','
          << detail::format_real(r.seconds) << ',' << detail::format_real(r.volume) << ',' << r.candidates << '\n';
    }
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : report) {
      arr.push_back({{"algo", r.algo},
                     {"op", r.op},
                     {"n", r.n},
                     {"m", r.m},
                     {"epsilon", r.epsilon},
                     {"seconds", r.seconds},
                     {"volume", r.volume},
                     {"candidates", r.candidates}});
    }
    out << arr.dump(2) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing report");
}

inline void write_report(const Report& report, const std::string& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  write_report(report, out, format);
}

inline Report read_report(std::istream& in, ReportFormat format) {
  Report report;
  if (format == ReportFormat::json) {
    nlohmann::json arr;
    try {
      in >> arr;
      for (const auto& o : arr)
        report.push_back({o.at("algo").get<std::string>(), o.at("op").get<std::string>(),
                          o.at("n").get<std::uint64_t>(), o.at("m").get<std::uint64_t>(),
                          o.at("epsilon").get<double>(), o.at("seconds").get<double>(),
                          o.at("volume").get<double>(), o.at("candidates").get<std::uint64_t>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, e.what());
    }
    return report;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (detail::trim(line) != kReportHeader) throw Error(ErrorCode::Parse, "line 1: unexpected report header", 1);
      continue;
    }
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_char(line, ',');
    ReportRow r;
    long n = 0, m = 0, c = 0;
    if (f.size() != 8 || !detail::parse_long(f[2], n) || !detail::parse_long(f[3], m) ||
        !detail::parse_double(f[4], r.epsilon) || !detail::parse_double(f[5], r.seconds) ||
        !detail::parse_double(f[6], r.volume) || !detail::parse_long(f[7], c))
      throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": malformed report row", lineno);
    r.algo = std::string(f[0]);
    r.op = std::string(f[1]);
    r.n = static_cast<std::uint64_t>(n);
    r.m = static_cast<std::uint64_t>(m);
    r.candidates = static_cast<std::uint64_t>(c);
    report.push_back(std::move(r));
  }
  return report;
}

}  // namespace dynpca::io
