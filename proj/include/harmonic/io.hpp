#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "harmonic/dynamics.hpp"
#include "harmonic/expr.hpp"
#include "harmonic/hardy.hpp"
#include "harmonic/linearization.hpp"

namespace harmonic {

using json = nlohmann::json;

// Doubles go through nlohmann's shortest round-trip formatting; CSV uses %.17g.

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const ExtComplex& z) {
  if (z.is_infinite()) return "infinity";
  return to_json(z.value());
}

namespace io_detail {

[[noreturn]] inline void schema(const std::string& what) { throw Error(ErrorKind::SchemaError, what); }

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) schema(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) schema(where + ": missing field '" + key + "'");
  return *it;
}

inline cplx complex_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    schema(where + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<cplx> complex_list(const json& j, const std::string& where) {
  if (!j.is_array()) schema(where + ": expected an array of [re, im] pairs");
  std::vector<cplx> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(complex_from(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

inline json complex_list(std::span<const cplx> v) {
  json a = json::array();
  for (cplx z : v) a.push_back(to_json(z));
  return a;
}

inline json complex_list(const CVector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(to_json(v[k]));
  return a;
}

inline json part_to_json(const AnalyticFn& f) {
  if (const auto* m = std::get_if<MoebiusTransform>(&f)) {
    const MoebiusTransform n = m->normalized();
    return {{"type", "mobius"}, {"matrix", json::array({to_json(n.a()), to_json(n.b()), to_json(n.c()), to_json(n.d())})}};
  }
  return {{"type", "series"}, {"coeffs", complex_list(std::get<TaylorSeries>(f).coeffs())}};
}

inline AnalyticFn part_from_json(const json& j, std::optional<std::size_t> trunc, const std::string& where) {
  const json& type = field(j, "type", where);
  if (!type.is_string()) schema(where + ".type: expected a string");
  const auto t = type.get<std::string>();
  if (t == "series") {
    auto c = complex_list(field(j, "coeffs", where), where + ".coeffs");
    if (c.empty()) schema(where + ".coeffs: empty");
    if (trunc) c.resize(*trunc + 1);
    try {
      return TaylorSeries(std::move(c));
    } catch (const Error& e) {
      schema(where + ": " + e.what());
    }
  }
  if (t == "mobius") {
    const auto m = complex_list(field(j, "matrix", where), where + ".matrix");
    if (m.size() != 4) schema(where + ".matrix: expected 4 entries [a, b, c, d]");
    try {
      return MoebiusTransform(m[0], m[1], m[2], m[3]).normalized();
    } catch (const Error& e) {
      schema(where + ": " + e.what());
    }
  }
  schema(where + ".type: expected \"series\" or \"mobius\"");
}

inline json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    schema(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace io_detail

inline std::size_t map_trunc(const HarmonicMap& f, std::size_t fallback = 32) {
  const std::size_t n = std::max(order_of(f.h), order_of(f.g));
  return n > 0 ? n : fallback;
}

inline json map_to_json(const HarmonicMap& f) {
  return {{"trunc", map_trunc(f)}, {"h", io_detail::part_to_json(f.h)}, {"g", io_detail::part_to_json(f.g)}};
}

inline std::string serialize_map(const HarmonicMap& f) { return map_to_json(f).dump(2) + "\n"; }

inline HarmonicMap map_from_json(const json& j) {
  std::optional<std::size_t> trunc;
  if (!j.is_object()) io_detail::schema("map: expected an object");
  if (const auto it = j.find("trunc"); it != j.end()) {
    if (!it->is_number_unsigned()) io_detail::schema("trunc: expected a non-negative integer");
    trunc = it->get<std::size_t>();
  }
  return {io_detail::part_from_json(io_detail::field(j, "h", "map"), trunc, "h"),
          io_detail::part_from_json(io_detail::field(j, "g", "map"), trunc, "g")};
}

inline HarmonicMap deserialize_map(std::string_view text) { return map_from_json(io_detail::parse_json(text)); }

// ---------------------------------------------------------------------------
// Dynamics and linearization results
// ---------------------------------------------------------------------------

inline json to_json(const HarmonicConstant& c) {
  return {{"mu", to_json(c.mu)}, {"omega", to_json(c.omega)}, {"value", to_json(c.value())}};
}

inline json to_json(const FixedPointRecord& r) {
  return {{"mu", to_json(r.mu)},
          {"omega", to_json(r.omega)},
          {"value", to_json(r.mu + std::conj(r.omega))},
          {"lambda", to_json(r.lambda)},
          {"theta", to_json(r.theta)},
          {"lambda_class", to_string(r.lambda_class)},
          {"theta_class", to_string(r.theta_class)},
          {"class", to_string(r.kind)}};
}

inline json to_json(const std::vector<FixedPointRecord>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(to_json(r));
  return a;
}

inline std::string_view to_string(MoebiusPartDynamics::Kind k) noexcept {
  switch (k) {
    case MoebiusPartDynamics::Kind::Identity: return "identity";
    case MoebiusPartDynamics::Kind::Parabolic: return "parabolic";
    case MoebiusPartDynamics::Kind::Loxodromic: return "loxodromic";
    case MoebiusPartDynamics::Kind::Elliptic: return "elliptic";
  }
  return "unknown";
}

inline json to_json(const MoebiusPartDynamics& d) {
  json fixed = json::array();
  for (const auto& p : d.fixed) fixed.push_back(to_json(p));
  json j = {{"kind", to_string(d.kind)}, {"fixed_points", fixed}};
  if (d.kind == MoebiusPartDynamics::Kind::Parabolic || d.kind == MoebiusPartDynamics::Kind::Loxodromic)
    j["attractor"] = to_json(d.attractor);
  if (d.kind == MoebiusPartDynamics::Kind::Loxodromic) j["repeller"] = to_json(d.repeller);
  if (d.kind != MoebiusPartDynamics::Kind::Identity) j["multiplier"] = to_json(d.multiplier);
  return j;
}

inline json to_json(const MoebiusTaxonomy& t) {
  return {{"case", t.case_label},
          {"candidates", t.candidates},
          {"global_convergence_criterion", t.global_convergence_criterion},
          {"analytic", to_json(t.a)},
          {"coanalytic", to_json(t.b)}};
}

inline json to_json(const LinearizationResult& r) {
  json j = {{"kind", to_string(r.kind)},
            {"lambda", to_json(r.lambda)},
            {"theta", to_json(r.theta)},
            {"p", r.p ? json(*r.p) : json(nullptr)},
            {"residual", r.residual},
            {"phi",
             {{"h_coeffs", io_detail::complex_list(std::get<TaylorSeries>(r.phi.h).coeffs())},
              {"g_coeffs", io_detail::complex_list(std::get<TaylorSeries>(r.phi.g).coeffs())}}}};
  if (r.p_g) j["p_g"] = *r.p_g;
  return j;
}

inline std::string format_double(double x) { return expr_detail::fmt_double(x); }

/// Orbit as CSV with header n,re,im.
inline std::string orbit_to_csv(const Orbit& o) {
  std::string out = "n,re,im\n";
  for (std::size_t n = 0; n < o.points.size(); ++n)
    out += std::to_string(n) + "," + format_double(o.points[n].real()) + "," + format_double(o.points[n].imag()) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Hardy space objects
// ---------------------------------------------------------------------------

namespace io_detail {

inline json matrix_rows(const CMatrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(to_json(M(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from(const json& j, std::size_t n, const std::string& where) {
  const auto dim = static_cast<Eigen::Index>(n);
  if (!j.is_array() || j.size() != n) schema(where + ": expected " + std::to_string(n) + " rows");
  CMatrix M(dim, dim);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = complex_list(j[r], where + "[" + std::to_string(r) + "]");
    if (row.size() != n) schema(where + "[" + std::to_string(r) + "]: expected " + std::to_string(n) + " entries");
    for (std::size_t c = 0; c < n; ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return M;
}

}  // namespace io_detail

/// {trunc, A, B}: row-major matrices of [re, im] pairs.
inline json to_json(const BlockOperator& L) {
  return {{"trunc", L.order()}, {"A", io_detail::matrix_rows(L.A)}, {"B", io_detail::matrix_rows(L.B)}};
}

inline BlockOperator operator_from_json(const json& j) {
  const json& t = io_detail::field(j, "trunc", "operator");
  if (!t.is_number_unsigned()) io_detail::schema("operator.trunc: expected a non-negative integer");
  const std::size_t n = t.get<std::size_t>() + 1;
  BlockOperator L{io_detail::matrix_from(io_detail::field(j, "A", "operator"), n, "A"),
                  io_detail::matrix_from(io_detail::field(j, "B", "operator"), n, "B")};
  for (const CMatrix* M : {&L.A, &L.B})
    if (!M->allFinite()) throw Error(ErrorKind::NonFinite, "operator entries must be finite");
  return L;
}

inline BlockOperator deserialize_operator(std::string_view text) {
  return operator_from_json(io_detail::parse_json(text));
}

/// CSV: a line "block,row" prefix then re,im interleaved per column.
inline std::string operator_to_csv(const BlockOperator& L) {
  std::string out = "block,row";
  for (std::size_t c = 0; c <= L.order(); ++c) {
    out += ",re" + std::to_string(c) + ",im" + std::to_string(c);
  }
  out += "\n";
  auto block = [&](const char* name, const CMatrix& M) {
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      out += std::string(name) + "," + std::to_string(r);
      for (Eigen::Index c = 0; c < M.cols(); ++c)
        out += "," + format_double(M(r, c).real()) + "," + format_double(M(r, c).imag());
      out += "\n";
    }
  };
  block("A", L.A);
  block("B", L.B);
  return out;
}

inline json to_json(const HardyVector& v) {
  return {{"trunc", v.order()}, {"a", io_detail::complex_list(v.a())}, {"b", io_detail::complex_list(v.b())}};
}

inline HardyVector vector_from_json(const json& j) {
  const auto a = io_detail::complex_list(io_detail::field(j, "a", "vector"), "a");
  const auto b = io_detail::complex_list(io_detail::field(j, "b", "vector"), "b");
  if (a.size() != b.size() || a.empty()) io_detail::schema("vector: a and b must have the same nonzero length");
  CVector va(static_cast<Eigen::Index>(a.size())), vb(static_cast<Eigen::Index>(b.size()));
  for (std::size_t k = 0; k < a.size(); ++k) {
    va[static_cast<Eigen::Index>(k)] = a[k];
    vb[static_cast<Eigen::Index>(k)] = b[k];
  }
  return {va, vb};
}

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

/// Colour for basin index k: evenly spaced hues, black for escape, grey
/// for unresolved pixels.
inline std::array<std::uint8_t, 3> basin_color(int k, std::size_t count) {
  if (k == BasinGrid::kEscaped) return {0, 0, 0};
  if (k < 0) return {128, 128, 128};
  const double hue = 6.0 * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(count, 1));
  const int sector = static_cast<int>(hue) % 6;
  const double f = hue - std::floor(hue);
  const auto up = static_cast<std::uint8_t>(std::lround(55 + 200 * f));
  const auto down = static_cast<std::uint8_t>(std::lround(255 - 200 * f));
  switch (sector) {
    case 0: return {255, up, 55};
    case 1: return {down, 255, 55};
    case 2: return {55, 255, up};
    case 3: return {55, down, 255};
    case 4: return {up, 55, 255};
    default: return {255, 55, down};
  }
}

/// Binary PPM (P6) of a basin grid.
inline std::string basin_to_ppm(const BasinGrid& g) {
  std::string out = "P6\n" + std::to_string(g.width) + " " + std::to_string(g.height) + "\n255\n";
  out.reserve(out.size() + 3 * g.index.size());
  for (int k : g.index) {
    const auto c = basin_color(k, g.fixed_points.size());
    out.append(reinterpret_cast<const char*>(c.data()), 3);
  }
  return out;
}

}  // namespace harmonic
