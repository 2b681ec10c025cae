// Copyright 2026 The fermijet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fermijet/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <regex>
#include <set>

#include "json.hpp"

namespace fermijet {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::set<std::string>& reserved_names() {
  static const std::set<std::string> r = {kFamilyParameter, "pi", "sin", "cos", "exp", "sqrt"};
  return r;
}

bool valid_identifier(const std::string& s) {
  static const std::regex re("[A-Za-z_][A-Za-z0-9_]*");
  return std::regex_match(s, re);
}

// ---------------------------------------------------------------------------
// JSON field access with paths in error messages

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& at(const char* key) const {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string sub(const char* key) const { return path_ + "." + key; }

  double number(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError(sub(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(sub(key) + ": must be finite");
    return d;
  }

  long long integer(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(sub(key) + ": expected an integer");
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number_unsigned()) throw ConfigError(sub(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) throw ConfigError(sub(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const char* key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError(sub(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<std::string> strings(const char* key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError(sub(key) + ": expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw ConfigError(sub(key) + "[" + std::to_string(i) + "]: expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  std::vector<double> numbers(const char* key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError(sub(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
        throw ConfigError(sub(key) + "[" + std::to_string(i) + "]: expected a finite number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown field '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

SubmanifoldType type_from_json(const json& v, const std::string& path) {
  try {
    if (v.is_string()) return parse_type(v.get<std::string>());
    if (v.is_array() && v.size() == 2 && v[0].is_array() && v[1].is_array() && v[0].size() == 2 &&
        v[1].size() == 2) {
      int x[4];
      for (int i = 0; i < 4; ++i) {
        const auto& e = v[i / 2][i % 2];
        if (!e.is_number_unsigned()) throw ConfigError("");
        x[i] = e.get<int>();
      }
      SubmanifoldType t{{x[0], x[1]}, {x[2], x[3]}};
      t.validate();
      return t;
    }
  } catch (const std::exception& e) {
    throw ConfigError(path + ": invalid type" + (std::string(e.what()).empty() ? "" : std::string(" (") + e.what() + ")"));
  }
  throw ConfigError(path + ": type must be \"((p,q),(p',q'))\" or [[p,q],[p',q']]");
}

ordered_json case_to_json(const CaseSpec& c) {
  ordered_json j;
  j["name"] = c.name;
  j["type"] = type_string(c.type);
  j["coordinates"] = c.coordinates;
  j["metric"] = c.metric;
  j["parameters"] = c.parameters;
  j["embedding"] = c.embedding;
  j["base"] = c.base;
  j["eps"] = c.eps;
  j["linearize"] = c.linearize;
  return j;
}

CaseSpec case_from_json(const Reader& r, const std::string& path) {
  CaseSpec c;
  for (const char* k : {"name", "type", "coordinates", "metric", "parameters", "embedding", "base"})
    if (!r.has(k)) throw ConfigError(path + ": missing field '" + k + "'");
  c.name = r.string("name");
  c.type = type_from_json(r.at("type"), r.sub("type"));
  c.coordinates = r.strings("coordinates");
  const auto& m = r.at("metric");
  if (!m.is_array()) throw ConfigError(r.sub("metric") + ": expected an array of rows");
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::string rp = r.sub("metric") + "[" + std::to_string(i) + "]";
    if (!m[i].is_array()) throw ConfigError(rp + ": expected an array of strings");
    std::vector<std::string> row;
    for (std::size_t q = 0; q < m[i].size(); ++q) {
      if (!m[i][q].is_string()) throw ConfigError(rp + "[" + std::to_string(q) + "]: expected a string");
      row.push_back(m[i][q].get<std::string>());
    }
    c.metric.push_back(std::move(row));
  }
  c.parameters = r.strings("parameters");
  c.embedding = r.strings("embedding");
  c.base = r.numbers("base");
  if (r.has("eps")) c.eps = r.number("eps");
  if (r.has("linearize")) c.linearize = r.boolean("linearize");
  r.finish();
  return c;
}

// Uniform on [-1, 1) from the top 53 bits; independent of the standard
// library's distribution implementation.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; }

std::string monomial(const std::vector<int>& e, const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t v = 0; v < e.size(); ++v) {
    if (e[v] == 0) continue;
    if (!s.empty()) s += "*";
    s += names[v];
    if (e[v] > 1) s += "^" + std::to_string(e[v]);
  }
  return s;
}

std::vector<std::string> numbered(const char* stem, int count) {
  std::vector<std::string> v;
  for (int i = 0; i < count; ++i) v.push_back(stem + std::to_string(i));
  return v;
}

std::vector<std::vector<std::string>> diagonal(const std::vector<std::string>& d) {
  const std::size_t n = d.size();
  std::vector<std::vector<std::string>> m(n, std::vector<std::string>(n, "0"));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = d[i];
  return m;
}

SubmanifoldType ty(int p, int q, int pp, int qq) { return {{p, q}, {pp, qq}}; }

}  // namespace

// ---------------------------------------------------------------------------
// Types

SubmanifoldType parse_type(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  static const std::regex re(R"(\(\((\d+),(\d+)\),\((\d+),(\d+)\)\))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ConfigError("type '" + text + "': expected ((p,q),(p',q'))");
  SubmanifoldType t{{std::stoi(m[1]), std::stoi(m[2])}, {std::stoi(m[3]), std::stoi(m[4])}};
  try {
    t.validate();
  } catch (const std::exception& e) {
    throw ConfigError("type '" + text + "': " + e.what());
  }
  return t;
}

std::string type_string(const SubmanifoldType& t) {
  return "((" + std::to_string(t.tangent.positive) + "," + std::to_string(t.tangent.negative) + "),(" +
         std::to_string(t.normal.positive) + "," + std::to_string(t.normal.negative) + "))";
}

// ---------------------------------------------------------------------------
// Catalog

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> e = {
        {"circle-in-plane", "unit circle in the Euclidean plane, base angle 0"},
        {"eps-perturbed-flat", "R^2 x {0} in R^4 with metric delta + eps P, P a seeded random cubic; eps family"},
        {"flat-affine", "coordinate k-plane in flat space of any type (default ((2,0),(1,0)))"},
        {"graph-eps-surface", "graph of eps times a fixed cubic over the plane in R^3; eps family"},
        {"graph-quadratic", "graph u = (kappa/2) x^2 in the plane (default kappa 1); family in kappa"},
        {"greatcircle-in-s3", "great circle (pi/2, pi/2, t) in the round 3-sphere"},
        {"helix-in-r3", "helix (0.8 cos t, 0.8 sin t, 0.6 t) in R^3"},
        {"minkowski-hyperbola", "unit hyperbola t^2 - x^2 = 1 in 2D Minkowski space, type ((1,0),(0,1))"},
        {"minkowski-spacelike-line", "line t = 0 in 2D Minkowski space, type ((1,0),(0,1))"},
        {"minkowski-timelike-line", "line x = 0 in 2D Minkowski space, type ((0,1),(1,0))"},
        {"sphere2-in-r3", "unit 2-sphere in R^3 at (th, ph) = (pi/2, 0)"},
    };
    std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return e;
  }();
  return entries;
}

CaseSpec catalog_case(const std::string& name, const CatalogArgs& args, std::uint64_t default_seed) {
  auto refuse = [&](bool given, const char* what) {
    if (given) throw ConfigError("catalog case '" + name + "' does not take '" + what + "'");
  };
  const bool family = name == "graph-quadratic" || name == "eps-perturbed-flat" || name == "graph-eps-surface";
  refuse(args.type.has_value() && name != "flat-affine", "type");
  refuse(args.kappa.has_value() && name != "graph-quadratic", "kappa");
  refuse(args.seed.has_value() && name != "eps-perturbed-flat", "seed");
  refuse(args.eps.has_value() && (!family || name == "graph-quadratic"), "eps");

  CaseSpec c;
  c.name = name;
  if (name == "flat-affine") {
    c.type = args.type.value_or(ty(2, 0, 1, 0));
    const int n = c.type.n(), k = c.type.k();
    c.name += type_string(c.type);
    c.coordinates = numbered("z", n);
    c.parameters = numbered("x", k);
    std::vector<std::string> d;
    for (double v : c.type.reference_diagonal()) d.push_back(v > 0 ? "1" : "-1");
    c.metric = diagonal(d);
    for (int i = 0; i < n; ++i) c.embedding.push_back(i < k ? c.parameters[i] : "0");
    c.base.assign(k, 0.0);
  } else if (name == "circle-in-plane") {
    c.type = ty(1, 0, 1, 0);
    c.coordinates = {"x", "y"};
    c.metric = diagonal({"1", "1"});
    c.parameters = {"t"};
    c.embedding = {"cos(t)", "sin(t)"};
    c.base = {0.0};
  } else if (name == "sphere2-in-r3") {
    c.type = ty(2, 0, 1, 0);
    c.coordinates = {"x", "y", "z"};
    c.metric = diagonal({"1", "1", "1"});
    c.parameters = {"th", "ph"};
    c.embedding = {"sin(th) * cos(ph)", "sin(th) * sin(ph)", "cos(th)"};
    c.base = {std::acos(-1.0) / 2, 0.0};
  } else if (name == "graph-quadratic") {
    const double kappa = args.kappa.value_or(1.0);
    c.name += "(kappa=" + fmt(kappa) + ")";
    c.type = ty(1, 0, 1, 0);
    c.coordinates = {"x", "y"};
    c.metric = diagonal({"1", "1"});
    c.parameters = {"t"};
    c.embedding = {"t", "0.5 * eps * t^2"};
    c.base = {0.0};
    c.eps = kappa;
    c.linearize = true;
  } else if (name == "eps-perturbed-flat") {
    const std::uint64_t seed = args.seed.value_or(default_seed);
    c.name += "(seed=" + std::to_string(seed) + ")";
    c.type = ty(2, 0, 2, 0);
    c.coordinates = numbered("z", 4);
    c.parameters = numbered("x", 2);
    c.embedding = {"x0", "x1", "0", "0"};
    c.base = {0.0, 0.0};
    c.eps = args.eps.value_or(0.05);
    c.linearize = true;
    std::mt19937_64 rng(seed);
    const auto lay = JetLayout::get(4, 3);
    c.metric.assign(4, std::vector<std::string>(4));
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        std::string p;
        for (int m = 1; m < lay->size(); ++m) {
          const double coef = unit(rng);
          p += (p.empty() ? "" : " + ") + fmt(coef) + " * " + monomial(lay->monomial(m).exponents(), c.coordinates);
        }
        c.metric[i][j] = c.metric[j][i] = std::string(i == j ? "1 + " : "") + "eps * (" + p + ")";
      }
  } else if (name == "graph-eps-surface") {
    c.type = ty(2, 0, 1, 0);
    c.coordinates = {"x", "y", "z"};
    c.metric = diagonal({"1", "1", "1"});
    c.parameters = {"a", "b"};
    c.embedding = {"a", "b", "eps * (0.5 * a^2 + 0.3 * a * b - 0.2 * b^2 + 0.1 * a^3 - 0.05 * a * b^2)"};
    c.base = {0.0, 0.0};
    c.eps = args.eps.value_or(0.1);
    c.linearize = true;
  } else if (name == "minkowski-spacelike-line") {
    c.type = ty(1, 0, 0, 1);
    c.coordinates = {"t", "x"};
    c.metric = diagonal({"-1", "1"});
    c.parameters = {"s"};
    c.embedding = {"0", "s"};
    c.base = {0.0};
  } else if (name == "minkowski-timelike-line") {
    c.type = ty(0, 1, 1, 0);
    c.coordinates = {"t", "x"};
    c.metric = diagonal({"-1", "1"});
    c.parameters = {"s"};
    c.embedding = {"s", "0"};
    c.base = {0.0};
  } else if (name == "minkowski-hyperbola") {
    c.type = ty(1, 0, 0, 1);
    c.coordinates = {"t", "x"};
    c.metric = diagonal({"-1", "1"});
    c.parameters = {"s"};
    c.embedding = {"sqrt(1 + s^2)", "s"};
    c.base = {0.0};
  } else if (name == "greatcircle-in-s3") {
    c.type = ty(1, 0, 2, 0);
    c.coordinates = {"chi", "th", "ph"};
    c.metric = diagonal({"1", "sin(chi)^2", "sin(chi)^2 * sin(th)^2"});
    c.parameters = {"s"};
    c.embedding = {"pi / 2", "pi / 2", "s"};
    c.base = {0.0};
  } else if (name == "helix-in-r3") {
    c.type = ty(1, 0, 2, 0);
    c.coordinates = {"x", "y", "z"};
    c.metric = diagonal({"1", "1", "1"});
    c.parameters = {"t"};
    c.embedding = {"0.8 * cos(t)", "0.8 * sin(t)", "0.6 * t"};
    c.base = {0.0};
  } else {
    throw ConfigError("unknown catalog case '" + name + "'");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Validation and charts

namespace {

struct Parsed {
  std::vector<std::vector<Expression>> metric;
  std::vector<Expression> embedding;
};

Parsed parse_case_expressions(const CaseSpec& c) {
  const std::string where = "case '" + c.name + "'";
  auto vars = [](std::vector<std::string> v) {
    v.push_back(kFamilyParameter);
    return v;
  };
  const auto cv = vars(c.coordinates);
  const auto pv = vars(c.parameters);
  auto parse = [&](const std::string& src, const std::vector<std::string>& v, const std::string& field) {
    try {
      return parse_expression(src, v);
    } catch (const ExprError& e) {
      throw ConfigError(where + ", " + field + ": " + e.what() + " in \"" + src + "\"");
    }
  };
  Parsed p;
  const int n = static_cast<int>(c.coordinates.size());
  for (int i = 0; i < n; ++i) {
    p.metric.emplace_back();
    for (int j = 0; j < n; ++j)
      p.metric.back().push_back(
          parse(c.metric[i][j], cv, "metric[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
  }
  for (int i = 0; i < n; ++i) p.embedding.push_back(parse(c.embedding[i], pv, "embedding[" + std::to_string(i) + "]"));
  return p;
}

}  // namespace

void validate_case(const CaseSpec& c) {
  const std::string where = "case '" + c.name + "'";
  if (c.name.empty()) throw ConfigError("case name must not be empty");
  try {
    c.type.validate();
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  const int n = c.type.n(), k = c.type.k();
  auto check_names = [&](const std::vector<std::string>& names, int want, const char* field) {
    if (static_cast<int>(names.size()) != want)
      throw ConfigError(where + ": " + field + " has " + std::to_string(names.size()) + " entries, type " +
                        type_string(c.type) + " needs " + std::to_string(want));
    std::set<std::string> seen;
    for (const auto& s : names) {
      if (!valid_identifier(s)) throw ConfigError(where + ": " + field + " entry '" + s + "' is not an identifier");
      if (reserved_names().count(s)) throw ConfigError(where + ": " + field + " entry '" + s + "' is reserved");
      if (!seen.insert(s).second) throw ConfigError(where + ": duplicate name '" + s + "' in " + field);
    }
  };
  check_names(c.coordinates, n, "coordinates");
  check_names(c.parameters, k, "parameters");
  if (static_cast<int>(c.metric.size()) != n)
    throw ConfigError(where + ": metric has " + std::to_string(c.metric.size()) + " rows, need " + std::to_string(n));
  for (int i = 0; i < n; ++i)
    if (static_cast<int>(c.metric[i].size()) != n)
      throw ConfigError(where + ": metric row " + std::to_string(i) + " has " + std::to_string(c.metric[i].size()) +
                        " entries, need " + std::to_string(n));
  if (static_cast<int>(c.embedding.size()) != n)
    throw ConfigError(where + ": embedding has " + std::to_string(c.embedding.size()) + " components, need " +
                      std::to_string(n));
  if (static_cast<int>(c.base.size()) != k)
    throw ConfigError(where + ": base has " + std::to_string(c.base.size()) + " entries, need " + std::to_string(k));
  for (double b : c.base)
    if (!std::isfinite(b)) throw ConfigError(where + ": base point must be finite");
  if (!std::isfinite(c.eps)) throw ConfigError(where + ": eps must be finite");

  const Parsed p = parse_case_expressions(c);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!same_tree(p.metric[i][j].root(), p.metric[j][i].root()))
        throw ConfigError(where + ": metric is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");

  // Signature checks at the base point.
  try {
    const CaseGeometry g = build_case(c);
    adapted_frame(g.metric, g.submanifold, c.type);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

CaseGeometry build_case(const CaseSpec& c, double eps) {
  const auto p = std::make_shared<const Parsed>(parse_case_expressions(c));
  const int n = c.type.n(), k = c.type.k();
  MetricChart metric(n, c.type.ambient(), [p, n, eps](std::span<const Jet> z) {
    std::vector<Jet> args(z.begin(), z.end());
    args.emplace_back(z[0].layout(), eps);
    JetMatrix g(n, n, z[0].layout());
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) g(i, j) = g(j, i) = p->metric[i][j](args);
    return g;
  });
  SubmanifoldChart sub(
      k, n,
      [p, eps](std::span<const Jet> s) {
        std::vector<Jet> args(s.begin(), s.end());
        args.emplace_back(s[0].layout(), eps);
        std::vector<Jet> out;
        for (const auto& e : p->embedding) out.push_back(e(args));
        return out;
      },
      c.base);
  return {std::move(metric), std::move(sub), c.type};
}

// ---------------------------------------------------------------------------
// Run configuration

void RunConfig::validate() const {
  if (order < 2 || order > 5) throw ConfigError("order must be in [2, 5], got " + std::to_string(order));
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(tolerance, "tolerance");
  positive(first_order_tolerance, "first_order_tolerance");
  positive(loop_tolerance, "loop_tolerance");
  positive(gauss_tolerance, "gauss_tolerance");
  positive(radius, "radius");
  try {
    solver.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  positive(linearize.eps, "linearize.eps");
  positive(linearize.rel_tol, "linearize.rel_tol");
  if (!(linearize.abs_floor >= 0.0)) throw ConfigError("linearize.abs_floor must be >= 0");
  for (double e : linearize.scaling_eps) positive(e, "linearize.scaling_eps entries");
  if (linearize.scaling_eps.size() == 1) throw ConfigError("linearize.scaling_eps needs at least two values");
  if (output.format != "csv" && output.format != "json" && output.format != "both")
    throw ConfigError("output.format must be csv, json or both, got '" + output.format + "'");
  if (output.dir.empty()) throw ConfigError("output.dir must not be empty");
  if (cases.empty()) throw ConfigError("cases: at least one case is required");
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const Reader r(root, "config");
  RunConfig cfg;
  if (!r.has("schema_version")) throw ConfigError("config: missing field 'schema_version'");
  if (r.integer("schema_version") != kConfigSchemaVersion)
    throw ConfigError("config.schema_version: unsupported version (expected " + std::to_string(kConfigSchemaVersion) +
                      ")");
  if (r.has("order")) cfg.order = static_cast<int>(r.integer("order"));
  if (r.has("tolerance")) cfg.tolerance = r.number("tolerance");
  if (r.has("first_order_tolerance")) cfg.first_order_tolerance = r.number("first_order_tolerance");
  if (r.has("loop_tolerance")) cfg.loop_tolerance = r.number("loop_tolerance");
  if (r.has("gauss_tolerance")) cfg.gauss_tolerance = r.number("gauss_tolerance");
  if (r.has("seed")) cfg.seed = r.unsigned_integer("seed");
  if (r.has("radius")) cfg.radius = r.number("radius");
  if (r.has("solver")) {
    const Reader s(r.at("solver"), r.sub("solver"));
    if (s.has("steps_per_unit")) cfg.solver.steps_per_unit = static_cast<int>(s.integer("steps_per_unit"));
    if (s.has("tolerance")) cfg.solver.tolerance = s.number("tolerance");
    if (s.has("max_steps")) cfg.solver.max_steps = static_cast<int>(s.integer("max_steps"));
    if (s.has("halving_check")) cfg.solver.halving_check = s.boolean("halving_check");
    s.finish();
  }
  if (r.has("linearize")) {
    const Reader s(r.at("linearize"), r.sub("linearize"));
    if (s.has("eps")) cfg.linearize.eps = s.number("eps");
    if (s.has("scaling_eps")) cfg.linearize.scaling_eps = s.numbers("scaling_eps");
    if (s.has("rel_tol")) cfg.linearize.rel_tol = s.number("rel_tol");
    if (s.has("abs_floor")) cfg.linearize.abs_floor = s.number("abs_floor");
    if (s.has("min_exponent")) cfg.linearize.min_exponent = s.number("min_exponent");
    s.finish();
  }
  if (r.has("output")) {
    const Reader s(r.at("output"), r.sub("output"));
    if (s.has("dir")) cfg.output.dir = s.string("dir");
    if (s.has("format")) cfg.output.format = s.string("format");
    s.finish();
  }
  if (!r.has("cases")) throw ConfigError("config: missing field 'cases'");
  const auto& cs = r.at("cases");
  if (!cs.is_array()) throw ConfigError("config.cases: expected an array");
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string path = "config.cases[" + std::to_string(i) + "]";
    const Reader c(cs[i], path);
    CaseInput in;
    if (c.has("catalog")) {
      in.catalog = c.string("catalog");
      if (c.has("name")) in.name = c.string("name");
      if (c.has("type")) in.args.type = type_from_json(c.at("type"), c.sub("type"));
      if (c.has("kappa")) in.args.kappa = c.number("kappa");
      if (c.has("seed")) in.args.seed = c.unsigned_integer("seed");
      if (c.has("eps")) in.args.eps = c.number("eps");
      c.finish();
      const auto& names = catalog();
      if (std::none_of(names.begin(), names.end(), [&](const CatalogEntry& e) { return e.name == in.catalog; }))
        throw ConfigError(c.sub("catalog") + ": unknown catalog case '" + in.catalog + "'");
    } else {
      in.spec = case_from_json(c, path);
    }
    cfg.cases.push_back(std::move(in));
  }
  r.finish();
  cfg.validate();
  return cfg;
}

std::string serialize_run_config(const RunConfig& cfg) {
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["order"] = cfg.order;
  j["tolerance"] = cfg.tolerance;
  j["first_order_tolerance"] = cfg.first_order_tolerance;
  j["loop_tolerance"] = cfg.loop_tolerance;
  j["gauss_tolerance"] = cfg.gauss_tolerance;
  j["seed"] = cfg.seed;
  j["radius"] = cfg.radius;
  j["solver"] = {{"steps_per_unit", cfg.solver.steps_per_unit},
                 {"tolerance", cfg.solver.tolerance},
                 {"max_steps", cfg.solver.max_steps},
                 {"halving_check", cfg.solver.halving_check}};
  j["linearize"] = {{"eps", cfg.linearize.eps},
                    {"scaling_eps", cfg.linearize.scaling_eps},
                    {"rel_tol", cfg.linearize.rel_tol},
                    {"abs_floor", cfg.linearize.abs_floor},
                    {"min_exponent", cfg.linearize.min_exponent}};
  j["output"] = {{"dir", cfg.output.dir}, {"format", cfg.output.format}};
  ordered_json cases = ordered_json::array();
  for (const auto& in : cfg.cases) {
    if (in.spec) {
      cases.push_back(case_to_json(*in.spec));
      continue;
    }
    ordered_json c;
    c["catalog"] = in.catalog;
    if (in.name) c["name"] = *in.name;
    if (in.args.type) c["type"] = type_string(*in.args.type);
    if (in.args.kappa) c["kappa"] = *in.args.kappa;
    if (in.args.seed) c["seed"] = *in.args.seed;
    if (in.args.eps) c["eps"] = *in.args.eps;
    cases.push_back(std::move(c));
  }
  j["cases"] = std::move(cases);
  return j.dump(2) + "\n";
}

std::string serialize_case(const CaseSpec& c) { return case_to_json(c).dump(2) + "\n"; }

CaseSpec parse_case(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("case is not valid JSON: ") + e.what());
  }
  return case_from_json(Reader(j, "case"), "case");
}

std::vector<CaseSpec> expand_cases(const RunConfig& cfg) {
  std::vector<CaseSpec> out;
  std::set<std::string> names;
  for (const auto& in : cfg.cases) {
    CaseSpec c = in.spec ? *in.spec : catalog_case(in.catalog, in.args, cfg.seed);
    if (in.name) c.name = *in.name;
    validate_case(c);
    if (!names.insert(c.name).second) throw ConfigError("duplicate case name '" + c.name + "'");
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace fermijet
