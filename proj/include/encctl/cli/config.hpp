// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Run configuration: JSON loading with cross-validation, and a normalized
// re-emission in which every default is explicit.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "encctl/error.hpp"
#include "encctl/fixedpoint.hpp"
#include "encctl/polynomial.hpp"
#include "encctl/realization/canonical.hpp"
#include "encctl/realization/io.hpp"
#include "encctl/realization/linear.hpp"
#include "encctl/simloop/plant.hpp"
#include "encctl/simloop/simulate.hpp"

namespace encctl::cli {

using json = nlohmann::ordered_json;

struct ControllerConfig {
  enum class Kind { linear, canonical, history };
  Kind kind = Kind::linear;
  realization::LinearController linear;
  realization::CanonicalSystem canonical;
  realization::IoRealization history;
};

struct RunConfig {
  ControllerConfig controller;
  simloop::PlantSpec plant;
  simloop::Reference reference;
  fixedpoint::FixedPointParams fixed_point;
  simloop::BackendSpec backend;
  std::uint64_t steps = 1000;
  std::uint64_t seed = 0;
  simloop::Mode mode = simloop::Mode::encrypted;
  std::vector<double> sweep_r{1e-1, 1e-2, 1e-3, 1e-4};
};

/// Recursion obtained from the controller section, with the decomposition
/// when the controller is linear.
struct Conversion {
  realization::IoRealization io;
  std::optional<realization::DecompositionResult> decomposition;
  std::optional<realization::CanonicalSystem> canonical;
};

namespace detail {

[[noreturn]] inline void bad(const std::string& where, const std::string& what) {
  fail(ErrorCode::ParseError, where + ": " + what);
}

inline const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where, std::string("missing '") + key + "'");
  return j.at(key);
}

inline double to_double(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

inline std::uint64_t to_u64(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    bad(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline int to_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

inline Eigen::VectorXd to_vector(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_double(j[i], where);
  return v;
}

inline std::vector<double> to_std_vector(const json& j, const std::string& where) {
  const Eigen::VectorXd v = to_vector(j, where);
  return {v.data(), v.data() + v.size()};
}

inline Eigen::MatrixXd to_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) bad(where, "rows must be arrays of equal length");
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = to_double(j[i][k], where);
  }
  return m;
}

inline json from_vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline json from_matrix(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(from_vector(m.row(i).transpose()));
  return out;
}

/// A polynomial is a string (possibly multi-line) or an array of term lines.
inline Polynomial<double> to_poly(const json& j, const std::string& where) {
  std::string text;
  if (j.is_string()) {
    text = j.get<std::string>();
  } else if (j.is_array()) {
    for (const auto& line : j) {
      if (!line.is_string()) bad(where, "polynomial lines must be strings");
      text += line.get<std::string>() + "\n";
    }
  } else {
    bad(where, "expected a polynomial string");
  }
  try {
    return parse_polynomial<double>(text);
  } catch (const Error& e) {
    bad(where, e.detail());
  }
}

inline std::string from_poly(const Polynomial<double>& p) { return to_inline_string(p); }

}  // namespace detail

inline ControllerConfig parse_controller(const json& j) {
  using namespace detail;
  const std::string w = "controller";
  ControllerConfig c;
  const std::string type = need(j, "type", w).get<std::string>();
  if (type == "linear") {
    c.kind = ControllerConfig::Kind::linear;
    auto& L = c.linear;
    L.A = to_matrix(need(j, "A", w), w + ".A");
    L.B = to_matrix(need(j, "B", w), w + ".B");
    L.C = to_vector(need(j, "C", w), w + ".C").transpose();
    if (j.contains("x0")) L.x0 = to_vector(j["x0"], w + ".x0");
    if (j.contains("D")) L.D = to_vector(j["D"], w + ".D").transpose();
    L.validate();
  } else if (type == "canonical") {
    c.kind = ControllerConfig::Kind::canonical;
    auto& S = c.canonical;
    S.n = to_int(need(j, "n", w), w + ".n");
    S.p = j.contains("p") ? to_int(j["p"], w + ".p") : 1;
    const json& g = need(j, "g", w);
    if (!g.is_array()) bad(w + ".g", "expected one polynomial per state");
    for (std::size_t i = 0; i < g.size(); ++i) S.g.push_back(to_poly(g[i], w + ".g[" + std::to_string(i) + "]"));
    if (j.contains("z0")) S.z0 = to_vector(j["z0"], w + ".z0");
    S.validate();
  } else if (type == "history") {
    c.kind = ControllerConfig::Kind::history;
    auto& H = c.history;
    H.g.m = to_int(need(j, "m", w), w + ".m");
    H.g.p = j.contains("p") ? to_int(j["p"], w + ".p") : 1;
    H.g.feedthrough = j.value("feedthrough", false);
    H.g.poly = to_poly(need(j, "g", w), w + ".g");
    H.g.validate();
    H = realization::IoRealization::zero_history(H.g);
    if (j.contains("u_init")) H.u_init = to_std_vector(j["u_init"], w + ".u_init");
    if (j.contains("y_init")) {
      const json& y = j["y_init"];
      if (!y.is_array()) bad(w + ".y_init", "expected an array of vectors");
      H.y_init.clear();
      for (const auto& row : y) H.y_init.push_back(to_std_vector(row, w + ".y_init"));
    }
    H.validate();
  } else {
    bad(w + ".type", "unknown controller type '" + type + "' (linear, canonical, history)");
  }
  return c;
}

inline json emit_controller(const ControllerConfig& c) {
  using namespace detail;
  json j;
  switch (c.kind) {
    case ControllerConfig::Kind::linear: {
      const auto& L = c.linear;
      j["type"] = "linear";
      j["A"] = from_matrix(L.A);
      j["B"] = from_matrix(L.B);
      j["C"] = from_vector(L.C.transpose());
      j["x0"] = from_vector(L.initial_state());
      j["D"] = L.D.size() ? from_vector(L.D.transpose()) : json::array();
      break;
    }
    case ControllerConfig::Kind::canonical: {
      const auto& S = c.canonical;
      j["type"] = "canonical";
      j["n"] = S.n;
      j["p"] = S.p;
      j["g"] = json::array();
      for (const auto& g : S.g) j["g"].push_back(from_poly(g));
      j["z0"] = from_vector(S.initial_state());
      break;
    }
    case ControllerConfig::Kind::history: {
      const auto& H = c.history;
      j["type"] = "history";
      j["m"] = H.g.m;
      j["p"] = H.g.p;
      j["feedthrough"] = H.g.feedthrough;
      j["g"] = from_poly(H.g.poly);
      j["u_init"] = H.u_init;
      j["y_init"] = H.y_init;
      break;
    }
  }
  return j;
}

inline simloop::PlantSpec parse_plant(const json& j) {
  using namespace detail;
  const std::string w = "plant";
  simloop::PlantSpec p;
  const std::string type = need(j, "type", w).get<std::string>();
  if (type == "linear") {
    simloop::LinearPlant lp;
    lp.A = to_matrix(need(j, "A", w), w + ".A");
    lp.B = to_vector(need(j, "B", w), w + ".B");
    lp.C = to_matrix(need(j, "C", w), w + ".C");
    if (j.contains("x0")) lp.x0 = to_vector(j["x0"], w + ".x0");
    p.model = std::move(lp);
  } else if (type == "polynomial") {
    simloop::PolynomialPlant pp;
    const json& f = need(j, "f", w);
    const json& h = need(j, "h", w);
    if (!f.is_array() || !h.is_array()) bad(w, "f and h must be arrays of polynomials");
    for (std::size_t i = 0; i < f.size(); ++i) pp.f.push_back(to_poly(f[i], w + ".f[" + std::to_string(i) + "]"));
    for (std::size_t i = 0; i < h.size(); ++i) pp.h.push_back(to_poly(h[i], w + ".h[" + std::to_string(i) + "]"));
    if (j.contains("x0")) pp.x0 = to_vector(j["x0"], w + ".x0");
    p.model = std::move(pp);
  } else {
    bad(w + ".type", "unknown plant type '" + type + "' (linear, polynomial)");
  }
  p.validate();
  return p;
}

inline json emit_plant(const simloop::PlantSpec& p) {
  using namespace detail;
  json j;
  if (const auto* lp = std::get_if<simloop::LinearPlant>(&p.model)) {
    j["type"] = "linear";
    j["A"] = from_matrix(lp->A);
    j["B"] = from_vector(lp->B);
    j["C"] = from_matrix(lp->C);
  } else {
    const auto& pp = std::get<simloop::PolynomialPlant>(p.model);
    j["type"] = "polynomial";
    j["f"] = json::array();
    for (const auto& f : pp.f) j["f"].push_back(from_poly(f));
    j["h"] = json::array();
    for (const auto& h : pp.h) j["h"].push_back(from_poly(h));
  }
  j["x0"] = from_vector(p.initial_state());
  return j;
}

inline simloop::Reference parse_reference(const json& j) {
  using namespace detail;
  const std::string w = "reference";
  simloop::Reference r;
  const std::string type = j.value("type", "zero");
  if (type == "zero") r.kind = simloop::Reference::Kind::zero;
  else if (type == "constant") r.kind = simloop::Reference::Kind::constant;
  else if (type == "step") r.kind = simloop::Reference::Kind::step;
  else if (type == "sine") r.kind = simloop::Reference::Kind::sine;
  else bad(w + ".type", "unknown reference '" + type + "' (zero, constant, step, sine)");
  if (j.contains("value")) r.value = to_double(j["value"], w + ".value");
  if (j.contains("start")) r.start = to_u64(j["start"], w + ".start");
  if (j.contains("period")) r.period = to_double(j["period"], w + ".period");
  if (j.contains("phase")) r.phase = to_double(j["phase"], w + ".phase");
  r.validate();
  return r;
}

inline json emit_reference(const simloop::Reference& r) {
  static const char* names[] = {"zero", "constant", "step", "sine"};
  json j;
  j["type"] = names[static_cast<int>(r.kind)];
  j["value"] = r.value;
  j["start"] = r.start;
  j["period"] = r.period;
  j["phase"] = r.phase;
  return j;
}

inline simloop::BackendSpec parse_backend(const json& j) {
  using namespace detail;
  const std::string w = "backend";
  simloop::BackendSpec b;
  const std::string type = j.value("type", "lwe");
  if (type == "lwe") b.kind = simloop::BackendSpec::Kind::lwe;
  else if (type == "leveled") b.kind = simloop::BackendSpec::Kind::leveled;
  else bad(w + ".type", "unknown backend '" + type + "' (lwe, leveled)");
  if (j.contains("n")) b.n = to_u64(j["n"], w + ".n");
  if (j.contains("noise_bound")) b.noise_bound = to_u64(j["noise_bound"], w + ".noise_bound");
  if (j.contains("depth_cap")) b.depth_cap = to_int(j["depth_cap"], w + ".depth_cap");
  if (j.contains("N")) {
    if (j["N"].is_string()) {
      if (j["N"].get<std::string>() != "auto") bad(w + ".N", "expected an integer or \"auto\"");
    } else {
      b.N = to_u64(j["N"], w + ".N");
    }
  }
  if (b.n == 0) bad(w + ".n", "must be positive");
  if (b.noise_bound == 0) bad(w + ".noise_bound", "must be positive");
  if (b.depth_cap < 0 || b.depth_cap > 30) bad(w + ".depth_cap", "must be in [0, 30]");
  return b;
}

inline json emit_backend(const simloop::BackendSpec& b) {
  json j;
  j["type"] = b.kind == simloop::BackendSpec::Kind::lwe ? "lwe" : "leveled";
  j["N"] = b.N ? json(*b.N) : json("auto");
  j["n"] = b.n;
  j["noise_bound"] = b.noise_bound;
  j["depth_cap"] = b.depth_cap;
  return j;
}

inline RunConfig parse_config(const json& j) {
  using namespace detail;
  if (!j.is_object()) bad("config", "expected a JSON object");
  RunConfig c;
  c.controller = parse_controller(need(j, "controller", "config"));
  c.plant = parse_plant(need(j, "plant", "config"));
  if (j.contains("reference")) c.reference = parse_reference(j["reference"]);

  const json& fp = need(j, "fixed_point", "config");
  c.fixed_point.M = to_double(need(fp, "M", "fixed_point"), "fixed_point.M");
  c.fixed_point.r = fp.contains("r") ? to_double(fp["r"], "fixed_point.r") : 1e-3;
  c.fixed_point.s = fp.contains("s") ? to_double(fp["s"], "fixed_point.s") : c.fixed_point.r;
  c.fixed_point.validate();

  if (j.contains("backend")) c.backend = parse_backend(j["backend"]);
  if (j.contains("steps")) c.steps = to_u64(j["steps"], "steps");
  if (j.contains("seed")) c.seed = to_u64(j["seed"], "seed");
  if (j.contains("mode")) c.mode = simloop::parse_mode(j["mode"].get<std::string>());
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    if (s.contains("r_values")) c.sweep_r = to_std_vector(s["r_values"], "sweep.r_values");
  }
  return c;
}

inline json emit_config(const RunConfig& c) {
  json j;
  j["controller"] = emit_controller(c.controller);
  j["plant"] = emit_plant(c.plant);
  j["reference"] = emit_reference(c.reference);
  j["fixed_point"] = {{"r", c.fixed_point.r}, {"s", c.fixed_point.s}, {"M", c.fixed_point.M}};
  j["backend"] = emit_backend(c.backend);
  j["steps"] = c.steps;
  j["seed"] = c.seed;
  j["mode"] = simloop::to_string(c.mode);
  j["sweep"] = {{"r_values", c.sweep_r}};
  return j;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) fail(ErrorCode::ParseError, "config: " + e.detail());
    throw;
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline Conversion convert(const ControllerConfig& c) {
  Conversion out;
  switch (c.kind) {
    case ControllerConfig::Kind::linear: {
      out.decomposition = realization::observable_decomposition(c.linear);
      out.io = realization::derive_initial_history(*out.decomposition);
      break;
    }
    case ControllerConfig::Kind::canonical:
      out.canonical = c.canonical;
      out.io = realization::back_substitute(c.canonical);
      break;
    case ControllerConfig::Kind::history: out.io = c.history; break;
  }
  return out;
}

inline simloop::LoopSpec loop_spec(const RunConfig& c, const realization::IoRealization& io) {
  simloop::LoopSpec s;
  s.plant = c.plant;
  s.controller = io;
  s.fp = c.fixed_point;
  s.reference = c.reference;
  s.backend = c.backend;
  s.steps = c.steps;
  s.seed = c.seed;
  try {
    s.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) fail(ErrorCode::ParseError, "config: " + e.detail());
    throw;
  }
  return s;
}

}  // namespace encctl::cli
