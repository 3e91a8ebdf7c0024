// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "encctl/error.hpp"

namespace encctl::simloop {

inline constexpr double kNotRecorded = std::numeric_limits<double>::quiet_NaN();

/// Per-step record of one closed-loop run. Channels a mode does not produce
/// hold NaN (or nullopt for the integer channel).
struct Trace {
  int p = 1;
  std::vector<std::vector<double>> y;
  std::vector<double> u_nom;
  std::vector<double> u_q;
  std::vector<double> u_enc;
  std::vector<std::optional<std::int64_t>> ubar_prime;
  std::vector<double> noise_budget_bits;
  std::vector<double> step_us;

  std::size_t size() const { return y.size(); }

  void append(std::vector<double> y_t, double nom, double q, double enc, std::optional<std::int64_t> ubp,
              double budget, double us) {
    y.push_back(std::move(y_t));
    u_nom.push_back(nom);
    u_q.push_back(q);
    u_enc.push_back(enc);
    ubar_prime.push_back(ubp);
    noise_budget_bits.push_back(budget);
    step_us.push_back(us);
  }

  /// Channel by CSV column name (y1..yp, u_nom, u_q, u_enc, ubar_prime,
  /// noise_budget_bits, step_us).
  std::vector<double> channel(std::string_view name) const {
    if (name == "u_nom") return u_nom;
    if (name == "u_q") return u_q;
    if (name == "u_enc") return u_enc;
    if (name == "noise_budget_bits") return noise_budget_bits;
    if (name == "step_us") return step_us;
    if (name == "ubar_prime") {
      std::vector<double> out;
      for (const auto& v : ubar_prime) out.push_back(v ? static_cast<double>(*v) : kNotRecorded);
      return out;
    }
    if (name.size() > 1 && name[0] == 'y') {
      int k = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (ec == std::errc() && ptr == name.data() + name.size() && k >= 1 && k <= p) {
        std::vector<double> out;
        for (const auto& v : y) out.push_back(v[static_cast<std::size_t>(k - 1)]);
        return out;
      }
    }
    fail(ErrorCode::InvalidArgument, "unknown trace channel '" + std::string(name) + "'");
  }
};

/// Shortest round-trip representation; "nan" for NaN.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string csv_header(int p) {
  std::string h = "t";
  for (int k = 1; k <= p; ++k) h += ",y" + std::to_string(k);
  return h + ",u_nom,u_q,u_enc,ubar_prime,noise_budget_bits,step_us";
}

inline std::string to_csv(const Trace& tr) {
  std::string out = csv_header(tr.p) + "\n";
  for (std::size_t t = 0; t < tr.size(); ++t) {
    out += std::to_string(t);
    for (double v : tr.y[t]) out += "," + format_double(v);
    out += "," + format_double(tr.u_nom[t]);
    out += "," + format_double(tr.u_q[t]);
    out += "," + format_double(tr.u_enc[t]);
    out += "," + (tr.ubar_prime[t] ? std::to_string(*tr.ubar_prime[t]) : std::string("nan"));
    out += "," + format_double(tr.noise_budget_bits[t]);
    out += "," + format_double(tr.step_us[t]);
    out += "\n";
  }
  return out;
}

namespace detail {

inline double parse_double(std::string_view s) {
  if (s == "nan") return kNotRecorded;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorCode::ParseError, "bad number '" + std::string(s) + "' in trace");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

}  // namespace detail

inline Trace from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, "empty trace");
  const auto header = detail::split(line);
  const int p = static_cast<int>(header.size()) - 7;
  if (p < 1 || line != csv_header(p)) fail(ErrorCode::ParseError, "unexpected trace header '" + line + "'");
  Trace tr;
  tr.p = p;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line);
    if (f.size() != header.size())
      fail(ErrorCode::ParseError, "trace row " + std::to_string(row) + " has " + std::to_string(f.size()) +
                                      " fields, expected " + std::to_string(header.size()));
    std::vector<double> y;
    for (int k = 0; k < p; ++k) y.push_back(detail::parse_double(f[static_cast<std::size_t>(1 + k)]));
    const auto base = static_cast<std::size_t>(1 + p);
    std::optional<std::int64_t> ubp;
    if (f[base + 3] != "nan") {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(f[base + 3].data(), f[base + 3].data() + f[base + 3].size(), v);
      if (ec != std::errc() || ptr != f[base + 3].data() + f[base + 3].size())
        fail(ErrorCode::ParseError, "bad integer in trace row " + std::to_string(row));
      ubp = v;
    }
    tr.append(std::move(y), detail::parse_double(f[base]), detail::parse_double(f[base + 1]),
              detail::parse_double(f[base + 2]), ubp, detail::parse_double(f[base + 4]),
              detail::parse_double(f[base + 5]));
    ++row;
  }
  return tr;
}

inline void write_trace(const Trace& tr, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << to_csv(tr);
  if (!out) fail(ErrorCode::IoError, "write to " + path + " failed");
}

inline Trace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str());
}

}  // namespace encctl::simloop
