// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Closed-loop runs of plant + controller in nominal (real), quantized
// (integer) and encrypted mode, trace comparison and quantization sweeps.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "encctl/error.hpp"
#include "encctl/fixedpoint.hpp"
#include "encctl/homcrypt/certify.hpp"
#include "encctl/homcrypt/evaluator.hpp"
#include "encctl/homcrypt/params.hpp"
#include "encctl/homcrypt/prng.hpp"
#include "encctl/homcrypt/secret.hpp"
#include "encctl/realization/io.hpp"
#include "encctl/runtime/encrypted.hpp"
#include "encctl/runtime/endpoints.hpp"
#include "encctl/runtime/quantized.hpp"
#include "encctl/simloop/plant.hpp"
#include "encctl/simloop/trace.hpp"

namespace encctl::simloop {

enum class Mode { nominal, quantized, encrypted };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::nominal: return "nominal";
    case Mode::quantized: return "quantized";
    case Mode::encrypted: return "encrypted";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "nominal") return Mode::nominal;
  if (s == "quantized") return Mode::quantized;
  if (s == "encrypted") return Mode::encrypted;
  fail(ErrorCode::InvalidArgument, "unknown mode '" + std::string(s) + "' (nominal, quantized, encrypted)");
}

struct BackendSpec {
  enum class Kind { lwe, leveled };
  Kind kind = Kind::lwe;
  std::size_t n = 1024;             // LWE dimension
  std::optional<std::uint64_t> N;   // empty: smallest sufficient power of two
  std::uint64_t noise_bound = 16;   // LWE
  int depth_cap = 2;                // leveled
};

struct LoopSpec {
  PlantSpec plant;
  realization::IoRealization controller;
  fixedpoint::FixedPointParams fp;
  Reference reference;
  BackendSpec backend;
  std::uint64_t steps = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    plant.validate();
    controller.validate();
    fp.validate();
    reference.validate();
    if (controller.g.p != plant.p())
      fail(ErrorCode::InvalidArgument, "controller expects " + std::to_string(controller.g.p) +
                                           " inputs but the plant has " + std::to_string(plant.p()) + " outputs");
  }
};

struct RunOptions {
  Mode mode = Mode::nominal;
  bool assert_exact = false;  // encrypted: compare with the quantized controller every step
  bool certify = true;        // refuse parameters that fail certification
  bool timing = false;        // record step_us (non-deterministic)
  std::optional<homcrypt::SecretKey> key;  // LWE: use this key instead of deriving one from the seed
};

inline RunOptions options(Mode mode) {
  RunOptions o;
  o.mode = mode;
  return o;
}

/// Integer encoding and ring chosen for a run.
struct Setup {
  fixedpoint::EncodedController enc;
  std::uint64_t N = 0;
  homcrypt::Certificate certificate;
};

struct RunStats {
  std::uint64_t fresh_inputs_consumed = 0;
  std::uint64_t exactness_checks = 0;
  double min_noise_budget_bits = std::numeric_limits<double>::infinity();
};

struct RunResult {
  Trace trace;
  Mode mode = Mode::nominal;
  std::optional<Setup> setup;  // quantized and encrypted modes
  RunStats stats;
};

inline homcrypt::Certificate certify_backend(const fixedpoint::EncodedController& enc, const BackendSpec& b,
                                             std::uint64_t N) {
  if (b.kind == BackendSpec::Kind::lwe) return homcrypt::certify(enc, homcrypt::LwePublicParams{b.n, N, b.noise_bound});
  return homcrypt::certify(enc, homcrypt::LeveledParams{N, b.depth_cap});
}

/// Encodes the controller and fixes N: the configured value, or the smallest
/// power of two covering the plaintext bound. Without `for_encryption` the
/// ring only bounds the integer controller, so N may exceed what the backend
/// supports (up to 2^62); the certificate then lists that as a problem.
inline Setup prepare(const LoopSpec& spec, bool certify, bool for_encryption = true) {
  Setup s;
  s.enc = fixedpoint::encode_polynomial(spec.controller.g, spec.fp);
  const bool lwe = spec.backend.kind == BackendSpec::Kind::lwe;
  const BigInt backend_limit = lwe ? BigInt(1) << 32 : BigInt(1) << 62;
  if (spec.backend.N) {
    s.N = *spec.backend.N;
  } else {
    const BigInt need = fixedpoint::required_power_of_two_modulus(s.enc);
    const BigInt limit = for_encryption ? backend_limit : BigInt(1) << 62;
    if (need > limit)
      fail(ErrorCode::CertificationFailed, "required plaintext modulus " + need.str() + " exceeds the limit " +
                                               limit.str() + "; increase r or decrease M");
    s.N = need.convert_to<std::uint64_t>();
  }
  if (for_encryption || BigInt(s.N) <= backend_limit) {
    s.certificate = certify_backend(s.enc, spec.backend, s.N);
  } else {
    s.certificate.backend = lwe ? "lwe" : "leveled";
    s.certificate.N = s.N;
    s.certificate.required_N = fixedpoint::required_plaintext_modulus(s.enc);
    s.certificate.plaintext_ok = BigInt(s.N) >= s.certificate.required_N;
    s.certificate.problems.push_back("N = " + std::to_string(s.N) + " exceeds the backend limit " +
                                     backend_limit.str() + "; quantized runs only");
  }
  if (certify && !s.certificate.ok()) {
    std::string why;
    for (const auto& p : s.certificate.problems) why += (why.empty() ? "" : "; ") + p;
    fail(ErrorCode::CertificationFailed, why);
  }
  return s;
}

namespace detail {

class StepTimer {
 public:
  explicit StepTimer(bool on) : on_(on) {
    if (on_) start_ = std::chrono::steady_clock::now();
  }
  double elapsed_us() const {
    if (!on_) return kNotRecorded;
    return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool on_;
  std::chrono::steady_clock::time_point start_;
};

inline void check_finite(const std::vector<double>& y) {
  for (double v : y)
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteSignal, "plant output is not finite");
}

template <class F>
void run_steps(std::uint64_t steps, F&& body) {
  for (std::uint64_t t = 0; t < steps; ++t) {
    try {
      body(t);
    } catch (const Error& e) {
      throw e.at_step(t);
    }
  }
}

inline RunResult run_nominal(const LoopSpec& spec, const RunOptions& opt) {
  RunResult res;
  res.mode = Mode::nominal;
  res.trace.p = spec.plant.p();
  PlantSim plant(spec.plant, 1e3 * spec.fp.M);
  realization::RealRecursion ctrl(spec.controller);
  run_steps(spec.steps, [&](std::uint64_t t) {
    const StepTimer timer(opt.timing);
    std::vector<double> y = plant.output();
    check_finite(y);
    const double u = ctrl.step(y);
    ctrl.feedback(u, y);
    plant.advance(u + spec.reference.at(t));
    res.trace.append(std::move(y), u, kNotRecorded, kNotRecorded, std::nullopt, kNotRecorded, timer.elapsed_us());
  });
  return res;
}

inline runtime::QuantizedController make_quantized(const LoopSpec& spec, const Setup& s) {
  return runtime::QuantizedController(
      s.enc, BigInt(s.N), runtime::quantize_history(spec.controller.u_init, spec.controller.y_init, spec.fp.r));
}

inline std::vector<std::int64_t> quantize_output(const std::vector<double>& y, const fixedpoint::EncodedController& enc) {
  check_finite(y);
  auto y_bar = fixedpoint::quantize(y, enc.params.r);
  for (auto v : y_bar) runtime::check_box(v, enc.box, "y_bar");
  return y_bar;
}

inline RunResult run_quantized(const LoopSpec& spec, const RunOptions& opt, Setup s) {
  RunResult res;
  res.mode = Mode::quantized;
  res.trace.p = spec.plant.p();
  PlantSim plant(spec.plant, 1e3 * spec.fp.M);
  auto ctrl = make_quantized(spec, s);
  run_steps(spec.steps, [&](std::uint64_t t) {
    const StepTimer timer(opt.timing);
    std::vector<double> y = plant.output();
    const auto y_bar = quantize_output(y, s.enc);
    const auto out = ctrl.step(y_bar);
    ctrl.feedback(out.u_q, y_bar);
    plant.advance(out.u_q + spec.reference.at(t));
    res.trace.append(std::move(y), kNotRecorded, out.u_q, kNotRecorded, out.u_bar_prime, kNotRecorded,
                     timer.elapsed_us());
  });
  res.setup = std::move(s);
  return res;
}

inline void check_ring(std::int64_t v, std::uint64_t N, const char* what) {
  if (!homcrypt::in_plaintext_range(v, N))
    fail(ErrorCode::PlaintextOverflow,
         std::string(what) + " = " + std::to_string(v) + " does not fit Z_N with N = " + std::to_string(N));
}

template <class Evaluator, class Client>
RunResult run_encrypted(const LoopSpec& spec, const RunOptions& opt, Setup s, Evaluator eval, const Client& client) {
  using Ct = typename Client::ciphertext_type;
  const homcrypt::Seed seed = homcrypt::seed_from_u64(spec.seed);
  runtime::Sensor<Client> sensor(client, homcrypt::Prng(seed, homcrypt::Stream::sensor));
  runtime::Actuator<Client> actuator(client, homcrypt::Prng(seed, homcrypt::Stream::actuator), s.enc.L, spec.fp.r,
                                     s.enc.box);

  // Setup: the actuator encrypts the input history, the sensor the output
  // history.
  const auto hist = runtime::quantize_history(spec.controller.u_init, spec.controller.y_init, spec.fp.r);
  std::vector<Ct> u_init;
  std::vector<std::vector<Ct>> y_init;
  for (auto v : hist.u) {
    runtime::check_box(v, s.enc.box, "initial u_bar");
    check_ring(v, s.N, "initial u_bar");
    u_init.push_back(actuator.encrypt(v));
  }
  for (const auto& y : hist.y) {
    for (auto v : y) {
      runtime::check_box(v, s.enc.box, "initial y_bar");
      check_ring(v, s.N, "initial y_bar");
    }
    y_init.push_back(sensor.encrypt(y));
  }
  runtime::EncryptedController<Evaluator> ctrl(std::move(eval), s.enc, std::move(u_init), std::move(y_init));
  auto lockstep = make_quantized(spec, s);

  RunResult res;
  res.mode = Mode::encrypted;
  res.trace.p = spec.plant.p();
  PlantSim plant(spec.plant, 1e3 * spec.fp.M);
  run_steps(spec.steps, [&](std::uint64_t t) {
    const StepTimer timer(opt.timing);
    std::vector<double> y = plant.output();
    const auto y_bar = quantize_output(y, s.enc);
    // The integer controller runs first so that a mis-sized ring surfaces as
    // PlaintextOverflow rather than as a wrapped decryption.
    const auto ref = lockstep.step(y_bar);
    lockstep.feedback(ref.u_q, y_bar);

    for (auto v : y_bar) check_ring(v, s.N, "y_bar");
    std::vector<Ct> cy = sensor.encrypt(y_bar);
    const Ct c = ctrl.step(cy);
    auto act = actuator.process(c);
    // Debug oracle: noise measured against the plaintext the integer
    // controller says c must carry.
    act.noise_budget_bits = client.noise_budget(c, ref.u_bar_prime);
    ctrl.feedback(std::move(act.fresh), std::move(cy));
    if (opt.assert_exact) {
      ++res.stats.exactness_checks;
      if (ref.u_bar_prime != act.u_bar_prime || ref.u_q != act.u_q)
        fail(ErrorCode::ExactnessViolated, "L*Dec(u) = " + format_double(act.u_q) + " (Dec " +
                                               std::to_string(act.u_bar_prime) + ") but the integer controller gives " +
                                               format_double(ref.u_q) + " (" + std::to_string(ref.u_bar_prime) + ")");
      if (!(act.noise_budget_bits > 0.0))
        fail(ErrorCode::ExactnessViolated, "noise budget exhausted (" + format_double(act.noise_budget_bits) + " bits)");
    }
    res.stats.min_noise_budget_bits = std::min(res.stats.min_noise_budget_bits, act.noise_budget_bits);
    plant.advance(act.u_q + spec.reference.at(t));
    res.trace.append(std::move(y), kNotRecorded, ref.u_q, act.u_q, act.u_bar_prime, act.noise_budget_bits,
                     timer.elapsed_us());
  });
  res.stats.fresh_inputs_consumed = ctrl.fresh_inputs_consumed();
  res.setup = std::move(s);
  return res;
}

}  // namespace detail

/// One closed-loop run. Deterministic given (spec, seed) unless timing is on.
/// Errors inside the loop carry the step index.
inline RunResult simulate(const LoopSpec& spec, const RunOptions& opt) {
  spec.validate();
  if (opt.mode == Mode::nominal) return detail::run_nominal(spec, opt);
  Setup s = prepare(spec, opt.certify && opt.mode == Mode::encrypted, opt.mode == Mode::encrypted);
  if (opt.mode == Mode::quantized) return detail::run_quantized(spec, opt, std::move(s));

  const std::uint64_t N = s.N;
  if (spec.backend.kind == BackendSpec::Kind::lwe) {
    const homcrypt::LweParams params{{spec.backend.n, N, spec.backend.noise_bound}, homcrypt::seed_from_u64(spec.seed)};
    const homcrypt::LweClient client = opt.key ? homcrypt::LweClient(params.pub, *opt.key) : homcrypt::LweClient(params);
    return detail::run_encrypted(spec, opt, std::move(s), homcrypt::LweEvaluator(params.pub), client);
  }
  const homcrypt::LeveledParams params{N, spec.backend.depth_cap};
  const homcrypt::LeveledClient client(params);
  return detail::run_encrypted(spec, opt, std::move(s), homcrypt::LeveledEvaluator(params), client);
}

struct Comparison {
  double max_abs_err = 0.0;
  std::size_t argmax = 0;
  std::vector<double> series;
};

/// Pointwise |a - b|. Steps where both sides are unrecorded count as equal.
inline Comparison compare(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    fail(ErrorCode::LengthMismatch,
         "traces have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " steps");
  Comparison c;
  c.series.reserve(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    double d = 0.0;
    if (std::isnan(a[t]) != std::isnan(b[t]))
      fail(ErrorCode::InvalidArgument, "channel is recorded in only one trace at step " + std::to_string(t));
    if (!std::isnan(a[t])) d = std::fabs(a[t] - b[t]);
    c.series.push_back(d);
    if (d > c.max_abs_err) {
      c.max_abs_err = d;
      c.argmax = t;
    }
  }
  return c;
}

inline Comparison compare(const Trace& a, std::string_view channel_a, const Trace& b, std::string_view channel_b) {
  return compare(a.channel(channel_a), b.channel(channel_b));
}

inline Comparison compare(const Trace& a, const Trace& b, std::string_view channel) {
  return compare(a, channel, b, channel);
}

/// The input actually applied to the plant in a run of the given mode.
inline std::string_view applied_channel(Mode m) {
  switch (m) {
    case Mode::nominal: return "u_nom";
    case Mode::quantized: return "u_q";
    case Mode::encrypted: return "u_enc";
  }
  return "u_nom";
}

struct SweepRow {
  double r = 0.0;
  double s = 0.0;
  std::uint64_t N = 0;
  double max_abs_err = kNotRecorded;
  std::size_t argmax = 0;
  bool aborted = false;
  std::string reason;
};

/// Nominal run once, then one quantized (or encrypted) run per r with s = r,
/// each row sizing N for its own r, seed = seed ^ row. Rows run in parallel;
/// a row that fails is marked aborted.
inline std::vector<SweepRow> sweep(const LoopSpec& base, const std::vector<double>& r_values,
                                   Mode mode = Mode::quantized) {
  if (r_values.empty()) fail(ErrorCode::InvalidArgument, "sweep needs at least one r");
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    if (!(r_values[i] > 0.0) || !std::isfinite(r_values[i]))
      fail(ErrorCode::InvalidArgument, "sweep steps must be positive");
    if (i > 0 && !(r_values[i] < r_values[i - 1]))
      fail(ErrorCode::InvalidArgument, "sweep steps must be strictly decreasing");
  }
  if (mode == Mode::nominal) fail(ErrorCode::InvalidArgument, "sweep compares a quantized or encrypted run to nominal");
  const Trace nominal = simulate(base, options(Mode::nominal)).trace;

  std::vector<std::future<SweepRow>> jobs;
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      SweepRow row;
      row.r = row.s = r_values[i];
      LoopSpec spec = base;
      spec.fp.r = spec.fp.s = r_values[i];
      spec.backend.N.reset();
      spec.seed = base.seed ^ static_cast<std::uint64_t>(i);
      try {
        const RunResult run = simulate(spec, options(mode));
        row.N = run.setup->N;
        const Comparison c = compare(nominal, "u_nom", run.trace, applied_channel(mode));
        row.max_abs_err = c.max_abs_err;
        row.argmax = c.argmax;
      } catch (const Error& e) {
        row.aborted = true;
        row.reason = e.what();
      }
      return row;
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

/// Each completed row at most `slack` times the previous completed row.
inline bool errors_non_increasing(const std::vector<SweepRow>& rows, double slack = 1.1) {
  const SweepRow* prev = nullptr;
  for (const auto& row : rows) {
    if (row.aborted) continue;
    if (prev && row.max_abs_err > slack * prev->max_abs_err) return false;
    prev = &row;
  }
  return true;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "r,s,N,max_abs_err,argmax,status\n";
  for (const auto& row : rows) {
    out += format_double(row.r) + "," + format_double(row.s) + "," + std::to_string(row.N) + "," +
           format_double(row.max_abs_err) + "," + std::to_string(row.argmax) + "," +
           (row.aborted ? "aborted" : "ok") + "\n";
  }
  return out;
}

}  // namespace encctl::simloop
