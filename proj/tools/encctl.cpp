// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

// encctl: convert, certify and simulate encrypted controllers.
//
// Exit codes: 0 success, 2 certification failure, 3 runtime assertion
// failure, 4 I/O or parse error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "encctl/cli/config.hpp"
#include "encctl/error.hpp"
#include "encctl/fixedpoint.hpp"
#include "encctl/homcrypt/certify.hpp"
#include "encctl/homcrypt/keyfile.hpp"
#include "encctl/homcrypt/secret.hpp"
#include "encctl/simloop/simulate.hpp"
#include "encctl/simloop/trace.hpp"

namespace fs = std::filesystem;
using namespace encctl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCertification = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitIo = 4;

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::CertificationFailed: return kExitCertification;
    case ErrorCode::IoError:
    case ErrorCode::ParseError: return kExitIo;
    default: return kExitRuntime;
  }
}

std::string hint(ErrorCode c) {
  switch (c) {
    case ErrorCode::PlaintextOverflow: return "enlarge N (or leave it on auto) or shrink M / r";
    case ErrorCode::SignalBoundViolated: return "raise fixed_point.M or check closed-loop stability";
    case ErrorCode::PlantDiverged: return "the closed loop is unstable for this configuration";
    case ErrorCode::CapabilityExceeded:
    case ErrorCode::DepthExceeded: return "use the leveled backend or raise depth_cap";
    case ErrorCode::CertificationFailed: return "see the certification report (encctl certify)";
    case ErrorCode::HistoryNotDerivable: return "start the canonical system from z0 = 0";
    case ErrorCode::ExpansionBudgetExceeded: return "the recursion is too large to expand; reduce n' or the degree";
    case ErrorCode::NoObservableDynamics: return "u does not depend on the controller state";
    case ErrorCode::DegenerateController: return "the controller output is constant";
    default: return "";
  }
}

struct Context {
  std::string config_path;
  std::string out_dir;
};

fs::path output_dir(const std::string& flag) {
  fs::path dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("ENCCTL_OUT_DIR");
    dir = env && *env ? fs::path(env) : fs::path(".");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::IoError, "write to " + path.string() + " failed");
}

std::string fmt(double v) { return simloop::format_double(v); }

std::string certificate_text(const homcrypt::Certificate& c) {
  std::ostringstream o;
  o << "backend: " << c.backend << "\n";
  o << "N: " << c.N << "\n";
  o << "required N: " << c.required_N.str() << "\n";
  o << "plaintext margin bits: " << fmt(c.plaintext_margin_bits) << "\n";
  if (c.backend == "lwe") {
    o << "worst-case noise: " << c.worst_case_noise.str() << "\n";
    o << "noise limit q/(2N): " << c.noise_limit.str() << "\n";
    o << "noise margin bits: " << fmt(c.noise_margin_bits) << "\n";
  }
  o << "capability: " << (c.capability_ok ? "ok" : "insufficient") << "\n";
  for (const auto& p : c.problems) o << "problem: " << p << "\n";
  o << "verdict: " << (c.ok() ? "CERTIFIED" : "REJECTED") << "\n";
  return o.str();
}

/// Certification without aborting, for reports.
struct Prepared {
  cli::RunConfig cfg;
  cli::Conversion conv;
  simloop::LoopSpec spec;
  simloop::Setup setup;
};

Prepared prepare(const std::string& config_path, bool strict) {
  Prepared p;
  p.cfg = cli::load_config(config_path);
  p.conv = cli::convert(p.cfg.controller);
  p.spec = cli::loop_spec(p.cfg, p.conv.io);
  p.setup = simloop::prepare(p.spec, strict);
  return p;
}

std::string convert_report(const Prepared& p) {
  std::ostringstream o;
  const auto& io = p.conv.io;
  const auto& enc = p.setup.enc;
  if (const auto& d = p.conv.decomposition) {
    o << "[decomposition]\n";
    o << "n = " << d->n << "\n";
    o << "n' = " << d->n_obs << "\n";
    if (d->dropped_modes() > 0) o << "dropped unobservable modes: " << d->dropped_modes() << "\n";
    o << "condition number of T = " << fmt(d->condition_number) << "\n";
    for (int i = 0; i < d->n_obs; ++i) o << "a[" << i + 1 << "] = " << fmt(d->char_poly(i)) << "\n";
    for (const auto& w : d->warnings) o << "warning: " << w << "\n";
    o << "\n[coefficients]\n";
    for (const auto& t : io.g.poly.terms) {
      const auto& [v, k] = t.powers.front();
      if (v.kind == VarKind::u) o << "alpha[" << v.index << "] = " << fmt(t.coeff) << "\n";
      else if (v.index == 0) o << "D[" << v.component << "] = " << fmt(t.coeff) << "\n";
      else o << "beta[" << v.index << "][" << v.component << "] = " << fmt(t.coeff) << "\n";
    }
    o << "\n";
  }
  if (p.conv.canonical) o << "[canonical]\nn' = " << p.conv.canonical->n << "\n\n";
  o << "[recursion]\n";
  o << "m = " << io.g.m << "\n";
  o << "p = " << io.g.p << "\n";
  o << "g = " << to_inline_string(io.g.poly) << "\n";
  for (std::size_t i = 0; i < io.u_init.size(); ++i) {
    o << "u(-" << i + 1 << ") = " << fmt(io.u_init[i]) << "\n";
    for (std::size_t k = 0; k < io.y_init[i].size(); ++k)
      o << "y(-" << i + 1 << ")[" << k + 1 << "] = " << fmt(io.y_init[i][k]) << "\n";
  }
  o << "\n[encoding]\n";
  o << "r = " << fmt(enc.params.r) << "\n";
  o << "s = " << fmt(enc.params.s) << "\n";
  o << "M = " << fmt(enc.params.M) << "\n";
  o << "L = " << fmt(enc.L) << "\n";
  o << "g_int = " << to_inline_string(enc.int_poly) << "\n";
  o << "box = " << enc.box << "\n";
  o << "plaintext_bound = " << enc.plaintext_bound.str() << "\n";
  o << "required N = " << fixedpoint::required_plaintext_modulus(enc).str() << "\n";
  o << "required_capability = " << enc.required_capability.to_string() << "\n";
  o << "error bound = " << fmt(enc.error_bound.total()) << " (coefficients " << fmt(enc.error_bound.coefficient)
    << ", signals " << fmt(enc.error_bound.input) << ")\n";
  o << "\n[certification]\n" << certificate_text(p.setup.certificate);
  return o.str();
}

int cmd_convert(const Context& ctx) {
  const Prepared p = prepare(ctx.config_path, false);
  const std::string report = convert_report(p);
  std::cout << report;
  const fs::path dir = output_dir(ctx.out_dir);
  write_text(dir / "convert_report.txt", report);
  write_text(dir / "config.normalized.json", cli::emit_config(p.cfg).dump(2) + "\n");
  return kExitOk;
}

int cmd_certify(const Context& ctx) {
  const Prepared p = prepare(ctx.config_path, false);
  const std::string text = certificate_text(p.setup.certificate);
  std::cout << text;
  if (!ctx.out_dir.empty()) write_text(output_dir(ctx.out_dir) / "certificate.txt", text);
  return p.setup.certificate.ok() ? kExitOk : kExitCertification;
}

int cmd_keygen(const Context& ctx, std::optional<std::uint64_t> seed) {
  const Prepared p = prepare(ctx.config_path, false);
  if (p.cfg.backend.kind != simloop::BackendSpec::Kind::lwe)
    fail(ErrorCode::InvalidArgument, "the leveled reference backend has no key");
  const homcrypt::LweParams params{{p.cfg.backend.n, p.setup.N, p.cfg.backend.noise_bound},
                                   homcrypt::seed_from_u64(seed.value_or(p.cfg.seed))};
  const homcrypt::SecretKey sk = homcrypt::keygen(params);
  const fs::path path = output_dir(ctx.out_dir) / "secret.key";
  homcrypt::save_key(path.string(), sk, params.pub.N);
  std::cout << "wrote " << path.string() << " (n = " << params.pub.n << ", N = " << params.pub.N << ")\n";
  return kExitOk;
}

struct SimulateFlags {
  std::optional<std::string> mode;
  std::optional<std::uint64_t> steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> N;
  std::string key;
  bool assert_exact = false;
  bool no_certify = false;
  bool timing = false;
};

int cmd_simulate(const Context& ctx, const SimulateFlags& f) {
  cli::RunConfig cfg = cli::load_config(ctx.config_path);
  if (f.mode) cfg.mode = simloop::parse_mode(*f.mode);
  if (f.steps) cfg.steps = *f.steps;
  if (f.seed) cfg.seed = *f.seed;
  if (f.N) cfg.backend.N = *f.N;
  const cli::Conversion conv = cli::convert(cfg.controller);
  simloop::LoopSpec spec = cli::loop_spec(cfg, conv.io);

  simloop::RunOptions opt;
  opt.mode = cfg.mode;
  opt.assert_exact = f.assert_exact;
  opt.certify = !f.no_certify;
  opt.timing = f.timing;
  if (!f.key.empty()) {
    homcrypt::KeyFile kf = homcrypt::load_key(f.key);
    if (cfg.backend.kind != simloop::BackendSpec::Kind::lwe)
      fail(ErrorCode::BackendMismatch, "a key file applies to the LWE backend only");
    if (kf.params.n != cfg.backend.n)
      fail(ErrorCode::BackendMismatch, "key dimension " + std::to_string(kf.params.n) + " differs from backend n = " +
                                           std::to_string(cfg.backend.n));
    spec.backend.N = kf.params.N;
    opt.key = std::move(kf.key);
  }

  const simloop::RunResult res = simloop::simulate(spec, opt);
  const fs::path dir = output_dir(ctx.out_dir);
  const std::string mode = simloop::to_string(res.mode);
  simloop::write_trace(res.trace, (dir / ("trace_" + mode + ".csv")).string());

  std::ostringstream o;
  o << "mode: " << mode << "\n";
  o << "steps: " << res.trace.size() << "\n";
  o << "seed: " << spec.seed << "\n";
  const auto applied = res.trace.channel(simloop::applied_channel(res.mode));
  double umax = 0.0, ymax = 0.0;
  for (double u : applied) umax = std::max(umax, std::fabs(u));
  for (const auto& y : res.trace.y)
    for (double v : y) ymax = std::max(ymax, std::fabs(v));
  o << "max |u|: " << fmt(umax) << "\n";
  o << "max |y|: " << fmt(ymax) << "\n";
  o << "M: " << fmt(spec.fp.M) << "\n";
  if (res.setup) {
    o << "L: " << fmt(res.setup->enc.L) << "\n";
    o << "N: " << res.setup->N << "\n";
    o << "plaintext margin bits: " << fmt(res.setup->certificate.plaintext_margin_bits) << "\n";
  }
  if (res.mode == simloop::Mode::encrypted) {
    o << "noise margin bits (certified): " << fmt(res.setup->certificate.noise_margin_bits) << "\n";
    o << "min noise budget bits (observed): " << fmt(res.stats.min_noise_budget_bits) << "\n";
    o << "fresh inputs consumed: " << res.stats.fresh_inputs_consumed << "\n";
    const auto cmp = simloop::compare(res.trace, "u_q", res.trace, "u_enc");
    o << "max |u_enc - u_q|: " << fmt(cmp.max_abs_err) << "\n";
    if (f.assert_exact) o << "exactness checks passed: " << res.stats.exactness_checks << "\n";
  }
  const std::string summary = o.str();
  write_text(dir / ("summary_" + mode + ".txt"), summary);
  std::cout << summary;
  return kExitOk;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& channel,
                const std::string& channel_b, std::optional<double> tolerance) {
  const simloop::Trace a = simloop::read_trace(a_path);
  const simloop::Trace b = simloop::read_trace(b_path);
  // A bad channel name is a usage error, not a runtime failure.
  auto pick = [](const simloop::Trace& t, const std::string& name) {
    try {
      return t.channel(name);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidArgument) throw;
      fail(ErrorCode::ParseError, e.detail());
    }
  };
  const auto c = simloop::compare(pick(a, channel), pick(b, channel_b.empty() ? channel : channel_b));
  std::cout << "steps: " << c.series.size() << "\n";
  std::cout << "max_abs_err: " << fmt(c.max_abs_err) << "\n";
  std::cout << "argmax: " << c.argmax << "\n";
  if (tolerance && c.max_abs_err > *tolerance) {
    std::cerr << "error: max_abs_err " << fmt(c.max_abs_err) << " exceeds tolerance " << fmt(*tolerance) << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_sweep(const Context& ctx, std::vector<double> r_values, std::optional<std::string> mode,
              std::optional<std::uint64_t> steps, std::optional<std::uint64_t> seed, bool assert_monotone) {
  cli::RunConfig cfg = cli::load_config(ctx.config_path);
  if (steps) cfg.steps = *steps;
  if (seed) cfg.seed = *seed;
  if (r_values.empty()) r_values = cfg.sweep_r;
  const simloop::Mode m = mode ? simloop::parse_mode(*mode) : simloop::Mode::quantized;
  const cli::Conversion conv = cli::convert(cfg.controller);
  const simloop::LoopSpec spec = cli::loop_spec(cfg, conv.io);
  const auto rows = simloop::sweep(spec, r_values, m);
  const std::string csv = simloop::sweep_csv(rows);
  write_text(output_dir(ctx.out_dir) / "sweep.csv", csv);
  std::cout << csv;
  for (const auto& row : rows)
    if (row.aborted) std::cerr << "row r=" << fmt(row.r) << " aborted: " << row.reason << "\n";
  if (assert_monotone) {
    const simloop::SweepRow* first = nullptr;
    const simloop::SweepRow* last = nullptr;
    for (const auto& row : rows)
      if (!row.aborted) {
        if (!first) first = &row;
        last = &row;
      }
    const bool ok = first && simloop::errors_non_increasing(rows) && last->max_abs_err < first->max_abs_err;
    if (!ok) {
      std::cerr << "error: sweep errors are not decreasing\n";
      return kExitRuntime;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"encctl: encrypted polynomial controllers without bootstrapping"};
  app.require_subcommand(1);
  Context ctx;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", ctx.config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", ctx.out_dir, "output directory (default: $ENCCTL_OUT_DIR or .)");
  };

  auto* convert = app.add_subcommand("convert", "realize and encode the controller; write a report");
  add_common(convert);

  auto* certify = app.add_subcommand("certify", "check plaintext range, capability and noise");
  add_common(certify);

  auto* keygen = app.add_subcommand("keygen", "write an LWE secret key file");
  add_common(keygen);
  std::optional<std::uint64_t> keygen_seed;
  keygen->add_option("--seed", keygen_seed, "key seed (default: config seed)");

  auto* simulate = app.add_subcommand("simulate", "run the closed loop and write a trace");
  add_common(simulate);
  SimulateFlags sf;
  simulate->add_option("--mode", sf.mode, "nominal | quantized | encrypted");
  simulate->add_option("--steps", sf.steps, "horizon");
  simulate->add_option("--seed", sf.seed, "seed");
  simulate->add_option("--N", sf.N, "override the plaintext modulus");
  simulate->add_option("--key", sf.key, "LWE secret key file from keygen")->check(CLI::ExistingFile);
  simulate->add_flag("--assert-exact", sf.assert_exact, "check L*Dec(u) against the integer controller every step");
  simulate->add_flag("--no-certify", sf.no_certify, "run even if certification fails");
  simulate->add_flag("--timing", sf.timing, "record per-step wall-clock time");

  auto* compare = app.add_subcommand("compare", "maximum absolute difference of two trace channels");
  std::string trace_a, trace_b, channel, channel_b;
  std::optional<double> tolerance;
  compare->add_option("a", trace_a, "first trace CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("b", trace_b, "second trace CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("--channel", channel, "channel of the first trace")->required();
  compare->add_option("--channel-b", channel_b, "channel of the second trace (default: same)");
  compare->add_option("--tolerance", tolerance, "fail with exit 3 above this error");

  auto* sweep = app.add_subcommand("sweep", "quantization-step sweep against the nominal loop");
  add_common(sweep);
  std::vector<double> r_values;
  std::optional<std::string> sweep_mode;
  std::optional<std::uint64_t> sweep_steps, sweep_seed;
  bool assert_monotone = false;
  sweep->add_option("--r", r_values, "decreasing quantization steps (s = r)")->delimiter(',');
  sweep->add_option("--mode", sweep_mode, "quantized | encrypted");
  sweep->add_option("--steps", sweep_steps, "horizon");
  sweep->add_option("--seed", sweep_seed, "seed");
  sweep->add_flag("--assert-monotone", assert_monotone, "fail unless errors decrease along the sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitIo;
  }

  try {
    if (*convert) return cmd_convert(ctx);
    if (*certify) return cmd_certify(ctx);
    if (*keygen) return cmd_keygen(ctx, keygen_seed);
    if (*simulate) return cmd_simulate(ctx, sf);
    if (*compare) return cmd_compare(trace_a, trace_b, channel, channel_b, tolerance);
    if (*sweep) return cmd_sweep(ctx, r_values, sweep_mode, sweep_steps, sweep_seed, assert_monotone);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (const std::string h = hint(e.code()); !h.empty()) std::cerr << "hint: " << h << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
