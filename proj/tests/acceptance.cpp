// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "encctl/cli/config.hpp"
#include "encctl/homcrypt/keyfile.hpp"
#include "encctl/homcrypt/wire.hpp"
#include "encctl/realization/canonical.hpp"
#include "encctl/simloop/simulate.hpp"
#include "support/random_systems.hpp"
#include "support/slp.hpp"

namespace encctl::acceptance {

bool controller_compiles_without_secret_key();

namespace {

using simloop::Mode;
using simloop::options;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

simloop::LoopSpec load_loop(const char* name, std::uint64_t steps) {
  cli::RunConfig cfg = cli::load_config(std::string(ENCCTL_CONFIG_DIR) + "/" + name);
  cfg.steps = steps;
  return cli::loop_spec(cfg, cli::convert(cfg.controller).io);
}

std::string sweep_summary(const std::vector<simloop::SweepRow>& rows) {
  std::string s;
  for (const auto& row : rows) {
    if (!s.empty()) s += ", ";
    s += "r=" + num(row.r) + ": " + (row.aborted ? "aborted" : num(row.max_abs_err));
  }
  return s;
}

bool sweep_converges(const std::vector<simloop::SweepRow>& rows) {
  for (const auto& row : rows)
    if (row.aborted) return false;
  return simloop::errors_non_increasing(rows, 1.1) && rows.back().max_abs_err * 10.0 <= rows.front().max_abs_err;
}

// 1. Exactness over a long horizon on the LWE backend.
Verdict exactness() {
  const auto spec = load_loop("linear_loop.json", 100000);
  auto opt = options(Mode::encrypted);
  opt.assert_exact = true;
  const auto t0 = std::chrono::steady_clock::now();
  const auto enc = simulate(spec, opt);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto quant = simulate(spec, options(Mode::quantized));

  const auto u_enc = enc.trace.channel("u_enc");
  const auto u_q = quant.trace.channel("u_q");
  const auto dec_enc = enc.trace.channel("ubar_prime");
  const auto dec_q = quant.trace.channel("ubar_prime");
  std::size_t mismatches = 0, nonpositive = 0;
  for (std::size_t t = 0; t < u_enc.size(); ++t) {
    if (u_enc[t] != u_q[t] || dec_enc[t] != dec_q[t]) ++mismatches;
    if (!(enc.trace.noise_budget_bits[t] > 0.0)) ++nonpositive;
  }
  const bool pass = enc.setup->certificate.ok() && u_enc.size() == 100000 && u_q.size() == 100000 &&
                    mismatches == 0 && nonpositive == 0 && seconds <= 60.0;
  return {pass, "N=2^" + std::to_string(std::countr_zero(enc.setup->N)) + ", T=" + std::to_string(u_enc.size()) +
                    ", mismatches " + std::to_string(mismatches) + ", min noise budget " +
                    num(enc.stats.min_noise_budget_bits) + " bits, " + num(seconds) + " s"};
}

// 2. Quantized-vs-nominal error shrinks along r = s.
Verdict convergence() {
  const auto rows = simloop::sweep(load_loop("linear_loop.json", 2000), {1e-1, 1e-2, 1e-3, 1e-4});
  return {sweep_converges(rows), sweep_summary(rows)};
}

// 3. IO recursion equals state-space simulation on random observable
// controllers.
Verdict realization_equivalence() {
  std::mt19937_64 rng(2026);
  double worst = 0.0;
  int trials = 0;
  for (; trials < 100; ++trials) {
    const auto rc = testing::random_observable(rng);
    const auto io = realization::realize(rc.ctrl);
    const auto ys = testing::random_inputs(rng, rc.ctrl.p(), 200);
    worst = std::max(worst, testing::max_abs_diff(realization::simulate_io(io, ys),
                                                  testing::direct_simulation(rc.ctrl, ys)));
  }
  return {worst <= 1e-9, std::to_string(trials) + " systems, max deviation " + num(worst)};
}

// 4. Decomposition with forced unobservable modes.
Verdict decomposition() {
  std::mt19937_64 rng(2027);
  double markov = 0.0, reduced = 0.0;
  int rank_errors = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto rc = testing::random_with_unobservable(rng);
    const auto dec = realization::observable_decomposition(rc.ctrl);
    if (dec.n_obs != rc.n_obs) {
      ++rank_errors;
      continue;
    }
    markov = std::max(markov, testing::max_markov_error(rc.ctrl, dec));
    const auto ys = testing::random_inputs(rng, rc.ctrl.p(), 200);
    reduced = std::max(reduced, testing::max_abs_diff(realization::simulate_reduced(dec, ys),
                                                      testing::direct_simulation(rc.ctrl, ys)));
  }
  return {rank_errors == 0 && markov <= 1e-8 && reduced <= 1e-9,
          "100 systems with n' < n, rank errors " + std::to_string(rank_errors) + ", Markov " + num(markov) +
              ", reduced vs full " + num(reduced)};
}

// 5. Quadratic canonical controller on the leveled backend.
Verdict nonlinear_path() {
  const cli::RunConfig cfg = cli::load_config(std::string(ENCCTL_CONFIG_DIR) + "/quadratic.json");
  const auto conv = cli::convert(cfg.controller);
  const auto& sys = *conv.canonical;
  const auto expected = parse_polynomial<double>("0.3 u[1]^2 - 0.2 u[2] + y[2]");
  const bool symbolic = normalized(conv.io.g.poly) == normalized(expected);

  std::mt19937_64 rng(2028);
  double real_dev = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto ys = testing::random_inputs(rng, 1, 100);
    for (auto& y : ys) y[0] *= 0.5;
    real_dev = std::max(real_dev, testing::max_abs_diff(realization::simulate_io(conv.io, ys),
                                                        realization::simulate_canonical(sys, ys)));
  }

  simloop::LoopSpec spec = cli::loop_spec(cfg, conv.io);
  auto opt = options(Mode::encrypted);
  opt.assert_exact = true;
  const auto enc = simulate(spec, opt);
  const auto quant = simulate(spec, options(Mode::quantized));
  const bool bit_equal = enc.trace.channel("u_enc") == quant.trace.channel("u_q") &&
                         enc.trace.channel("ubar_prime") == quant.trace.channel("ubar_prime");

  const auto rows = simloop::sweep(spec, {1e-1, 1e-2, 1e-3, 1e-4});
  const bool converges = sweep_converges(rows);
  return {symbolic && real_dev <= 1e-12 && bit_equal && converges,
          std::string("g ") + (symbolic ? "matches" : "differs") + ", recursion vs canonical " + num(real_dev) +
              ", encrypted " + (bit_equal ? "==" : "!=") + " quantized over " + std::to_string(spec.steps) +
              " steps (" + enc.setup->certificate.backend + "), sweep " + sweep_summary(rows)};
}

// 6. Crypto suite.
Verdict crypto() {
  using namespace homcrypt;
  std::vector<std::string> failures;

  const LweParams lp{{1024, std::uint64_t{1} << 20, 16}, seed_from_u64(2029)};
  const LweClient client(lp);
  const LweEvaluator ev(lp.pub);
  Prng rng(lp.seed, Stream::test);
  std::mt19937_64 pick(2029);
  const auto half = static_cast<std::int64_t>(lp.pub.N / 2);
  std::uniform_int_distribution<std::int64_t> msg(-half, half - 1);
  int roundtrip_errors = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::int64_t m = msg(pick);
    if (client.decrypt(client.encrypt(m, rng)) != m) ++roundtrip_errors;
  }
  if (roundtrip_errors) failures.push_back(std::to_string(roundtrip_errors) + " roundtrip errors");

  const auto lwe_slp = testing::run_programs(client, ev, lp.pub.N, false, 0, 2030);
  const LeveledParams vp{std::uint64_t{1} << 40, 2};
  const LeveledClient vclient(vp);
  const LeveledEvaluator vev(vp);
  const auto lev_slp = testing::run_programs(vclient, vev, vp.N, true, vp.depth_cap, 2031);
  if (lwe_slp.mismatches || lev_slp.mismatches || lwe_slp.checked == 0 || lev_slp.checked == 0)
    failures.push_back("straight-line program mismatches");

  const std::int64_t wrapped = client.decrypt(ev.add(client.encrypt(half - 1, rng), client.encrypt(1, rng)));
  const auto vhalf = static_cast<std::int64_t>(vp.N / 2);
  const std::int64_t vwrapped = vclient.decrypt(vev.add(vclient.encrypt(vhalf - 1, rng), vclient.encrypt(1, rng)));
  if (wrapped != -half || vwrapped != -vhalf) failures.push_back("wrap-around");

  int serial_errors = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = i % 2 ? client.encrypt(msg(pick), rng) : ev.scalar_mul(BigInt(i), client.encrypt(msg(pick), rng));
    const auto bytes = serialize(c);
    const auto back = deserialize_as<LweCiphertext>(bytes);
    if (!(back == c) || serialize(back) != bytes) ++serial_errors;
    const auto vc = vev.mul(vclient.encrypt(i, rng), vclient.encrypt(-i, rng));
    if (!(deserialize_as<LeveledCiphertext>(serialize(vc)) == vc)) ++serial_errors;
  }
  const auto key = keygen(lp);
  const auto kf = deserialize_key(serialize_key(key, lp.pub.N));
  if (!(kf.key == key) || serialize_key(kf.key, kf.params.N) != serialize_key(key, lp.pub.N)) ++serial_errors;
  if (serial_errors) failures.push_back(std::to_string(serial_errors) + " serialization errors");

  std::string detail = "10^4 roundtrips, LWE programs " + std::to_string(lwe_slp.checked) + " checked / " +
                       std::to_string(lwe_slp.skipped) + " budget-exhausted, leveled programs " +
                       std::to_string(lev_slp.checked) + " checked, wrap-around to " + std::to_string(wrapped) +
                       ", serialization bit-exact";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// 7. Freshness and key separation.

struct AuditedCt {
  homcrypt::LweCiphertext inner;
  bool fresh = false;
  std::uint64_t id = 0;
};

/// Provenance of every ciphertext in a run. An evaluation ends when the
/// actuator decrypts its output.
struct Audit {
  std::uint64_t next_id = 1;
  std::uint64_t evaluation = 0;
  std::unordered_set<std::uint64_t> encrypted;
  std::unordered_map<std::uint64_t, std::uint64_t> evaluated_in;
  std::uint64_t fresh_operands = 0;
  std::uint64_t intermediate_operands = 0;  // results of the same evaluation
  std::uint64_t stale_operands = 0;         // results of an earlier evaluation
  std::uint64_t unknown_operands = 0;

  void operand(const AuditedCt& c) {
    if (encrypted.contains(c.id)) {
      ++(c.fresh ? fresh_operands : unknown_operands);
      return;
    }
    const auto it = evaluated_in.find(c.id);
    if (it == evaluated_in.end())
      ++unknown_operands;
    else
      ++(it->second == evaluation ? intermediate_operands : stale_operands);
  }

  AuditedCt result(homcrypt::LweCiphertext c) {
    AuditedCt out{std::move(c), false, next_id++};
    evaluated_in[out.id] = evaluation;
    return out;
  }
};

class AuditingEvaluator {
 public:
  using ciphertext_type = AuditedCt;

  AuditingEvaluator(homcrypt::LweEvaluator inner, std::shared_ptr<Audit> audit)
      : inner_(std::move(inner)), audit_(std::move(audit)) {}

  AuditedCt add(const AuditedCt& x, const AuditedCt& y) const {
    audit_->operand(x);
    audit_->operand(y);
    return audit_->result(inner_.add(x.inner, y.inner));
  }
  AuditedCt scalar_mul(const BigInt& k, const AuditedCt& c) const {
    audit_->operand(c);
    return audit_->result(inner_.scalar_mul(k, c.inner));
  }
  AuditedCt mul(const AuditedCt& x, const AuditedCt& y) const {
    audit_->operand(x);
    audit_->operand(y);
    return audit_->result(inner_.mul(x.inner, y.inner));
  }
  AuditedCt constant(const BigInt& k) const { return audit_->result(inner_.constant(k)); }
  Capability capability() const { return inner_.capability(); }
  std::uint64_t plaintext_modulus() const { return inner_.plaintext_modulus(); }

 private:
  homcrypt::LweEvaluator inner_;
  std::shared_ptr<Audit> audit_;
};

class AuditingClient {
 public:
  using ciphertext_type = AuditedCt;

  AuditingClient(const homcrypt::LweClient& inner, std::shared_ptr<Audit> audit)
      : inner_(&inner), audit_(std::move(audit)) {}

  AuditedCt encrypt(std::int64_t m, homcrypt::Prng& rng) const {
    AuditedCt c{inner_->encrypt(m, rng), true, audit_->next_id++};
    audit_->encrypted.insert(c.id);
    return c;
  }
  std::int64_t decrypt(const AuditedCt& c) const {
    ++audit_->evaluation;
    return inner_->decrypt(c.inner);
  }
  double noise_budget(const AuditedCt& c) const { return inner_->noise_budget(c.inner); }
  double noise_budget(const AuditedCt& c, std::int64_t m) const { return inner_->noise_budget(c.inner, m); }
  std::uint64_t plaintext_modulus() const { return inner_->plaintext_modulus(); }

 private:
  const homcrypt::LweClient* inner_;
  std::shared_ptr<Audit> audit_;
};

static_assert(homcrypt::HomomorphicEvaluator<AuditingEvaluator>);
static_assert(homcrypt::EncryptionClient<AuditingClient>);

std::set<std::string> include_closure(const std::string& root) {
  const std::regex inc(R"(^\s*#\s*include\s*"([^"]+)\")");
  std::set<std::string> seen;
  std::vector<std::string> todo{root};
  while (!todo.empty()) {
    const std::string h = todo.back();
    todo.pop_back();
    if (!seen.insert(h).second) continue;
    std::ifstream in(std::filesystem::path(ENCCTL_INCLUDE_DIR) / h);
    if (!in) fail(ErrorCode::IoError, "cannot read " + h);
    std::string line;
    std::smatch m;
    while (std::getline(in, line))
      if (std::regex_search(line, m, inc)) todo.push_back(m[1]);
  }
  return seen;
}

Verdict freshness() {
  const bool compiles = controller_compiles_without_secret_key();
  const auto closure = include_closure("encctl/runtime/encrypted.hpp");
  const bool separated = !closure.contains("encctl/homcrypt/secret.hpp") &&
                         !closure.contains("encctl/homcrypt/keyfile.hpp");

  const auto spec = load_loop("linear_loop.json", 10000);
  simloop::Setup setup = simloop::prepare(spec, true);
  const homcrypt::LweParams params{{spec.backend.n, setup.N, spec.backend.noise_bound},
                                   homcrypt::seed_from_u64(spec.seed)};
  const homcrypt::LweClient client(params);
  auto audit = std::make_shared<Audit>();
  auto opt = options(Mode::encrypted);
  opt.assert_exact = true;
  const auto res = simloop::detail::run_encrypted(spec, opt, std::move(setup),
                                                  AuditingEvaluator(homcrypt::LweEvaluator(params.pub), audit),
                                                  AuditingClient(client, audit));

  // The audit itself must notice a reused output.
  auto probe = std::make_shared<Audit>();
  const AuditingEvaluator pev(homcrypt::LweEvaluator(params.pub), probe);
  const AuditingClient pclient(client, probe);
  homcrypt::Prng rng(params.seed, homcrypt::Stream::test);
  const AuditedCt out = pev.add(pclient.encrypt(1, rng), pclient.encrypt(2, rng));
  pclient.decrypt(out);
  pev.add(out, pclient.encrypt(3, rng));
  const bool audit_works = probe->stale_operands == 1;

  const bool pass = compiles && separated && audit_works && audit->evaluation == 10000 && audit->stale_operands == 0 &&
                    audit->unknown_operands == 0 && audit->fresh_operands == res.stats.fresh_inputs_consumed &&
                    res.stats.exactness_checks == 10000;
  return {pass, std::string("static check ") + (compiles && separated ? "ok" : "failed") + ", " +
                    std::to_string(audit->evaluation) + " evaluations, " + std::to_string(audit->fresh_operands) +
                    " fresh operands, " + std::to_string(audit->stale_operands) + " stale, " +
                    std::to_string(audit->unknown_operands) + " unknown, " +
                    std::to_string(audit->intermediate_operands) + " same-evaluation intermediates, audit probe " +
                    (audit_works ? "detects reuse" : "missed reuse")};
}

}  // namespace
}  // namespace encctl::acceptance

int main() {
  using namespace encctl::acceptance;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"1 exactness (LWE, 1e5 steps)", exactness},
      {"2 convergence sweep (linear loop)", convergence},
      {"3 IO realization equivalence", realization_equivalence},
      {"4 observable decomposition", decomposition},
      {"5 nonlinear path (leveled)", nonlinear_path},
      {"6 crypto suite", crypto},
      {"7 freshness and key separation", freshness},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("aborted: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s criterion %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
