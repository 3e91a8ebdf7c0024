// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "encctl/cli/config.hpp"
#include "encctl/homcrypt/keyfile.hpp"

namespace encctl {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string output;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Outcome run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + quote(ENCCTL_BIN) + " " + args + " 2>&1";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const char* name) { return quote(std::string(ENCCTL_CONFIG_DIR) + "/" + name); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("encctl_cli_" + std::string(info->name()) + "_" + std::to_string(getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out(const std::string& sub = "") const { return quote((dir_ / sub).string()); }
  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path write_config(const std::string& name, const cli::RunConfig& cfg) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << cli::emit_config(cfg).dump(2);
    return p;
  }

  fs::path dir_;
};

TEST_F(Cli, ConvertScalarReport) {
  const Outcome r = run("convert --config " + config("scalar.json") + " --out " + out());
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string report = slurp(path("convert_report.txt"));
  for (const char* line : {"alpha[1] = 0.5\n", "beta[1][1] = 2\n", "g_int = 500 * u[1] + 2000 * y[1]\n",
                           "L = 1e-06\n", "required_capability = Additive\n", "verdict: CERTIFIED\n"})
    EXPECT_NE(report.find(line), std::string::npos) << line;
  EXPECT_TRUE(fs::exists(path("config.normalized.json")));
}

TEST_F(Cli, ConvertUnobservableReport) {
  const Outcome r = run("convert --config " + config("unobservable.json") + " --out " + out());
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string report = slurp(path("convert_report.txt"));
  EXPECT_NE(report.find("n' = 1\n"), std::string::npos);
  EXPECT_NE(report.find("dropped unobservable modes: 1\n"), std::string::npos);
}

TEST_F(Cli, ConvertQuadraticReport) {
  const Outcome r = run("convert --config " + config("quadratic.json") + " --out " + out());
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string report = slurp(path("convert_report.txt"));
  EXPECT_NE(report.find("g = 0.3 * u[1]^2 - 0.2 * u[2] + 1 * y[2]\n"), std::string::npos);
  EXPECT_NE(report.find("required_capability = Leveled(2)\n"), std::string::npos);
}

TEST_F(Cli, SimulateAssertExact) {
  const Outcome r = run("simulate --config " + config("linear_loop.json") +
                    " --mode encrypted --steps 10000 --assert-exact --out " + out());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(path("trace_encrypted.csv")));
  EXPECT_TRUE(fs::exists(path("summary_encrypted.txt")));
}

TEST_F(Cli, MisSizedModulusReportsOverflowWithStep) {
  const Outcome r = run("simulate --config " + config("linear_loop.json") +
                    " --mode encrypted --steps 100 --N 65536 --no-certify --out " + out());
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_NE(r.output.find("PlaintextOverflow"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("at step"), std::string::npos) << r.output;
}

TEST_F(Cli, CertificationFailureExitsTwo) {
  cli::RunConfig cfg = cli::load_config(std::string(ENCCTL_CONFIG_DIR) + "/scalar.json");
  cfg.backend.N = 1024;
  const fs::path p = write_config("small_n.json", cfg);
  EXPECT_EQ(run("certify --config " + quote(p.string())).code, 2);
  EXPECT_EQ(run("simulate --config " + quote(p.string()) + " --out " + out()).code, 2);
  EXPECT_EQ(run("certify --config " + config("scalar.json")).code, 0);
}

TEST_F(Cli, IoAndParseErrorsExitFour) {
  EXPECT_EQ(run("simulate --config " + out("missing.json")).code, 4);
  std::ofstream(path("bad.json")) << "{ \"controller\": ";
  EXPECT_EQ(run("convert --config " + out("bad.json")).code, 4);
  std::ofstream(path("no_m.json")) << R"({"controller": {"type": "linear", "A": [[0.5]], "B": [[1]], "C": [1]},
    "plant": {"type": "linear", "A": [[0.5]], "B": [1], "C": [[1]]}, "fixed_point": {"r": 0.01}})";
  EXPECT_EQ(run("convert --config " + out("no_m.json")).code, 4);
  EXPECT_EQ(run("frobnicate").code, 4);
}

TEST_F(Cli, SameSeedGivesIdenticalBytes) {
  for (const char* sub : {"a", "b"}) {
    const Outcome r = run("simulate --config " + config("linear_loop.json") + " --steps 2000 --out " + out(sub));
    ASSERT_EQ(r.code, 0) << r.output;
  }
  const std::string a = slurp(path("a/trace_encrypted.csv"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b/trace_encrypted.csv")));
}

TEST_F(Cli, CompareTraces) {
  for (const char* mode : {"quantized", "encrypted", "nominal"}) {
    const Outcome r = run("simulate --config " + config("linear_loop.json") + " --steps 1000 --mode " + mode +
                      " --out " + out());
    ASSERT_EQ(r.code, 0) << r.output;
  }
  const std::string enc = out("trace_encrypted.csv"), quant = out("trace_quantized.csv"),
                    nom = out("trace_nominal.csv");
  EXPECT_EQ(run("compare " + enc + " " + quant + " --channel u_enc --channel-b u_q --tolerance 0").code, 0);
  EXPECT_EQ(run("compare " + enc + " " + quant + " --channel ubar_prime --tolerance 0").code, 0);
  EXPECT_EQ(run("compare " + nom + " " + quant + " --channel u_nom --channel-b u_q --tolerance 1e-9").code, 3);
  EXPECT_EQ(run("compare " + nom + " " + quant + " --channel nope").code, 4);
}

TEST_F(Cli, SweepIsMonotone) {
  const Outcome r = run("sweep --config " + config("linear_loop.json") + " --steps 2000 --assert-monotone --out " + out());
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string csv = slurp(path("sweep.csv"));
  EXPECT_EQ(csv.rfind("r,s,N,max_abs_err,argmax,status\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(csv.find("aborted"), std::string::npos);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const Outcome r = run("convert --config " + config("scalar.json"), "ENCCTL_OUT_DIR=" + out("env"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(path("env/convert_report.txt")));
}

TEST_F(Cli, SecretKeyNeverReachesOutputs) {
  ASSERT_EQ(run("keygen --config " + config("scalar.json") + " --seed 99 --out " + out("key")).code, 0);
  const fs::path key_path = path("key/secret.key");
  const homcrypt::KeyFile kf = homcrypt::load_key(key_path.string());
  ASSERT_EQ(kf.key.s.size(), 1024u);

  const std::string args = " --config " + config("scalar.json") + " --out " + out("run");
  ASSERT_EQ(run("convert" + args).code, 0);
  ASSERT_EQ(run("certify" + args).code, 0);
  const Outcome sim = run("simulate" + args + " --assert-exact --key " + quote(key_path.string()));
  ASSERT_EQ(sim.code, 0) << sim.output;

  std::vector<std::string> outputs{sim.output};
  for (const auto& e : fs::directory_iterator(path("run"))) outputs.push_back(slurp(e.path()));
  ASSERT_GE(outputs.size(), 4u);
  for (const auto& text : outputs) {
    for (std::uint64_t w : kf.key.s) {
      std::string raw(8, '\0');
      for (int b = 0; b < 8; ++b) raw[static_cast<std::size_t>(b)] = static_cast<char>(w >> (8 * b));
      ASSERT_EQ(text.find(raw), std::string::npos);
      ASSERT_EQ(text.find(std::to_string(w)), std::string::npos);
      std::ostringstream hex;
      hex << std::hex << w;
      ASSERT_EQ(text.find(hex.str()), std::string::npos);
    }
  }
}

TEST_F(Cli, KeyFromOtherParametersIsRejected) {
  cli::RunConfig cfg = cli::load_config(std::string(ENCCTL_CONFIG_DIR) + "/scalar.json");
  cfg.backend.n = 512;
  const fs::path small = write_config("n512.json", cfg);
  ASSERT_EQ(run("keygen --config " + quote(small.string()) + " --out " + out()).code, 0);
  const Outcome r = run("simulate --config " + config("scalar.json") + " --key " + out("secret.key") + " --out " + out());
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_NE(r.output.find("BackendMismatch"), std::string::npos) << r.output;

  // The key file carries its N; one sized for a smaller controller fails
  // certification.
  ASSERT_EQ(run("keygen --config " + config("scalar.json") + " --out " + out()).code, 0);
  EXPECT_EQ(run("simulate --config " + config("linear_loop.json") + " --steps 10 --key " + out("secret.key") +
                " --out " + out())
                .code,
            2);
}

TEST(Config, RoundTripIsStable) {
  for (const char* name : {"linear_loop.json", "scalar.json", "unobservable.json", "quadratic.json"}) {
    const cli::RunConfig a = cli::load_config(std::string(ENCCTL_CONFIG_DIR) + "/" + name);
    const auto emitted = cli::emit_config(a);
    const cli::RunConfig b = cli::parse_config_text(emitted.dump());
    EXPECT_EQ(cli::emit_config(b), emitted) << name;
    EXPECT_EQ(emitted.at("fixed_point").at("s"), emitted.at("fixed_point").at("r")) << name;
  }
}

TEST(Config, DefaultsAreExplicit) {
  const cli::RunConfig c = cli::parse_config_text(
      R"({"controller": {"type": "history", "g": "0.5 u[1] + y[1]", "m": 1},
          "plant": {"type": "linear", "A": [[0.5]], "B": [1], "C": [[1]]},
          "fixed_point": {"M": 2}})");
  const auto j = cli::emit_config(c);
  EXPECT_EQ(j.at("fixed_point").at("r"), 1e-3);
  EXPECT_EQ(j.at("fixed_point").at("s"), 1e-3);
  EXPECT_EQ(j.at("backend").at("N"), "auto");
  EXPECT_EQ(j.at("steps"), 1000);
  EXPECT_EQ(j.at("mode"), "encrypted");
}

TEST(Config, ErrorsAreParseErrors) {
  for (const char* text : {"[]", "{}", R"({"controller": {"type": "linear"}})",
                           R"({"controller": {"type": "warp"}, "plant": {}, "fixed_point": {"M": 1}})"}) {
    try {
      cli::parse_config_text(text);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << text;
    }
  }
}

}  // namespace
}  // namespace encctl
