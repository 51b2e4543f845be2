#include "dwell/config.hpp"

#include <cmath>
#include <fstream>

#include "doctest.h"

using namespace dwell;

TEST_CASE("ini parsing: sections, comments, malformed lines") {
  const auto m = parse_ini("# comment\n[system]\nhbar = 0.5\n\n[run]\npreset= tunneling\n");
  CHECK(m.at("system.hbar") == "0.5");
  CHECK(m.at("run.preset") == "tunneling");
  CHECK_THROWS_AS(parse_ini("[system\nm=1\n"), config_error);
  CHECK_THROWS_AS(parse_ini("[run]\njust a line\n"), config_error);
  CHECK_THROWS_AS(parse_ini("= 3\n"), config_error);
}

TEST_CASE("config resolution: preset expansion and field overrides") {
  const auto cfg = RunConfig::resolve(parse_ini("[run]\npreset = fig1a\n[initial]\nstate = island\n"));
  CHECK(cfg.sys.s == 1.0);
  CHECK(cfg.initial.x0 == doctest::Approx(-3.7));
  CHECK(cfg.initial.sigma_p == doctest::Approx(1.0));

  // overrides win over the preset
  const auto cfg2 = RunConfig::resolve(parse_ini("[run]\npreset = fig1a\n"),
                                       {"system.s=2.5", "bath.D=1e-3", "grid.nx=256"});
  CHECK(cfg2.sys.s == doctest::Approx(2.5));
  CHECK(cfg2.bath.D == doctest::Approx(1e-3));
  CHECK(cfg2.grid.nx == 256);

  // field-level validation failures carry the field name
  try {
    RunConfig::resolve(parse_ini("[system]\nhbar = abc\n"));
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("system.hbar") != std::string::npos);
  }
  CHECK_THROWS_AS(RunConfig::resolve(parse_ini("[initial]\nstate = nowhere\n")), config_error);
  CHECK_THROWS_AS(RunConfig::resolve(parse_ini("[run]\npreset = bogus\n")), config_error);
  CHECK_THROWS_AS(RunConfig::resolve(parse_ini("[grid]\nnx = 100\n")), grid_error);
}

TEST_CASE("prescribed initial entropy inflates the widths at fixed aspect") {
  const auto cfg = RunConfig::resolve(parse_ini("[run]\npreset = fig9\n[initial]\nentropy = 4\n"));
  const double g = std::exp(2.0);  // e^{H0/2}
  CHECK(cfg.initial.sigma_x == doctest::Approx(std::sqrt(0.05) * g));
  CHECK(cfg.initial.sigma_p == doctest::Approx(std::sqrt(0.05) * g));
  // purity of that Gaussian is e^{-H0}
  const double purity = cfg.sys.hbar / (2.0 * cfg.initial.sigma_x * cfg.initial.sigma_p);
  CHECK(-std::log(purity) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("manifest records the fully resolved configuration") {
  const auto cfg = RunConfig::resolve(parse_ini("[run]\npreset = tunneling\n"));
  const std::string man = manifest_json(cfg, {{"status", "ok"}});
  CHECK(man.find("\"system.hbar\": \"1\"") != std::string::npos);
  CHECK(man.find("\"run.preset\": \"tunneling\"") != std::string::npos);
  CHECK(man.find("\"status\": \"ok\"") != std::string::npos);
  CHECK(man.find(kVersion) != std::string::npos);

  // all preset numbers expand into explicit keys
  const auto flat = cfg.flatten();
  CHECK(flat.count("system.b") == 1);
  CHECK(flat.count("initial.sigma_x") == 1);
  CHECK(flat.count("run.seed") == 1);
}

#ifdef __linux__
#include <cstdlib>

TEST_CASE("rerunning a pipeline reproduces its outputs bit-identically") {
  // the binary sits next to the test tree: build/tools/dwell
  const std::string exe = "../tools/dwell";
  if (!std::ifstream(exe).good()) {
    MESSAGE("dwell binary not found; skipping");
    return;
  }
  const std::string cmd = exe +
      " poincare --preset fig1a --state sea --seeds 16 --sections 40 --out det_run";
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  REQUIRE(std::system((cmd + "1 > /dev/null 2>&1").c_str()) == 0);
  REQUIRE(std::system((cmd + "2 > /dev/null 2>&1").c_str()) == 0);
  const std::string a = slurp("det_run1/poincare.csv");
  const std::string b = slurp("det_run2/poincare.csv");
  REQUIRE(!a.empty());
  CHECK(a == b);
  CHECK(slurp("det_run1/manifest.json") == slurp("det_run2/manifest.json"));
}
#endif
