// SPDX-License-Identifier: Apache-2.0

#include <unistd.h>

#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hsqkd/cli.hpp"

using namespace hsqkd;
using namespace hsqkd::cli;

namespace {

ExperimentConfig config_from(const std::string& text, const std::string& origin = "test.cfg") {
  std::istringstream in(text);
  return parse_config(in, origin);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("hsqkd_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

const char* kBasicSweep = R"(
# reference no-decoy sweep
[source]
kind = mhps
m = 4

[channel]
loss_db = 0:10:5

[protocol]
type = no_decoy

[output]
label = demo
)";

}  // namespace

TEST_CASE("config parsing fills the reference defaults") {
  const auto cfg = config_from(kBasicSweep);
  CHECK(cfg.source.kind == SourceKind::MHPS);
  CHECK(cfg.source.m == 4);
  CHECK(cfg.channel.visibility == 0.99);
  CHECK(cfg.channel.eta_b == 0.25);
  CHECK(cfg.channel.t_b == 1.0);
  CHECK(cfg.channel.p_dark == 2e-7);
  CHECK(cfg.f_ec == 1.05);
  CHECK(cfg.losses == std::vector<double>{0.0, 5.0, 10.0});
  CHECK(cfg.label == "demo");
  CHECK(cfg.csv_path == "demo.csv");
}

TEST_CASE("config parsing rejects malformed input") {
  const auto code_of = [](const std::string& text) {
    try {
      config_from(text);
    } catch (const error& e) {
      return e.code();
    }
    FAIL("expected a parse error");
    return errc::config_parse;
  };

  CHECK(code_of("[source]\nkind = tachyon\n") == errc::config_parse);
  CHECK(code_of("[source]\nkind = mhps\nwarp = 9\n") == errc::config_parse);
  CHECK(code_of("[warp]\nspeed = 9\n") == errc::config_parse);
  CHECK(code_of("kind = mhps\n") == errc::config_parse);
  CHECK(code_of("[source]\nkind = mhps\nkind = wcs\n") == errc::config_parse);
  CHECK(code_of("[source]\nkind = wcs\n[protocol]\ntype = passive_decoy\n") ==
        errc::config_parse);
  CHECK(code_of("[source]\nkind = smhps\nm = 3\neta = 0.7\ngamma = 0.5\n") ==
        errc::config_parse);
  CHECK(code_of("[source]\nkind = mhps\nm = 1.5\n") == errc::config_parse);
}

TEST_CASE("loss grids parse as ranges and lists") {
  auto cfg = config_from("[source]\nkind = wcs\n[channel]\nloss_db = 1,3,9\n");
  CHECK(cfg.losses == std::vector<double>{1.0, 3.0, 9.0});
  cfg = config_from("[source]\nkind = wcs\n[channel]\nloss_db = 0:2:0.5\n");
  CHECK(cfg.losses.size() == 5);
  CHECK_THROWS_AS(config_from("[source]\nkind = wcs\n[channel]\nloss_db = 5:1:1\n"), error);
}

TEST_CASE("scientific serialization uses 12 significant digits") {
  CHECK(format_sci(0.1) == "1.00000000000e-01");
  CHECK(format_sci(3.1622776601683794e-6) == "3.16227766017e-06");
  CHECK(format_sci(0.0) == "0.00000000000e+00");
  CHECK(format_sci(1.0) == "1.00000000000e+00");
}

TEST_CASE("sweep rows leave non-applicable columns empty") {
  SweepRecord rec;
  rec.loss_db = 10.0;
  rec.mu_opt = 0.5;
  rec.rate = 1e-3;
  rec.gain = 2e-2;
  rec.qber = 5e-3;
  rec.delta = 0.1;
  CHECK(sweep_csv_row(rec) ==
        "1.00000000000e+01,5.00000000000e-01,1.00000000000e-03,2.00000000000e-02,"
        "5.00000000000e-03,1.00000000000e-01,,,,");

  SweepRecord dead;
  dead.loss_db = 55.0;
  CHECK(sweep_csv_row(dead) ==
        "5.50000000000e+01,,0.00000000000e+00,0.00000000000e+00,0.00000000000e+00,,,,,");
}

TEST_CASE("run_sweep writes a CSV, and an SVG when asked") {
  TempDir tmp;
  const auto cfg = config_from(kBasicSweep);
  const auto out = run_sweep(cfg, tmp.path.string(), true);
  REQUIRE(out.records.size() == 3);
  const auto csv = slurp(out.csv_path);
  CHECK(csv.rfind(kSweepCsvHeader, 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto svg = slurp(out.svg_path);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("run_sweep requires a loss grid") {
  const auto cfg = config_from("[source]\nkind = wcs\n");
  TempDir tmp;
  CHECK_THROWS_AS(run_sweep(cfg, tmp.path.string()), error);
}

TEST_CASE("sweeps with identical configs are byte-identical") {
  TempDir tmp;
  auto cfg = config_from(kBasicSweep);
  cfg.csv_path = "a.csv";
  const auto a = run_sweep(cfg, tmp.path.string());
  cfg.csv_path = "b.csv";
  const auto b = run_sweep(cfg, tmp.path.string());
  CHECK(slurp(a.csv_path) == slurp(b.csv_path));
}

TEST_CASE("compare merges curves over a shared grid") {
  TempDir tmp;
  const char* minimal = "[source]\nkind = mhps\nm = 4\n[channel]\nloss_db = 0:10:5\n";
  auto a = config_from(minimal, "a.cfg");
  auto b = config_from(minimal, "b.cfg");
  b.source = SourceSpec::mhps(0.0, 16);

  const auto out = run_compare({a, b}, tmp.path.string(), "merged.csv");
  CHECK(out.labels == std::vector<std::string>{"a", "b"});
  const auto csv = slurp(out.csv_path);
  CHECK(csv.rfind("loss_db,a,b", 0) == 0);

  // More crystals never hurt the ideal MHPS.
  for (size_t i = 0; i < out.losses.size(); ++i)
    CHECK(out.rates[1][i] >= out.rates[0][i] - 1e-12);
}

TEST_CASE("decoy comparison preserves the architecture ordering") {
  // Four-column comparison: the asymmetric scheme dominates the symmetric
  // one under both decoy flavors.
  TempDir tmp;
  const auto cfg_for = [](const char* kind, const char* proto, const char* origin) {
    std::string text = std::string("[source]\nkind = ") + kind +
                       "\nm = 8\neta = 0.7\ngamma = 0.5\n[channel]\nloss_db = 0:16:4\n"
                       "[protocol]\ntype = " + proto + "\n";
    return config_from(text, origin);
  };
  const auto out = run_compare({cfg_for("smhps", "active_decoy", "smhps_active.cfg"),
                                cfg_for("amhps", "active_decoy", "amhps_active.cfg"),
                                cfg_for("smhps", "passive_decoy", "smhps_passive.cfg"),
                                cfg_for("amhps", "passive_decoy", "amhps_passive.cfg")},
                               tmp.path.string(), "decoy.csv");
  REQUIRE(out.rates.size() == 4);
  for (size_t i = 0; i < out.losses.size(); ++i) {
    CHECK(out.rates[1][i] >= out.rates[0][i] - 1e-12);  // active: amhps >= smhps
    CHECK(out.rates[3][i] >= out.rates[2][i] - 1e-12);  // passive: amhps >= smhps
  }
}

TEST_CASE("compare rejects mismatched or missing grids") {
  TempDir tmp;
  auto a = config_from(kBasicSweep, "a.cfg");
  auto b = a;
  b.losses = {0.0, 1.0};
  const auto code_of = [&](const std::vector<ExperimentConfig>& cfgs) {
    try {
      run_compare(cfgs, tmp.path.string(), "x.csv");
    } catch (const error& e) {
      return e.code();
    }
    FAIL("expected an error");
    return errc::grid_mismatch;
  };
  CHECK(code_of({a}) == errc::grid_mismatch);
  CHECK(code_of({a, b}) == errc::grid_mismatch);
}

TEST_CASE("mhps family sweeps reproduce the expected curve ordering") {
  // More units raise the rate at low loss and extend the tolerable loss;
  // m = 128 approaches the ideal single-photon ceiling.
  TempDir tmp;
  const auto sweep_for = [&](const SourceSpec& source) {
    auto cfg = config_from("[source]\nkind = wcs\n[channel]\nloss_db = 0:30:2\n");
    cfg.source = source;
    cfg.csv_path = std::string(source_kind_name(source.kind)) + "_" +
                   std::to_string(source.m) + ".csv";
    return run_sweep(cfg, tmp.path.string()).records;
  };

  const auto single = sweep_for(SourceSpec::ideal_single_photon());
  double prev_rate0 = 0.0;
  double prev_cutoff = -1.0;
  for (int m : {1, 4, 16, 128}) {
    const auto records = sweep_for(SourceSpec::mhps(0.0, m));
    CHECK(records.front().rate > prev_rate0);
    prev_rate0 = records.front().rate;

    double cutoff = 0.0, prev = 2.0;
    for (const auto& rec : records) {
      CHECK(rec.rate <= prev + 1e-15);
      CHECK(rec.rate <= single[size_t(&rec - records.data())].rate + 1e-12);
      if (rec.rate > 1e-12) cutoff = rec.loss_db;
      prev = rec.rate;
    }
    CHECK(cutoff >= prev_cutoff);
    prev_cutoff = cutoff;
  }
  CHECK(prev_rate0 >= 0.8 * single.front().rate);
}

TEST_CASE("validate-mc reports pass for a faithful configuration") {
  auto cfg = config_from(R"(
[source]
kind = smhps
m = 4
eta = 0.7
gamma = 0.5
mu = 0.1

[mc]
trials = 200000
seed = 42
tv_tolerance = 1e-2
click_tolerance = 8e-3
)");
  const auto report = run_validate_mc(cfg);
  CHECK(report.pass);
  CHECK(report.text.find("PASS") != std::string::npos);
  CHECK(report.text.find("tv_total") != std::string::npos);

  const auto again = run_validate_mc(cfg);
  CHECK(again.text == report.text);

  cfg.mc.trials = 0;
  CHECK_THROWS_AS(run_validate_mc(cfg), error);
}
