#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "dtc/config.hpp"
#include "dtc/io.hpp"

using namespace dtc;
using Catch::Approx;

namespace {

const char* kGoodConfig = R"ini(
# reference design
[circuit]
C11 = 60
C12 = 0.025
C13 = 6
C14 = 0.05
C22 = 60
C23 = 0.05
C24 = 6
C33 = 60
C34 = 1
C44 = 60
omega1_GHz = 5.0
omega2_GHz = 5.7
omega3_GHz = 7.2
omega4_GHz = 8.5

[sweep]
theta_start_over_pi = 0.55
theta_stop_over_pi = 1.0
theta_step_over_pi = 0.005

[solver]
N = 7
k = 14

[pulse]
Tg_list_ns = 20, 24, 28

[output]
directory = out
format = csv
)ini";

}  // namespace

TEST_CASE("well-formed config parses with defaults applied") {
  const RunConfig rc = RunConfig::from_ini(IniFile::parse_string(kGoodConfig));
  CHECK(rc.circuit.cap_fF(0, 2) == 6.0);
  CHECK(rc.circuit.omega_design(3) == Approx(units::ghz_to_rad(8.5)));
  CHECK(rc.circuit.j5_ratio == 0.25);
  CHECK(rc.solver.cutoff == 7);
  CHECK(rc.solver.k == 14);
  CHECK(rc.solver.dt_ns == Approx(2e-3));
  CHECK(rc.pulse.A == Approx(-0.17));
  CHECK(rc.pulse.gap_scale == Approx(0.2));
  REQUIRE(rc.pulse.tg_list_ns.size() == 3);
  CHECK(rc.pulse.tg_list_ns[1] == 24.0);
  CHECK(rc.sweep.theta_grid().size() == 91);
  CHECK_FALSE(rc.sweep.has_omega4_axis);
  CHECK(rc.output.cache);
}

TEST_CASE("unknown keys and sections are rejected") {
  std::string bad = kGoodConfig;
  bad += "\n[solver]\n";  // duplicate section is fine to re-open? no: key map merges
  // unknown key
  std::string cfg1 = std::string(kGoodConfig) + "\n[circuit2]\nx = 1\n";
  CHECK_THROWS_AS(RunConfig::from_ini(IniFile::parse_string(cfg1)), ConfigError);
  std::string cfg2 = std::string(kGoodConfig);
  cfg2.replace(cfg2.find("[sweep]"), 7, "[sweep]\nbogus_key = 3");
  CHECK_THROWS_AS(RunConfig::from_ini(IniFile::parse_string(cfg2)), ConfigError);
}

TEST_CASE("malformed values and structure fail loudly") {
  CHECK_THROWS_AS(IniFile::parse_string("[a\nk = 1"), ConfigError);
  CHECK_THROWS_AS(IniFile::parse_string("[a]\nnovalue\n"), ConfigError);
  CHECK_THROWS_AS(IniFile::parse_string("[a]\nk = 1\nk = 2\n"), ConfigError);
  std::string cfg = std::string(kGoodConfig);
  cfg.replace(cfg.find("omega1_GHz = 5.0"), 16, "omega1_GHz = five");
  CHECK_THROWS_AS(RunConfig::from_ini(IniFile::parse_string(cfg)), ConfigError);
}

TEST_CASE("range checks catch unphysical values") {
  std::string cfg = std::string(kGoodConfig);
  cfg.replace(cfg.find("C11 = 60"), 8, "C11 = -60");
  CHECK_THROWS_AS(RunConfig::from_ini(IniFile::parse_string(cfg)), ConfigError);
  cfg = kGoodConfig;
  cfg.replace(cfg.find("N = 7"), 5, "N = 0");
  CHECK_THROWS_AS(RunConfig::from_ini(IniFile::parse_string(cfg)), ConfigError);
  cfg = kGoodConfig;
  cfg.replace(cfg.find("k = 14"), 6, "k = 99");
  CHECK_THROWS_AS(RunConfig::from_ini(IniFile::parse_string(cfg)), ConfigError);
  cfg = kGoodConfig;
  cfg.replace(cfg.find("format = csv"), 12, "format = xml");
  CHECK_THROWS_AS(RunConfig::from_ini(IniFile::parse_string(cfg)), ConfigError);
}

TEST_CASE("missing circuit section or key is an error") {
  CHECK_THROWS_AS(RunConfig::from_ini(IniFile::parse_string("[solver]\nN = 5\n")),
                  ConfigError);
  std::string cfg = std::string(kGoodConfig);
  cfg.replace(cfg.find("C34 = 1\n"), 8, "");
  CHECK_THROWS_AS(RunConfig::from_ini(IniFile::parse_string(cfg)), ConfigError);
}

TEST_CASE("fixed-width float formatting is stable") {
  CHECK(fmt12(1.0) == "1");
  CHECK(fmt12(0.1) == "0.1");
  CHECK(fmt12(-42.6653276) == "-42.6653276");
  CHECK(fmt12(1.23456789012345e-7) == "1.23456789012e-07");
  CHECK(fmt12(std::numeric_limits<double>::infinity()) == "inf");
  // round-trip precision for cache payloads
  const double v = 0.1234567890123456789;
  CHECK(std::stod(fmt17(v)) == v);
}

TEST_CASE("csv writer enforces column counts") {
  CsvWriter w({"a", "b"});
  w.row({"1", "2"});
  CHECK_THROWS_AS(w.row({"1"}), DimensionError);
  CHECK(w.str() == "a,b\n1,2\n");
}

TEST_CASE("point cache round-trips and verifies keys") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "dtc_cache_test";
  std::filesystem::remove_all(dir);
  PointCache cache(dir, true);
  nlohmann::json j{{"zeta_zz", -1.25}, {"levels", nlohmann::json::array()}};
  cache.put("key-a", j);
  auto hit = cache.get("key-a");
  REQUIRE(hit.has_value());
  CHECK((*hit)["zeta_zz"].get<double>() == -1.25);
  CHECK_FALSE(cache.get("key-b").has_value());

  // poisoned payload (key mismatch) degrades to a miss
  nlohmann::json wrong{{"key", "other"}, {"zeta_zz", 7.0}};
  write_text_atomic(dir / "deadbeef.json", wrong.dump());
  CHECK_FALSE(cache.get("poisoned").has_value());

  PointCache disabled(dir, false);
  CHECK_FALSE(disabled.get("key-a").has_value());
  std::filesystem::remove_all(dir);
}

TEST_CASE("atomic writes do not leave partial files behind") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "dtc_io_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "x.csv", "a,b\n");
  CHECK(std::filesystem::exists(dir / "x.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "x.csv.tmp"));
  std::filesystem::remove_all(dir);
}
