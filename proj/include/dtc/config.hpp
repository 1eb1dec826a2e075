#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dtc/circuit.hpp"
#include "dtc/constants.hpp"
#include "dtc/errors.hpp"
#include "dtc/stc.hpp"

namespace dtc {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Minimal strict INI: [section] headers, key = value pairs, '#' or ';'
// comments. Duplicate keys and malformed lines are errors.
class IniFile {
 public:
  static IniFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
  }

  static IniFile parse_string(const std::string& text, const std::string& origin = "<string>") {
    IniFile f;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto cpos = line.find_first_of("#;");
      if (cpos != std::string::npos) line = line.substr(0, cpos);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section");
        section = detail::trim(line.substr(1, line.size() - 2));
        f.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string val = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      auto& sec = f.sections_[section];
      if (sec.count(key))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
      sec[key] = val;
    }
    return f;
  }

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Tracks which keys were consumed so unknown keys can be rejected wholesale.
class SectionReader {
 public:
  SectionReader(const IniFile& f, const std::string& name) : name_(name) {
    auto it = f.sections().find(name);
    if (it != f.sections().end()) kv_ = &it->second;
  }

  bool present() const { return kv_ != nullptr; }

  bool has(const std::string& key) const { return kv_ && kv_->count(key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return parse_number(key);
  }

  double required_number(const std::string& key) {
    if (!has(key)) throw ConfigError("[" + name_ + "] missing required key " + key);
    return parse_number(key);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    std::string v = kv_->at(key);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("[" + name_ + "] " + key + ": expected a boolean, got '" + v + "'");
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    return kv_->at(key);
  }

  std::vector<double> number_list(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    std::vector<double> out;
    std::istringstream ss(kv_->at(key));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = detail::trim(tok);
      if (tok.empty()) continue;
      out.push_back(to_double(tok, key));
    }
    if (out.empty()) throw ConfigError("[" + name_ + "] " + key + ": empty list");
    return out;
  }

  void reject_unknown() const {
    if (!kv_) return;
    for (const auto& [k, v] : *kv_)
      if (!used_.count(k))
        throw ConfigError("[" + name_ + "] unknown key: " + k);
  }

 private:
  double parse_number(const std::string& key) {
    used_.insert(key);
    return to_double(kv_->at(key), key);
  }

  double to_double(const std::string& s, const std::string& key) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("[" + name_ + "] " + key + ": not a number: '" + s + "'");
    }
  }

  std::string name_;
  const std::map<std::string, std::string>* kv_ = nullptr;
  std::set<std::string> used_;
};

struct SweepConfig {
  double theta_start_over_pi = 0.0;
  double theta_stop_over_pi = 1.0;
  double theta_step_over_pi = 0.005;
  // optional omega4 axis; empty means single row at the circuit design value
  double omega4_start_ghz = 0.0;
  double omega4_stop_ghz = 0.0;
  double omega4_step_ghz = 0.0;
  bool has_omega4_axis = false;

  std::vector<double> theta_grid() const {
    std::vector<double> g;
    for (double t = theta_start_over_pi; t <= theta_stop_over_pi + 1e-12;
         t += theta_step_over_pi)
      g.push_back(t * M_PI);
    return g;
  }

  std::vector<double> omega4_grid() const {
    std::vector<double> g;
    if (!has_omega4_axis) return g;
    for (double w = omega4_start_ghz; w <= omega4_stop_ghz + 1e-12; w += omega4_step_ghz)
      g.push_back(units::ghz_to_rad(w));
    return g;
  }
};

struct PulseConfig {
  double A = -0.17;
  double gap_scale = 0.2;
  double profile_theta_start_over_pi = 0.61;
  int profile_points = 2001;
  int samples = 2001;
  std::vector<double> tg_list_ns{24.0};
  bool calibrate = false;
  double calibrate_lo_ns = 16.0;
  double calibrate_hi_ns = 34.0;
};

struct SolverConfig {
  int cutoff = 10;
  int k = 14;
  double residual_rel = 1e-8;
  int max_basis = 0;
  int ref_levels_per_mode = 5;
  int ref_total_excitation = 4;
  double dt_ns = 2e-3;
  bool certify = true;
  bool drive_term = true;
};

struct T2Config {
  double a_phi = 1e-5;
  double h_over_pi = 1e-3;
};

struct StcSweepConfig {
  StcParams params = StcParams::reference_design();
  double omega2_start_ghz = 4.025;
  double omega2_stop_ghz = 5.975;
  double omega2_step_ghz = 0.05;
  double omega3_start_ghz = 6.5;
  double omega3_stop_ghz = 8.0;
  double omega3_step_ghz = 0.1;

  std::vector<double> omega2_grid() const {
    std::vector<double> g;
    for (double w = omega2_start_ghz; w <= omega2_stop_ghz + 1e-12; w += omega2_step_ghz)
      g.push_back(units::ghz_to_rad(w));
    return g;
  }
  std::vector<double> omega3_grid() const {
    std::vector<double> g;
    for (double w = omega3_start_ghz; w <= omega3_stop_ghz + 1e-12; w += omega3_step_ghz)
      g.push_back(units::ghz_to_rad(w));
    return g;
  }
};

struct OutputConfig {
  std::string directory = "out";
  std::string format = "csv";  // csv | json
  bool cache = true;
};

struct RunConfig {
  CircuitParams circuit;
  SweepConfig sweep;
  PulseConfig pulse;
  SolverConfig solver;
  T2Config t2;
  StcSweepConfig stc;
  OutputConfig output;

  static RunConfig from_file(const std::string& path) {
    return from_ini(IniFile::parse_file(path));
  }

  static RunConfig from_ini(const IniFile& ini) {
    RunConfig rc;
    static const std::set<std::string> known{"circuit", "sweep", "pulse",
                                             "solver",  "t2",    "stc", "output"};
    for (const auto& [name, _] : ini.sections())
      if (!known.count(name)) throw ConfigError("unknown config section: [" + name + "]");

    {
      SectionReader s(ini, "circuit");
      if (!s.present()) throw ConfigError("config requires a [circuit] section");
      auto& c = rc.circuit;
      const char* names[4][4] = {{"C11", "C12", "C13", "C14"},
                                 {"", "C22", "C23", "C24"},
                                 {"", "", "C33", "C34"},
                                 {"", "", "", "C44"}};
      for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) c.set_cap(i, j, s.required_number(names[i][j]));
      for (int i = 0; i < 4; ++i) {
        const std::string key = "omega" + std::to_string(i + 1) + "_GHz";
        c.omega_design(i) = units::ghz_to_rad(s.required_number(key));
      }
      c.j5_ratio = s.number("j5_ratio", 0.25);
      s.reject_unknown();
      c.validate();
    }
    {
      SectionReader s(ini, "sweep");
      auto& w = rc.sweep;
      w.theta_start_over_pi = s.number("theta_start_over_pi", w.theta_start_over_pi);
      w.theta_stop_over_pi = s.number("theta_stop_over_pi", w.theta_stop_over_pi);
      w.theta_step_over_pi = s.number("theta_step_over_pi", w.theta_step_over_pi);
      w.has_omega4_axis = s.has("omega4_start_GHz");
      w.omega4_start_ghz = s.number("omega4_start_GHz", 0.0);
      w.omega4_stop_ghz = s.number("omega4_stop_GHz", w.omega4_start_ghz);
      w.omega4_step_ghz = s.number("omega4_step_GHz", 0.05);
      s.reject_unknown();
      if (!(w.theta_step_over_pi > 0.0)) throw ConfigError("[sweep] theta step must be > 0");
      if (!(w.theta_stop_over_pi >= w.theta_start_over_pi))
        throw ConfigError("[sweep] theta range is empty");
      if (w.has_omega4_axis && !(w.omega4_step_ghz > 0.0))
        throw ConfigError("[sweep] omega4 step must be > 0");
    }
    {
      SectionReader s(ini, "pulse");
      auto& p = rc.pulse;
      p.A = s.number("A", p.A);
      p.gap_scale = s.number("gap_scale", p.gap_scale);
      p.profile_theta_start_over_pi =
          s.number("profile_theta_start_over_pi", p.profile_theta_start_over_pi);
      p.profile_points = static_cast<int>(s.number("profile_points", p.profile_points));
      p.samples = static_cast<int>(s.number("samples", p.samples));
      p.tg_list_ns = s.number_list("Tg_list_ns", p.tg_list_ns);
      p.calibrate = s.boolean("calibrate", p.calibrate);
      p.calibrate_lo_ns = s.number("calibrate_lo_ns", p.calibrate_lo_ns);
      p.calibrate_hi_ns = s.number("calibrate_hi_ns", p.calibrate_hi_ns);
      s.reject_unknown();
      if (p.profile_points < 5) throw ConfigError("[pulse] profile_points must be >= 5");
      if (!(p.gap_scale > 0.0 && p.gap_scale <= 1.0))
        throw ConfigError("[pulse] gap_scale must be in (0, 1]");
      for (double tg : p.tg_list_ns)
        if (!(tg >= 0.0)) throw ConfigError("[pulse] Tg_list_ns entries must be >= 0");
    }
    {
      SectionReader s(ini, "solver");
      auto& v = rc.solver;
      v.cutoff = static_cast<int>(s.number("N", v.cutoff));
      v.k = static_cast<int>(s.number("k", v.k));
      v.residual_rel = s.number("residual_rel", v.residual_rel);
      v.max_basis = static_cast<int>(s.number("max_basis", v.max_basis));
      v.ref_levels_per_mode = static_cast<int>(s.number("ref_levels_per_mode", v.ref_levels_per_mode));
      v.ref_total_excitation =
          static_cast<int>(s.number("ref_total_excitation", v.ref_total_excitation));
      v.dt_ns = s.number("dt_ns", v.dt_ns);
      v.certify = s.boolean("certify", v.certify);
      v.drive_term = s.boolean("drive_term", v.drive_term);
      s.reject_unknown();
      if (v.cutoff < 1) throw ConfigError("[solver] N must be >= 1");
      if (v.k < 1 || v.k > 40) throw ConfigError("[solver] k must be in [1, 40]");
      if (!(v.dt_ns > 0.0)) throw ConfigError("[solver] dt_ns must be > 0");
      if (!(v.residual_rel > 0.0)) throw ConfigError("[solver] residual_rel must be > 0");
    }
    {
      SectionReader s(ini, "t2");
      rc.t2.a_phi = s.number("A_phi", rc.t2.a_phi);
      rc.t2.h_over_pi = s.number("h_over_pi", rc.t2.h_over_pi);
      s.reject_unknown();
      if (!(rc.t2.a_phi > 0.0)) throw ConfigError("[t2] A_phi must be > 0");
    }
    {
      SectionReader s(ini, "stc");
      auto& t = rc.stc;
      t.params.omega[0] = units::ghz_to_rad(s.number("omega1_GHz", 5.0));
      const double W = units::mhz_to_rad(s.number("W_MHz", 250.0));
      t.params.kerr = {W, W, W};
      t.params.g13 = units::mhz_to_rad(s.number("g13_MHz", 250.0));
      t.params.g23 = units::mhz_to_rad(s.number("g23_MHz", 250.0));
      t.params.g12 = units::mhz_to_rad(s.number("g12_MHz", 25.0));
      t.params.levels_per_mode = static_cast<int>(s.number("levels_per_mode", 6));
      t.omega2_start_ghz = s.number("omega2_start_GHz", t.omega2_start_ghz);
      t.omega2_stop_ghz = s.number("omega2_stop_GHz", t.omega2_stop_ghz);
      t.omega2_step_ghz = s.number("omega2_step_GHz", t.omega2_step_ghz);
      t.omega3_start_ghz = s.number("omega3_start_GHz", t.omega3_start_ghz);
      t.omega3_stop_ghz = s.number("omega3_stop_GHz", t.omega3_stop_ghz);
      t.omega3_step_ghz = s.number("omega3_step_GHz", t.omega3_step_ghz);
      s.reject_unknown();
      t.params.validate();
      if (!(t.omega2_step_ghz > 0.0) || !(t.omega3_step_ghz > 0.0))
        throw ConfigError("[stc] grid steps must be > 0");
    }
    {
      SectionReader s(ini, "output");
      rc.output.directory = s.text("directory", rc.output.directory);
      rc.output.format = s.text("format", rc.output.format);
      rc.output.cache = s.boolean("cache", rc.output.cache);
      s.reject_unknown();
      if (rc.output.format != "csv" && rc.output.format != "json")
        throw ConfigError("[output] format must be csv or json");
    }
    return rc;
  }
};

}  // namespace dtc
