#pragma once

// Line-oriented scenario configuration: [section] headers and key = value
// pairs. Serialization is canonical (fixed section and key order, 17-digit
// doubles), so parse -> serialize -> parse is idempotent and the config hash
// identifies a run.

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "diffwave/csv.hpp"

namespace diffwave {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct RunConfig {
  // model
  std::string model_type = "m1";  // m1 | gamma-law
  double gamma = 1.4;
  double alpha = 1.0;
  // grid
  bool length_auto = true;
  double length = 0.0;
  int cells = 8192;
  // far field
  double v_plus = 1.0;
  double u_plus = 0.0;
  // profile
  bool delta0_auto = true;  // mass-matched via compute_delta0
  double delta0 = 0.0;
  double phi0_center = 2.0;
  double phi0_width = 2.0;
  double m0_left = 0.0;
  double m0_support = 2.0;  // support width, starting at m0_left
  // perturbation
  double amplitude_v = 0.01;
  double center_v = 6.0;
  double width_v = 1.0;
  double amplitude_u = 0.0;
  double center_u = 6.0;
  double width_u = 1.0;
  bool enforce_w_zero_mass = false;
  // time
  double t_end = 100.0;
  double cfl = 0.45;
  int snapshots_per_decade = 32;
  double snapshot_t_min = 1.0;
  double ramp_dt0 = 1e-3;
  // report
  std::string theorem = "thm2_improved";
  double fit_decades = 1.5;
  double transient_skip = 0.1;
  double tolerance = 0.15;
  // output
  std::string out_dir = "out";
  bool write_svg = true;
  bool write_trajectory = false;
  bool write_profiles = false;
  bool write_diagnostics = true;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

using KvMap = std::map<std::string, std::string>;  // "section.key" -> value

inline KvMap parse_kv(const std::string& text) {
  KvMap kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key");
    kv[section + "." + key] = value;
  }
  return kv;
}

inline double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  }
}

inline int to_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
  }
}

inline bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("config: bad bool for " + key + ": '" + v + "'");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  auto kv = detail::parse_kv(text);
  RunConfig c;
  auto take = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto num = [&](const std::string& key, double& slot) {
    if (auto* v = take(key)) slot = detail::to_double(*v, key);
  };
  auto integer = [&](const std::string& key, int& slot) {
    if (auto* v = take(key)) slot = detail::to_int(*v, key);
  };
  auto boolean = [&](const std::string& key, bool& slot) {
    if (auto* v = take(key)) slot = detail::to_bool(*v, key);
  };
  auto text_field = [&](const std::string& key, std::string& slot) {
    if (auto* v = take(key)) slot = *v;
  };

  text_field("model.type", c.model_type);
  num("model.gamma", c.gamma);
  num("model.alpha", c.alpha);
  if (auto* v = take("grid.length")) {
    if (*v == "auto") {
      c.length_auto = true;
    } else {
      c.length_auto = false;
      c.length = detail::to_double(*v, "grid.length");
    }
  }
  integer("grid.cells", c.cells);
  num("farfield.v_plus", c.v_plus);
  num("farfield.u_plus", c.u_plus);
  if (auto* v = take("profile.delta0")) {
    if (*v == "auto") {
      c.delta0_auto = true;
    } else {
      c.delta0_auto = false;
      c.delta0 = detail::to_double(*v, "profile.delta0");
    }
  }
  num("profile.phi0_center", c.phi0_center);
  num("profile.phi0_width", c.phi0_width);
  num("profile.m0_left", c.m0_left);
  num("profile.m0_support", c.m0_support);
  num("perturbation.amplitude_v", c.amplitude_v);
  num("perturbation.center_v", c.center_v);
  num("perturbation.width_v", c.width_v);
  num("perturbation.amplitude_u", c.amplitude_u);
  num("perturbation.center_u", c.center_u);
  num("perturbation.width_u", c.width_u);
  boolean("perturbation.enforce_w_zero_mass", c.enforce_w_zero_mass);
  num("time.t_end", c.t_end);
  num("time.cfl", c.cfl);
  integer("time.snapshots_per_decade", c.snapshots_per_decade);
  num("time.snapshot_t_min", c.snapshot_t_min);
  num("time.ramp_dt0", c.ramp_dt0);
  text_field("report.theorem", c.theorem);
  num("report.fit_decades", c.fit_decades);
  num("report.transient_skip", c.transient_skip);
  num("report.tolerance", c.tolerance);
  text_field("output.dir", c.out_dir);
  boolean("output.svg", c.write_svg);
  boolean("output.trajectory", c.write_trajectory);
  boolean("output.profiles", c.write_profiles);
  boolean("output.diagnostics", c.write_diagnostics);

  if (c.model_type != "m1" && c.model_type != "gamma-law")
    throw std::invalid_argument("config: model.type must be m1 or gamma-law");
  if (!(c.cfl > 0.0 && c.cfl < 1.0))
    throw std::invalid_argument("config: time.cfl must lie in (0,1)");
  if (c.cells < 8) throw std::invalid_argument("config: grid.cells too small");
  if (!(c.t_end >= 0.0)) throw std::invalid_argument("config: time.t_end must be nonnegative");
  return c;
}

inline std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[model]\n";
  out << "type = " << c.model_type << "\n";
  out << "gamma = " << csv_double(c.gamma) << "\n";
  out << "alpha = " << csv_double(c.alpha) << "\n";
  out << "\n[grid]\n";
  out << "length = " << (c.length_auto ? std::string("auto") : csv_double(c.length)) << "\n";
  out << "cells = " << c.cells << "\n";
  out << "\n[farfield]\n";
  out << "v_plus = " << csv_double(c.v_plus) << "\n";
  out << "u_plus = " << csv_double(c.u_plus) << "\n";
  out << "\n[profile]\n";
  out << "delta0 = " << (c.delta0_auto ? std::string("auto") : csv_double(c.delta0)) << "\n";
  out << "phi0_center = " << csv_double(c.phi0_center) << "\n";
  out << "phi0_width = " << csv_double(c.phi0_width) << "\n";
  out << "m0_left = " << csv_double(c.m0_left) << "\n";
  out << "m0_support = " << csv_double(c.m0_support) << "\n";
  out << "\n[perturbation]\n";
  out << "amplitude_v = " << csv_double(c.amplitude_v) << "\n";
  out << "center_v = " << csv_double(c.center_v) << "\n";
  out << "width_v = " << csv_double(c.width_v) << "\n";
  out << "amplitude_u = " << csv_double(c.amplitude_u) << "\n";
  out << "center_u = " << csv_double(c.center_u) << "\n";
  out << "width_u = " << csv_double(c.width_u) << "\n";
  out << "enforce_w_zero_mass = " << (c.enforce_w_zero_mass ? "true" : "false") << "\n";
  out << "\n[time]\n";
  out << "t_end = " << csv_double(c.t_end) << "\n";
  out << "cfl = " << csv_double(c.cfl) << "\n";
  out << "snapshots_per_decade = " << c.snapshots_per_decade << "\n";
  out << "snapshot_t_min = " << csv_double(c.snapshot_t_min) << "\n";
  out << "ramp_dt0 = " << csv_double(c.ramp_dt0) << "\n";
  out << "\n[report]\n";
  out << "theorem = " << c.theorem << "\n";
  out << "fit_decades = " << csv_double(c.fit_decades) << "\n";
  out << "transient_skip = " << csv_double(c.transient_skip) << "\n";
  out << "tolerance = " << csv_double(c.tolerance) << "\n";
  out << "\n[output]\n";
  out << "dir = " << c.out_dir << "\n";
  out << "svg = " << (c.write_svg ? "true" : "false") << "\n";
  out << "trajectory = " << (c.write_trajectory ? "true" : "false") << "\n";
  out << "profiles = " << (c.write_profiles ? "true" : "false") << "\n";
  out << "diagnostics = " << (c.write_diagnostics ? "true" : "false") << "\n";
  return out.str();
}

/// Hash of the scenario content; the output directory is excluded so the
/// same run written elsewhere keeps its identity.
inline std::string config_hash_hex(const RunConfig& c) {
  RunConfig scenario = c;
  scenario.out_dir = "out";
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_config(scenario))));
  return buf;
}

/// Bundled scenario presets.
///   m1-small:       M1, u_plus != 0, improved-rate table
///   psystem-faster: gamma law, u_plus = 0, zero-mass data, faster-rate table
///   lemma21:        profile-only diffusion-wave rate check
///   equilibrium:    constant state, degenerate fits
inline RunConfig preset_config(const std::string& name) {
  RunConfig c;
  // The rate presets co-locate every data piece (perturbation bumps, the
  // phi0 seed, the m0 support) deep in the domain: the antiderivative V0 is
  // then compact there, and the fit window probes the whole-line decay
  // mechanisms before the wall images are felt.
  if (name == "m1-small") {
    c.model_type = "m1";
    c.u_plus = 0.02;
    c.amplitude_v = 0.01;
    c.center_v = 280.0;
    c.amplitude_u = 0.01;
    c.center_u = 280.0;
    c.phi0_center = 280.0;
    c.phi0_width = 1.0;
    c.m0_left = 276.0;
    c.m0_support = 8.0;
    c.cells = 8192;
    c.t_end = 5e3;
    c.theorem = "thm2_improved";
    c.tolerance = 0.15;
  } else if (name == "psystem-faster") {
    c.model_type = "gamma-law";
    c.gamma = 1.4;
    c.u_plus = 0.0;
    c.amplitude_v = 0.01;
    c.center_v = 440.0;
    c.amplitude_u = 0.0;  // recomputed by the zero-mass balance
    c.center_u = 440.0;
    c.phi0_center = 441.0;
    c.enforce_w_zero_mass = true;
    c.cells = 8192;
    c.t_end = 5e3;
    c.theorem = "thm2_faster";
    c.tolerance = 0.2;
  } else if (name == "lemma21") {
    c.model_type = "m1";
    c.u_plus = 0.0;
    c.delta0_auto = false;
    c.delta0 = 0.05;
    c.amplitude_v = 0.0;
    c.cells = 8192;
    c.t_end = 1e4;
    c.theorem = "lemma2.1";
  } else if (name == "equilibrium") {
    c.model_type = "m1";
    c.u_plus = 0.0;
    c.amplitude_v = 0.0;
    c.amplitude_u = 0.0;
    c.delta0_auto = false;
    c.delta0 = 0.0;
    c.cells = 256;
    c.length_auto = false;
    c.length = 50.0;
    c.t_end = 100.0;
    c.theorem = "thm2_improved";
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return c;
}

}  // namespace diffwave
