#pragma once

#include "moltrap/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

// Flat INI configuration: [section] headers, `key = value` lines, ';' or '#'
// comments. Every key carries its unit in its name. Keys are addressed as
// "section.key".

namespace moltrap::config {

// Every key the tool understands, in the order the effective config is
// written.
inline const std::vector<std::string> &known_keys() {
  static const std::vector<std::string> keys = {
      "molecule.reduced_mass_amu",
      "molecule.b_v_cm1",
      "molecule.b_vprime_cm1",
      "molecule.transition_cm1",
      "background.alpha_par_au",
      "background.alpha_perp_au",
      "line.gamma_per_s",
      "calibrate.target_ghz",
      "calibrate.j_a",
      "calibrate.j_b",
      "calibrate.m",
      "calibrate.theta_deg",
      "scan.detuning_min_ghz",
      "scan.detuning_max_ghz",
      "scan.detuning_points",
      "scan.j_min",
      "scan.j_max",
      "scan.m",
      "scan.theta_deg",
      "surrogate.x_b_e_cm1",
      "surrogate.x_omega_e_cm1",
      "surrogate.x_depth_cm1",
      "surrogate.b_r_e_bohr",
      "surrogate.b_omega_e_cm1",
      "surrogate.b_depth_cm1",
      "surrogate.a_r_e_bohr",
      "surrogate.a_omega_e_cm1",
      "surrogate.a_depth_cm1",
      "surrogate.crossing_bohr",
      "surrogate.xi_cm1",
      "surrogate.dipole_au",
      "grid.r_min_bohr",
      "grid.r_max_bohr",
      "grid.points",
      "rovib.j_max",
      "rovib.levels",
      "imag.photon_min_cm1",
      "imag.photon_max_cm1",
      "imag.points",
      "imag.j_max",
      "imag.m",
      "imag.theta_deg",
      "imag.upper_levels",
      "hyperfine.j_max",
      "hyperfine.i_na",
      "hyperfine.i_rb",
      "hyperfine.b_rot_mhz",
      "hyperfine.eqq_na_mhz",
      "hyperfine.eqq_rb_mhz",
      "hyperfine.g_na",
      "hyperfine.g_rb",
      "hyperfine.dipole_debye",
      "hyperfine.alpha_par_hz_w_cm2",
      "hyperfine.alpha_perp_hz_w_cm2",
      "hyperfine.quadrupole_convention",
      "hyperfine.terms",
      "hyperfine.mode",
      "fields.b_gauss",
      "fields.b_theta_deg",
      "fields.b_phi_deg",
      "fields.e_kv_cm",
      "fields.e_theta_deg",
      "fields.e_phi_deg",
      "fields.intensity_w_cm2",
      "fields.polarization_theta_deg",
      "hfscan.theta_min_deg",
      "hfscan.theta_max_deg",
      "hfscan.theta_points",
      "magic.kind",
      "magic.j_ref",
      "magic.j_max",
      "magic.m",
      "magic.theta_deg",
      "magic.detuning_min_ghz",
      "magic.detuning_max_ghz",
      "magic.scan_points",
      "magic.state_a_j",
      "magic.state_a_m",
      "magic.state_a_rank",
      "magic.state_b_j",
      "magic.state_b_m",
      "magic.state_b_rank",
      "magic.angle_min_deg",
      "magic.angle_max_deg",
  };
  return keys;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Config {
public:
  static Config from_string(const std::string &text, const std::string &origin = "<string>") {
    std::istringstream in(strip_trailing_comments(text));
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
      throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    Config c;
    c.origin_ = origin;
    for (const auto &[section, body] : tree) {
      if (body.empty() && !body.data().empty())
        throw ConfigError(origin + ": key '" + section + "' is outside any [section]");
      for (const auto &[key, value] : body)
        c.set(section + "." + key, value.data());
    }
    return c;
  }

  static Config from_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw IoError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path.string());
  }

  // "section.key=value"
  void apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    auto trim = [](std::string_view s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
      return std::string(s);
    };
    const std::string key = trim(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos)
      throw ConfigError("override key '" + key + "' must be written as section.key");
    set(key, trim(assignment.substr(eq + 1)));
  }

  bool has(const std::string &key) const { return values_.count(key) != 0; }

  std::string text(const std::string &key) {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError("missing required key '" + key + "' in " + origin_);
    return it->second;
  }
  std::string text_or(const std::string &key, const std::string &fallback) {
    if (!has(key))
      values_[key] = fallback;
    return text(key);
  }

  double number(const std::string &key) { return parse_double(key, text(key)); }
  double number_or(const std::string &key, double fallback) {
    if (!has(key))
      values_[key] = format_number(fallback);
    return number(key);
  }
  std::optional<double> optional_number(const std::string &key) {
    if (!has(key))
      return std::nullopt;
    return number(key);
  }

  int integer(const std::string &key) { return parse_int(key, text(key)); }
  int integer_or(const std::string &key, int fallback) {
    if (!has(key))
      values_[key] = std::to_string(fallback);
    return integer(key);
  }

  // Every key that was set or resolved, in schema order, as INI text.
  std::string effective_ini() const {
    std::string out;
    std::string current;
    for (const auto &key : known_keys()) {
      const auto it = values_.find(key);
      if (it == values_.end())
        continue;
      const auto dot = key.find('.');
      const std::string section = key.substr(0, dot);
      if (section != current) {
        out += (current.empty() ? "" : "\n") + std::string("[") + section + "]\n";
        current = section;
      }
      out += key.substr(dot + 1) + " = " + it->second + "\n";
    }
    return out;
  }

  const std::string &origin() const { return origin_; }

private:
  // The INI reader only knows whole-line comments; drop "  ; note" tails.
  static std::string strip_trailing_comments(const std::string &text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
      for (std::size_t i = 1; i < line.size(); ++i)
        if ((line[i] == ';' || line[i] == '#') &&
            std::isspace(static_cast<unsigned char>(line[i - 1]))) {
          line.erase(i);
          break;
        }
      out += line;
      out += '\n';
    }
    return out;
  }

  void set(const std::string &key, std::string value) {
    static const std::set<std::string> allowed(known_keys().begin(), known_keys().end());
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + origin_);
    values_[key] = std::move(value);
  }

  static double parse_double(const std::string &key, const std::string &s) {
    double v = 0.0;
    const char *first = s.data();
    const char *last = s.data() + s.size();
    if (first != last && *first == '+')
      ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty())
      throw ConfigError("key '" + key + "': '" + s + "' is not a number");
    return v;
  }

  static int parse_int(const std::string &key, const std::string &s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
    return v;
  }

  std::string origin_;
  std::map<std::string, std::string> values_;
};

} // namespace moltrap::config
