#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scenario.hpp"

namespace memwave {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_number(const std::string& key, const std::string& v) {
  const char* c = v.c_str();
  char* end = nullptr;
  const double x = std::strtod(c, &end);
  if (end == c || *end != '\0')
    throw ParseError("key '" + key + "': expected a number, got '" + v + "'");
  return x;
}

inline int parse_integer(const std::string& key, const std::string& v) {
  const char* c = v.c_str();
  char* end = nullptr;
  const long x = std::strtol(c, &end, 10);
  if (end == c || *end != '\0')
    throw ParseError("key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

/// Pair-list syntax: "(a, b) (c, d) ..." or the literal "none".
inline std::vector<std::pair<std::string, std::string>> parse_pair_list(
    const std::string& key, const std::string& v) {
  std::vector<std::pair<std::string, std::string>> out;
  if (v == "none") return out;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < v.size() && std::isspace(static_cast<unsigned char>(v[i]))) ++i;
  };
  skip_ws();
  while (i < v.size()) {
    if (v[i] != '(')
      throw ParseError("key '" + key + "': expected '(' in pair list");
    const std::size_t comma = v.find(',', i);
    const std::size_t close = v.find(')', i);
    if (comma == std::string::npos || close == std::string::npos || comma > close)
      throw ParseError("key '" + key + "': malformed pair");
    out.emplace_back(trim(v.substr(i + 1, comma - i - 1)),
                     trim(v.substr(comma + 1, close - comma - 1)));
    i = close + 1;
    skip_ws();
  }
  if (out.empty())
    throw ParseError("key '" + key + "': empty pair list (use 'none')");
  return out;
}

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "name", "mode", "modes", "length", "horizon", "dt", "cadence",
      "kernel.terms",
      "delay.family", "delay.tau_bar", "delay.constant", "delay.mean",
      "delay.amplitude", "delay.frequency", "delay.phase", "delay.knots",
      "gain.family", "gain.amplitude", "gain.rate", "gain.period", "gain.width",
      "feedback.lo", "feedback.hi",
      "source.family", "source.exponent", "source.c_h",
      "history.position", "history.ramp_c", "history.t_hist", "history.u0",
      "history.velocity", "history.vel_frequency", "history.g0",
      "history.scale"};
  return keys;
}

}  // namespace detail

/// Parses the `key = value` scenario format. Strict by design: duplicate
/// keys, unknown keys, and keys that do not apply to the selected families
/// are all rejected, so a config never silently carries dead settings.
inline ScenarioConfig parse_config(const std::string& text) {
  using detail::parse_integer;
  using detail::parse_number;
  using detail::parse_pair_list;
  using detail::trim;

  std::map<std::string, std::string> kv;
  {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError("line " + std::to_string(lineno) +
                         ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty() || val.empty())
        throw ParseError("line " + std::to_string(lineno) +
                         ": empty key or value");
      if (!detail::known_config_keys().count(key))
        throw UnknownKey("unknown key '" + key + "'");
      if (!kv.emplace(key, val).second)
        throw ParseError("duplicate key '" + key + "'");
    }
  }

  ScenarioConfig c;
  auto take = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) return {};
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_number = [&](const char* key, double& slot) {
    if (auto v = take(key); !v.empty()) slot = parse_number(key, v);
  };

  if (auto v = take("name"); !v.empty()) c.name = v;
  if (auto v = take("mode"); !v.empty()) {
    if (v == "strict") c.strict = true;
    else if (v == "exploratory") c.strict = false;
    else throw ParseError("key 'mode': expected strict or exploratory");
  }
  if (auto v = take("modes"); !v.empty()) c.modes = parse_integer("modes", v);
  take_number("length", c.length);
  take_number("horizon", c.horizon);
  take_number("dt", c.dt);
  if (auto v = take("cadence"); !v.empty())
    c.cadence = parse_integer("cadence", v);

  if (auto v = take("kernel.terms"); !v.empty()) {
    c.kernel_terms.clear();
    for (auto& [a, b] : parse_pair_list("kernel.terms", v))
      c.kernel_terms.emplace_back(parse_number("kernel.terms", a),
                                  parse_number("kernel.terms", b));
  }

  std::string delay_family = "constant";
  if (auto v = take("delay.family"); !v.empty()) delay_family = v;
  if (delay_family == "constant") c.delay.family = DelayFamily::constant;
  else if (delay_family == "sinusoidal") c.delay.family = DelayFamily::sinusoidal;
  else if (delay_family == "piecewise_linear")
    c.delay.family = DelayFamily::piecewise_linear;
  else throw ParseError("key 'delay.family': unknown family '" + delay_family + "'");
  take_number("delay.tau_bar", c.delay.tau_bar);
  if (c.delay.family == DelayFamily::constant) {
    take_number("delay.constant", c.delay.value);
  } else if (c.delay.family == DelayFamily::sinusoidal) {
    take_number("delay.mean", c.delay.mean);
    take_number("delay.amplitude", c.delay.amplitude);
    take_number("delay.frequency", c.delay.frequency);
    take_number("delay.phase", c.delay.phase);
  } else {
    if (auto v = take("delay.knots"); !v.empty()) {
      c.delay.knots.clear();
      for (auto& [a, b] : parse_pair_list("delay.knots", v))
        c.delay.knots.emplace_back(parse_number("delay.knots", a),
                                   parse_number("delay.knots", b));
    }
  }

  std::string gain_family = "constant";
  if (auto v = take("gain.family"); !v.empty()) gain_family = v;
  if (gain_family == "constant") c.gain.family = GainFamily::constant;
  else if (gain_family == "exponential_decay")
    c.gain.family = GainFamily::exponential_decay;
  else if (gain_family == "periodic_pulses")
    c.gain.family = GainFamily::periodic_pulses;
  else if (gain_family == "sign_alternating")
    c.gain.family = GainFamily::sign_alternating;
  else throw ParseError("key 'gain.family': unknown family '" + gain_family + "'");
  take_number("gain.amplitude", c.gain.amplitude);
  if (c.gain.family == GainFamily::exponential_decay)
    take_number("gain.rate", c.gain.rate);
  if (c.gain.family == GainFamily::periodic_pulses) {
    take_number("gain.period", c.gain.period);
    take_number("gain.width", c.gain.width);
  }
  if (c.gain.family == GainFamily::sign_alternating)
    take_number("gain.period", c.gain.period);

  take_number("feedback.lo", c.feedback_lo);
  take_number("feedback.hi", c.feedback_hi);

  std::string source_family = "none";
  if (auto v = take("source.family"); !v.empty()) source_family = v;
  if (source_family == "none") c.source_family = SourceFamily::none;
  else if (source_family == "power") c.source_family = SourceFamily::power;
  else if (source_family == "integral") c.source_family = SourceFamily::integral;
  else throw ParseError("key 'source.family': unknown family '" + source_family + "'");
  if (c.source_family != SourceFamily::none) {
    take_number("source.exponent", c.source_exponent);
    if (auto v = take("source.c_h"); !v.empty()) {
      if (v == "auto") {
        c.c_h_auto = true;
      } else {
        c.c_h_auto = false;
        c.c_h_value = parse_number("source.c_h", v);
      }
    }
  }

  std::string pos_family = "constant";
  if (auto v = take("history.position"); !v.empty()) pos_family = v;
  if (pos_family == "constant") c.hist_position = PositionHistory::constant;
  else if (pos_family == "ramp") c.hist_position = PositionHistory::ramp;
  else throw ParseError("key 'history.position': unknown family '" + pos_family + "'");
  if (c.hist_position == PositionHistory::ramp) {
    take_number("history.ramp_c", c.ramp_c);
    take_number("history.t_hist", c.t_hist);
  }
  if (auto v = take("history.u0"); !v.empty()) {
    c.u0_coeffs.clear();
    for (auto& [a, b] : parse_pair_list("history.u0", v))
      c.u0_coeffs.emplace_back(parse_integer("history.u0", a),
                               parse_number("history.u0", b));
  }
  std::string vel_family = "constant";
  if (auto v = take("history.velocity"); !v.empty()) vel_family = v;
  if (vel_family == "constant") c.hist_velocity = VelocityHistory::constant;
  else if (vel_family == "sinusoidal")
    c.hist_velocity = VelocityHistory::sinusoidal;
  else throw ParseError("key 'history.velocity': unknown family '" + vel_family + "'");
  if (c.hist_velocity == VelocityHistory::sinusoidal)
    take_number("history.vel_frequency", c.vel_frequency);
  if (auto v = take("history.g0"); !v.empty()) {
    c.g0_coeffs.clear();
    for (auto& [a, b] : parse_pair_list("history.g0", v))
      c.g0_coeffs.emplace_back(parse_integer("history.g0", a),
                               parse_number("history.g0", b));
  }
  if (auto v = take("history.scale"); !v.empty()) {
    if (v == "auto") {
      c.scale_auto = true;
    } else {
      c.scale_auto = false;
      c.scale_value = parse_number("history.scale", v);
    }
  }

  if (!kv.empty())
    throw ParseError("key '" + kv.begin()->first +
                     "' does not apply to the selected families");
  return c;
}

/// Canonical form: fixed key order, %.17g numbers, only applicable keys.
/// parse(serialize(c)) reproduces the same bytes, which makes configs safe
/// to diff and rerun.
inline std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream out;
  auto put = [&](const char* key, const std::string& v) {
    out << key << " = " << v << "\n";
  };
  auto put_num = [&](const char* key, double v) { put(key, fmt_g(v)); };
  auto pairs_dd = [&](const std::vector<std::pair<double, double>>& ps) {
    if (ps.empty()) return std::string("none");
    std::string s;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (i) s += " ";
      s += "(" + fmt_g(ps[i].first) + ", " + fmt_g(ps[i].second) + ")";
    }
    return s;
  };
  auto pairs_id = [&](const std::vector<std::pair<int, double>>& ps) {
    if (ps.empty()) return std::string("none");
    std::string s;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (i) s += " ";
      s += "(" + std::to_string(ps[i].first) + ", " + fmt_g(ps[i].second) + ")";
    }
    return s;
  };

  put("name", c.name);
  put("mode", c.strict ? "strict" : "exploratory");
  put("modes", std::to_string(c.modes));
  put_num("length", c.length);
  put_num("horizon", c.horizon);
  put_num("dt", c.dt);
  put("cadence", std::to_string(c.cadence));
  put("kernel.terms", pairs_dd(c.kernel_terms));

  switch (c.delay.family) {
    case DelayFamily::constant:
      put("delay.family", "constant");
      put_num("delay.tau_bar", c.delay.tau_bar);
      put_num("delay.constant", c.delay.value);
      break;
    case DelayFamily::sinusoidal:
      put("delay.family", "sinusoidal");
      put_num("delay.tau_bar", c.delay.tau_bar);
      put_num("delay.mean", c.delay.mean);
      put_num("delay.amplitude", c.delay.amplitude);
      put_num("delay.frequency", c.delay.frequency);
      put_num("delay.phase", c.delay.phase);
      break;
    case DelayFamily::piecewise_linear:
      put("delay.family", "piecewise_linear");
      put_num("delay.tau_bar", c.delay.tau_bar);
      put("delay.knots", pairs_dd(c.delay.knots));
      break;
  }

  switch (c.gain.family) {
    case GainFamily::constant:
      put("gain.family", "constant");
      put_num("gain.amplitude", c.gain.amplitude);
      break;
    case GainFamily::exponential_decay:
      put("gain.family", "exponential_decay");
      put_num("gain.amplitude", c.gain.amplitude);
      put_num("gain.rate", c.gain.rate);
      break;
    case GainFamily::periodic_pulses:
      put("gain.family", "periodic_pulses");
      put_num("gain.amplitude", c.gain.amplitude);
      put_num("gain.period", c.gain.period);
      put_num("gain.width", c.gain.width);
      break;
    case GainFamily::sign_alternating:
      put("gain.family", "sign_alternating");
      put_num("gain.amplitude", c.gain.amplitude);
      put_num("gain.period", c.gain.period);
      break;
  }

  put_num("feedback.lo", c.feedback_lo);
  put_num("feedback.hi", c.feedback_hi);

  put("source.family", family_name(c.source_family));
  if (c.source_family != SourceFamily::none) {
    put_num("source.exponent", c.source_exponent);
    put("source.c_h", c.c_h_auto ? "auto" : fmt_g(c.c_h_value));
  }

  put("history.position",
      c.hist_position == PositionHistory::ramp ? "ramp" : "constant");
  if (c.hist_position == PositionHistory::ramp) {
    put_num("history.ramp_c", c.ramp_c);
    put_num("history.t_hist", c.t_hist);
  }
  put("history.u0", pairs_id(c.u0_coeffs));
  put("history.velocity",
      c.hist_velocity == VelocityHistory::sinusoidal ? "sinusoidal" : "constant");
  if (c.hist_velocity == VelocityHistory::sinusoidal)
    put_num("history.vel_frequency", c.vel_frequency);
  put("history.g0", pairs_id(c.g0_coeffs));
  put("history.scale", c.scale_auto ? "auto" : fmt_g(c.scale_value));
  return out.str();
}

inline ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// "preset:NAME" resolves a built-in scenario; anything else is a file path.
inline ScenarioConfig resolve_config(const std::string& source) {
  if (source.rfind("preset:", 0) == 0) return preset(source.substr(7));
  return load_config_file(source);
}

}  // namespace memwave
