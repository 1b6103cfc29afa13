// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a flat, sectioned key-value format
// ([section] headers, `key = value` lines, `#` comments). Unknown sections
// or keys are rejected. The grammar is documented in docs/formats.md.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hsqkd/channel.hpp"
#include "hsqkd/errors.hpp"
#include "hsqkd/optimizer.hpp"
#include "hsqkd/sources.hpp"

namespace hsqkd::cli {

struct McSettings {
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 1;
  double tv_tolerance = 5e-3;
  double click_tolerance = 3e-3;
};

struct ExperimentConfig {
  SourceSpec source;
  bool mu_fixed = false;  // [source] mu given explicitly
  Protocol protocol = Protocol::NoDecoy;
  double f_ec = 1.05;
  ChannelDetectorSpec channel;
  std::vector<double> losses;
  MuSearch search;
  McSettings mc;
  std::string label;
  std::string csv_path;
  std::string svg_path;
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& context, const std::string& what) {
  throw error(errc::config_parse, context + ": " + what);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& context, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) parse_fail(context, "trailing characters in '" + v + "'");
    return d;
  } catch (const std::logic_error&) {
    parse_fail(context, "expected a number, got '" + v + "'");
  }
}

inline std::int64_t to_int(const std::string& context, const std::string& v) {
  const double d = to_double(context, v);
  const auto i = static_cast<std::int64_t>(d);
  if (double(i) != d) parse_fail(context, "expected an integer, got '" + v + "'");
  return i;
}

// `a:b:step` ranges (inclusive end within half a step) or comma lists.
inline std::vector<double> parse_loss_grid(const std::string& context, const std::string& v) {
  std::vector<double> losses;
  if (v.find(':') != std::string::npos) {
    std::istringstream in(v);
    std::string part;
    std::vector<double> fields;
    while (std::getline(in, part, ':')) fields.push_back(to_double(context, trim(part)));
    if (fields.size() != 3) parse_fail(context, "range must be lo:hi:step");
    const double lo = fields[0], hi = fields[1], step = fields[2];
    if (step <= 0.0 || hi < lo) parse_fail(context, "range must satisfy lo <= hi, step > 0");
    for (double x = lo; x <= hi + step * 0.5; x += step) losses.push_back(x);
    return losses;
  }
  std::istringstream in(v);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (!part.empty()) losses.push_back(to_double(context, part));
  }
  return losses;
}

struct RawConfig {
  // section -> key -> value; consumed keys are checked off.
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::set<std::pair<std::string, std::string>> consumed;
  std::string origin;

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
  }
  std::string take(const std::string& sec, const std::string& key) {
    consumed.insert({sec, key});
    return sections.at(sec).at(key);
  }
  void reject_unconsumed() const {
    for (const auto& [sec, kv] : sections)
      for (const auto& [key, value] : kv)
        if (!consumed.count({sec, key}))
          parse_fail(origin, "unknown key [" + sec + "] " + key);
  }
};

inline RawConfig tokenize(std::istream& in, const std::string& origin) {
  static const std::set<std::string> known_sections = {
      "source", "channel", "receiver", "protocol", "optimizer", "mc", "output"};
  RawConfig raw;
  raw.origin = origin;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(where, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_sections.count(section)) parse_fail(where, "unknown section [" + section + "]");
      raw.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(where, "expected key = value");
    if (section.empty()) parse_fail(where, "key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) parse_fail(where, "empty key or value");
    if (!raw.sections[section].emplace(key, value).second)
      parse_fail(where, "duplicate key '" + key + "'");
  }
  return raw;
}

inline SourceKind parse_kind(const std::string& context, const std::string& v) {
  if (v == "wcs") return SourceKind::WCS;
  if (v == "single_photon") return SourceKind::IdealSinglePhoton;
  if (v == "mhps") return SourceKind::MHPS;
  if (v == "smhps") return SourceKind::SMHPS;
  if (v == "amhps") return SourceKind::AMHPS;
  parse_fail(context, "unknown source kind '" + v + "'");
}

inline Protocol parse_protocol(const std::string& context, const std::string& v) {
  if (v == "no_decoy") return Protocol::NoDecoy;
  if (v == "active_decoy") return Protocol::ActiveDecoy;
  if (v == "passive_decoy") return Protocol::PassiveDecoy;
  parse_fail(context, "unknown protocol '" + v + "'");
}

inline bool parse_bool(const std::string& context, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  parse_fail(context, "expected a boolean, got '" + v + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  using namespace detail;
  RawConfig raw = tokenize(in, origin);
  ExperimentConfig cfg;

  if (!raw.has("source", "kind")) parse_fail(origin, "[source] kind is required");
  cfg.source.kind = parse_kind(origin, raw.take("source", "kind"));
  if (raw.has("source", "m")) cfg.source.m = int(to_int(origin, raw.take("source", "m")));
  if (raw.has("source", "eta")) cfg.source.eta = to_double(origin, raw.take("source", "eta"));
  if (raw.has("source", "gamma"))
    cfg.source.gamma = to_double(origin, raw.take("source", "gamma"));
  if (raw.has("source", "mu")) {
    cfg.source.mu = to_double(origin, raw.take("source", "mu"));
    cfg.mu_fixed = true;
  }
  if (raw.has("source", "mu_min")) cfg.search.mu_lo = to_double(origin, raw.take("source", "mu_min"));
  if (raw.has("source", "mu_max")) cfg.search.mu_hi = to_double(origin, raw.take("source", "mu_max"));

  if (raw.has("channel", "visibility"))
    cfg.channel.visibility = to_double(origin, raw.take("channel", "visibility"));
  if (raw.has("channel", "loss_db"))
    cfg.losses = parse_loss_grid(origin, raw.take("channel", "loss_db"));
  if (raw.has("channel", "exact_yield"))
    cfg.channel.exact_yield = parse_bool(origin, raw.take("channel", "exact_yield"));

  if (raw.has("receiver", "t_b")) cfg.channel.t_b = to_double(origin, raw.take("receiver", "t_b"));
  if (raw.has("receiver", "eta_b"))
    cfg.channel.eta_b = to_double(origin, raw.take("receiver", "eta_b"));
  if (raw.has("receiver", "p_dark"))
    cfg.channel.p_dark = to_double(origin, raw.take("receiver", "p_dark"));

  if (raw.has("protocol", "type"))
    cfg.protocol = parse_protocol(origin, raw.take("protocol", "type"));
  if (raw.has("protocol", "f_ec")) cfg.f_ec = to_double(origin, raw.take("protocol", "f_ec"));

  if (raw.has("optimizer", "grid_points"))
    cfg.search.grid_points = int(to_int(origin, raw.take("optimizer", "grid_points")));
  if (raw.has("optimizer", "rel_tol"))
    cfg.search.rel_tol = to_double(origin, raw.take("optimizer", "rel_tol"));

  if (raw.has("mc", "trials"))
    cfg.mc.trials = std::uint64_t(to_int(origin, raw.take("mc", "trials")));
  if (raw.has("mc", "seed")) cfg.mc.seed = std::uint64_t(to_int(origin, raw.take("mc", "seed")));
  if (raw.has("mc", "tv_tolerance"))
    cfg.mc.tv_tolerance = to_double(origin, raw.take("mc", "tv_tolerance"));
  if (raw.has("mc", "click_tolerance"))
    cfg.mc.click_tolerance = to_double(origin, raw.take("mc", "click_tolerance"));

  if (raw.has("output", "label")) cfg.label = raw.take("output", "label");
  if (raw.has("output", "csv")) cfg.csv_path = raw.take("output", "csv");
  if (raw.has("output", "svg")) cfg.svg_path = raw.take("output", "svg");

  raw.reject_unconsumed();

  // Cross-field validation beyond SourceSpec's own invariants.
  try {
    validate(cfg.source);
  } catch (const error& e) {
    parse_fail(origin, e.what());
  }
  if (cfg.protocol == Protocol::PassiveDecoy && !cfg.source.heralded())
    parse_fail(origin, "passive decoy requires a heralded architecture (smhps or amhps)");
  if (!(cfg.f_ec >= 1.0)) parse_fail(origin, "f_ec must be >= 1");
  for (double l : cfg.losses)
    if (!(l >= 0.0)) parse_fail(origin, "losses must be >= 0 dB");
  if (cfg.label.empty()) {
    std::string stem = origin;
    const auto slash = stem.find_last_of('/');
    if (slash != std::string::npos) stem = stem.substr(slash + 1);
    const auto dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    cfg.label = stem.empty() ? "experiment" : stem;
  }
  if (cfg.csv_path.empty()) cfg.csv_path = cfg.label + ".csv";
  if (cfg.svg_path.empty()) cfg.svg_path = cfg.label + ".svg";
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::config_parse, "cannot open config file " + path);
  return parse_config(in, path);
}

}  // namespace hsqkd::cli
