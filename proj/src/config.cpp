#include "deferlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "deferlab/errors.hpp"
#include "deferlab/io.hpp"

namespace deferlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full)) {
      throw ConfigError("duplicate key: " + full);
    }
    cfg.values_[full] = value;
  }
  return cfg;
}

Config Config::load(const std::string& path) { return parse(read_text_file(path)); }

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::take(const std::string& key) {
  consumed_.insert(key);
  return values_.at(key);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  return take(key);
}

std::string Config::require_string(const std::string& key) {
  if (!has(key)) throw ConfigError("missing required key: " + key);
  return take(key);
}

namespace {

long long parse_ll(const std::string& key, const std::string& raw) {
  long long v = 0;
  const char* first = raw.data();
  const char* last = raw.data() + raw.size();
  const std::from_chars_result res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError("key " + key + ": not an integer: '" + raw + "'");
  }
  return v;
}

double parse_d(const std::string& key, const std::string& raw) {
  double v = 0.0;
  const char* first = raw.data();
  const char* last = raw.data() + raw.size();
  const std::from_chars_result res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError("key " + key + ": not a number: '" + raw + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : raw) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

}  // namespace

int Config::get_int(const std::string& key, int fallback) {
  if (!has(key)) return fallback;
  return static_cast<int>(parse_ll(key, take(key)));
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const long long v = parse_ll(key, take(key));
  if (v < 0) throw ConfigError("key " + key + ": must be non-negative");
  return static_cast<std::uint64_t>(v);
}

double Config::get_double(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  return parse_d(key, take(key));
}

bool Config::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const std::string raw = take(key);
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw ConfigError("key " + key + ": not a boolean: '" + raw + "'");
}

std::vector<double> Config::get_double_list(const std::string& key, std::vector<double> fallback) {
  if (!has(key)) return fallback;
  const std::string raw = take(key);
  std::vector<double> out;
  for (const std::string& part : split_list(raw)) {
    if (part.empty()) throw ConfigError("key " + key + ": empty list element");
    out.push_back(parse_d(key, part));
  }
  return out;
}

std::vector<int> Config::get_int_list(const std::string& key, std::vector<int> fallback) {
  if (!has(key)) return fallback;
  const std::string raw = take(key);
  std::vector<int> out;
  for (const std::string& part : split_list(raw)) {
    if (part.empty()) throw ConfigError("key " + key + ": empty list element");
    out.push_back(static_cast<int>(parse_ll(key, part)));
  }
  return out;
}

void Config::finish() const {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const std::string& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
}

ExperimentConfig read_experiment_config(Config& cfg, int default_trials) {
  ExperimentConfig out;
  out.experiment = cfg.require_string("experiment");
  out.seed = cfg.get_uint64("seed", 0);
  out.trials = cfg.get_int("trials", default_trials);
  out.output_dir = cfg.get_string("output_dir", "out");
  out.threads = cfg.get_int("threads", 0);
  out.emit_gnuplot = cfg.get_bool("emit_gnuplot", false);
  if (out.trials < 1) throw ConfigError("trials must be at least 1");
  if (out.threads < 0) throw ConfigError("threads must be non-negative");
  return out;
}

}  // namespace deferlab
