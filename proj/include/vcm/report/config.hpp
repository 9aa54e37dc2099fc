#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vcm/error.hpp"
#include "vcm/util/binary_io.hpp"
#include "vcm/util/format.hpp"

namespace vcm {

/// Flat key=value settings. "[section]" headers prefix the keys that follow
/// ("section.key"). Lines starting with '#' or ';' are comments; values may be
/// double-quoted. Lists are comma separated.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& source = "<config>") {
    Config cfg;
    std::string section;
    int line_no = 0;
    for (auto raw : fmt::split(text, '\n')) {
      ++line_no;
      const auto line = fmt::trim(raw);
      if (line.empty() || line.front() == '#' || line.front() == ';') continue;
      const std::string where = source + ":" + std::to_string(line_no);
      if (line.front() == '[') {
        if (line.back() != ']') fail(ErrorCode::ConfigError, where + ": unterminated section header");
        section = std::string(fmt::trim(line.substr(1, line.size() - 2)));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(ErrorCode::ConfigError, where + ": expected key = value");
      auto key = std::string(fmt::trim(line.substr(0, eq)));
      auto value = fmt::trim(line.substr(eq + 1));
      if (key.empty()) fail(ErrorCode::ConfigError, where + ": empty key");
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
      if (!section.empty()) key = section + "." + key;
      if (cfg.values_.count(key)) fail(ErrorCode::ConfigError, where + ": duplicate key '" + key + "'");
      cfg.values_[key] = std::string(value);
    }
    return cfg;
  }

  static Config load(const std::filesystem::path& path) { return parse(io::read_text(path), path.string()); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<double> number(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    auto d = fmt::parse_double(*v);
    if (!d) fail(ErrorCode::ConfigError, "config key '" + key + "' is not a number: " + *v);
    return d;
  }

  std::optional<long long> integer(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    auto i = fmt::parse_int(*v);
    if (!i) fail(ErrorCode::ConfigError, "config key '" + key + "' is not an integer: " + *v);
    return i;
  }

  std::optional<std::vector<double>> numbers(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    std::vector<double> out;
    for (auto part : fmt::split(*v, ',')) {
      auto d = fmt::parse_double(part);
      if (!d) fail(ErrorCode::ConfigError, "config key '" + key + "' has a non-numeric entry");
      out.push_back(*d);
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace vcm
