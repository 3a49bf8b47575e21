#pragma once

// Experiment configuration: a sectioned key-value text file.
//
//   # comment
//   [model]
//   A  = [[-1.0]]
//   B  = [[1.0]]
//   M  = [[1.0]]
//   T  = 1.0
//   X0 = [0.0]
//
//   [grid]
//   kind    = uniform          # uniform | terminal-optimal | integral-optimal | file
//   N       = 4096
//   N_sweep = [16, 32, 64]
//   file    = grid.csv         # kind = file: CSV with header t, relative to this file
//   panels  = 4096             # density mesh
//
//   [mc]
//   paths = 100000
//   seed  = 42
//
//   [ou]
//   T_sweep = [0.1, 1, 30]
//
//   [output]
//   dir = out
//
// Array values use JSON bracket syntax.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sde_gridopt/error.hpp"
#include "sde_gridopt/grid.hpp"
#include "sde_gridopt/model.hpp"

namespace sde_gridopt::cli {

enum class GridKind { uniform, terminal_optimal, integral_optimal, file };

inline std::string_view to_string(GridKind kind) {
  switch (kind) {
    case GridKind::uniform: return "uniform";
    case GridKind::terminal_optimal: return "terminal-optimal";
    case GridKind::integral_optimal: return "integral-optimal";
    case GridKind::file: return "file";
  }
  return "unknown";
}

struct ExperimentConfig {
  LinearSdeModel model{Matrix(), Matrix(), Matrix(), 0.0};
  Vector x0;
  GridKind grid_kind = GridKind::uniform;
  std::vector<std::size_t> n_sweep;  // strictly increasing, never empty
  std::string grid_file;
  std::size_t panels = kDefaultPanels;
  std::size_t paths = 100000;
  std::uint64_t seed = 0;
  std::vector<double> t_sweep;
  std::string out_dir = ".";
};

/// Raw `section.key -> value` pairs.
using KeyValues = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline KeyValues parse_key_values(std::istream& is) {
  KeyValues out;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(lineno);
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      section = trim(line.substr(1, line.size() - 2));
      detail::require(!section.empty(), ErrorKind::parse, where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    detail::require(eq != std::string::npos, ErrorKind::parse, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    detail::require(!key.empty(), ErrorKind::parse, where + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    detail::require(!out.count(full), ErrorKind::parse, where + ": duplicate key " + full);
    out[full] = trim(line.substr(eq + 1));
  }
  return out;
}

namespace detail {

using sde_gridopt::detail::require;

inline nlohmann::json parse_array(const std::string& key, const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    require(j.is_array(), ErrorKind::parse, key + ": expected an array");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, key + ": " + e.what());
  }
}

inline Matrix parse_matrix(const std::string& key, const std::string& text) {
  const auto j = parse_array(key, text);
  require(!j.empty() && j.front().is_array() && !j.front().empty(), ErrorKind::parse,
          key + ": expected a nested array of rows");
  const std::size_t cols = j.front().size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    require(j[r].is_array() && j[r].size() == cols, ErrorKind::parse, key + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      require(j[r][c].is_number(), ErrorKind::parse, key + ": non-numeric entry");
      m(Eigen::Index(r), Eigen::Index(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

inline std::vector<double> parse_reals(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& v : parse_array(key, text)) {
    require(v.is_number(), ErrorKind::parse, key + ": non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

inline double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc() && ptr == text.data() + text.size(), ErrorKind::parse,
          key + ": expected a number, got '" + text + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc() && ptr == text.data() + text.size(), ErrorKind::parse,
          key + ": expected an unsigned 64-bit integer, got '" + text + "'");
  return v;
}

inline std::vector<std::size_t> parse_counts(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& v : parse_array(key, text)) {
    require(v.is_number_unsigned(), ErrorKind::parse, key + ": expected positive integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
  KeyValues kv = parse_key_values(is);
  const auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  const auto need = [&](const std::string& key) {
    auto v = take(key);
    detail::require(v.has_value(), ErrorKind::parse, "missing config key " + key);
    return *v;
  };

  ExperimentConfig cfg;
  const Matrix a = detail::parse_matrix("model.A", need("model.A"));
  const Matrix b = detail::parse_matrix("model.B", need("model.B"));
  Matrix m;
  if (auto v = take("model.M"))
    m = detail::parse_matrix("model.M", *v);
  else
    m = Matrix::Identity(a.rows(), a.rows());
  const double horizon = detail::parse_real("model.T", need("model.T"));
  cfg.model = LinearSdeModel(a, b, m, horizon);
  validate_model(cfg.model);

  if (auto v = take("model.X0")) {
    const auto x = detail::parse_reals("model.X0", *v);
    cfg.x0 = Eigen::Map<const Vector>(x.data(), Eigen::Index(x.size()));
  } else {
    cfg.x0 = Vector::Zero(a.rows());
  }
  detail::require(cfg.x0.size() == a.rows(), ErrorKind::dimension_mismatch,
                  "model.X0: dimension does not match A");

  if (auto v = take("grid.kind")) {
    if (*v == "uniform") cfg.grid_kind = GridKind::uniform;
    else if (*v == "terminal-optimal") cfg.grid_kind = GridKind::terminal_optimal;
    else if (*v == "integral-optimal") cfg.grid_kind = GridKind::integral_optimal;
    else if (*v == "file") cfg.grid_kind = GridKind::file;
    else throw Error(ErrorKind::parse, "grid.kind: unknown kind '" + *v + "'");
  }
  if (auto v = take("grid.N_sweep")) cfg.n_sweep = detail::parse_counts("grid.N_sweep", *v);
  if (auto v = take("grid.N")) {
    const auto n = detail::parse_u64("grid.N", *v);
    if (cfg.n_sweep.empty()) cfg.n_sweep.push_back(std::size_t(n));
  }
  if (auto v = take("grid.file")) cfg.grid_file = *v;
  if (auto v = take("grid.panels")) cfg.panels = std::size_t(detail::parse_u64("grid.panels", *v));
  detail::require(cfg.panels >= 2 && cfg.panels % 2 == 0, ErrorKind::parse,
                  "grid.panels: must be even and >= 2");
  if (cfg.grid_kind == GridKind::file) {
    detail::require(!cfg.grid_file.empty(), ErrorKind::parse, "grid.kind = file needs grid.file");
  } else {
    if (cfg.n_sweep.empty()) cfg.n_sweep.push_back(64);
    for (std::size_t i = 0; i < cfg.n_sweep.size(); ++i) {
      detail::require(cfg.n_sweep[i] >= 1, ErrorKind::parse, "grid.N_sweep: N >= 1");
      detail::require(i == 0 || cfg.n_sweep[i] > cfg.n_sweep[i - 1], ErrorKind::parse,
                      "grid.N_sweep: must be strictly increasing");
    }
  }

  if (auto v = take("mc.paths")) cfg.paths = std::size_t(detail::parse_u64("mc.paths", *v));
  if (auto v = take("mc.seed")) cfg.seed = detail::parse_u64("mc.seed", *v);
  if (auto v = take("ou.T_sweep")) cfg.t_sweep = detail::parse_reals("ou.T_sweep", *v);
  if (auto v = take("output.dir")) cfg.out_dir = *v;

  if (!kv.empty()) throw Error(ErrorKind::parse, "unknown config key " + kv.begin()->first);
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  detail::require(static_cast<bool>(is), ErrorKind::io, "cannot open config " + path);
  ExperimentConfig cfg = parse_config(is);
  // A relative grid file is resolved against the config's directory.
  if (!cfg.grid_file.empty() && std::filesystem::path(cfg.grid_file).is_relative())
    cfg.grid_file = (std::filesystem::path(path).parent_path() / cfg.grid_file).string();
  return cfg;
}

}  // namespace sde_gridopt::cli
