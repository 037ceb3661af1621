#include "orars/io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "orars/rng.hpp"

namespace orars {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  const std::string_view t = trim(cell);
  if (t.empty()) {
    throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                     ": empty cell");
  }
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                     ": cannot parse '" + std::string(t) + "' as a number");
  }
  return value;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

NumericTable read_numeric_table(const std::string& path, char delimiter, bool has_header) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }

  NumericTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (trim(line).empty()) {
      continue;
    }
    const std::vector<std::string> cells = split(line, delimiter);
    if (line_no == 1 && has_header) {
      for (const auto& c : cells) {
        table.header.emplace_back(trim(c));
      }
      width = cells.size();
      continue;
    }
    if (width == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw ParseError("row " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " cells, found " + std::to_string(cells.size()));
    }
    std::vector<double> parsed(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      parsed[c] = parse_cell(cells[c], line_no, c);
    }
    rows.push_back(std::move(parsed));
  }
  if (rows.empty()) {
    throw ParseError("'" + path + "': no data rows");
  }

  table.values = Matrix(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  return table;
}

Dataset load_csv(const DatasetFileSpec& spec) {
  const NumericTable table = read_numeric_table(spec.path, spec.delimiter, spec.has_header);
  const Index width = table.values.cols();
  Index target = spec.target_column < 0 ? width - 1 : static_cast<Index>(spec.target_column);
  if (target < 0 || target >= width) {
    throw InvalidConfig("load_csv: target column " + std::to_string(spec.target_column) +
                        " outside table width " + std::to_string(width));
  }
  if (width < 2) {
    throw ParseError("'" + spec.path + "': need at least one feature column plus the target");
  }

  Matrix features(table.values.rows(), width - 1);
  Index out_col = 0;
  for (Index c = 0; c < width; ++c) {
    if (c == target) continue;
    features.col(out_col++) = table.values.col(c);
  }

  std::string name = spec.path;
  const std::size_t slash = name.find_last_of('/');
  if (slash != std::string::npos) {
    name = name.substr(slash + 1);
  }
  return Dataset(std::move(name), std::move(features), table.values.col(target));
}

void write_csv(const Dataset& dataset, const std::string& path, char delimiter) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  for (Index r = 0; r < dataset.size(); ++r) {
    for (Index c = 0; c < dataset.feature_dim(); ++c) {
      out << format_double(dataset.features()(r, c)) << delimiter;
    }
    out << format_double(dataset.label(r)) << '\n';
  }
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "linear") return SynthKind::linear;
  if (s == "monotone_noisy") return SynthKind::monotone_noisy;
  if (s == "constant") return SynthKind::constant;
  throw InvalidConfig("unknown synthetic kind '" + s +
                      "' (expected linear|monotone_noisy|constant)");
}

std::string to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::linear: return "linear";
    case SynthKind::monotone_noisy: return "monotone_noisy";
    case SynthKind::constant: return "constant";
  }
  return "?";
}

SynthResult synth_dataset(SynthKind kind, Index n, Index dims, double noise, std::uint64_t seed) {
  if (n < 2) {
    throw InvalidConfig("synth_dataset: n must be at least 2");
  }
  if (dims < 1) {
    throw InvalidConfig("synth_dataset: dims must be positive");
  }
  if (noise < 0.0) {
    throw InvalidConfig("synth_dataset: noise must be nonnegative");
  }

  Rng rng(seed);
  Matrix features(n, dims);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < dims; ++c) {
      features(r, c) = rng.uniform();
    }
  }

  Vector weights;
  double bias = 0.0;
  Vector labels(n);
  std::string name;
  switch (kind) {
    case SynthKind::linear: {
      weights = rng.uniform_vector(dims, -2.0, 2.0);
      bias = rng.uniform(-1.0, 1.0);
      labels = features * weights;
      labels.array() += bias;
      if (noise > 0.0) {
        labels += rng.normal_vector(n, 0.0, noise);
      }
      name = "synth_linear";
      break;
    }
    case SynthKind::monotone_noisy: {
      labels = features.col(0);
      if (noise > 0.0) {
        labels += rng.normal_vector(n, 0.0, noise);
      }
      name = "synth_monotone";
      break;
    }
    case SynthKind::constant: {
      labels.setOnes();
      name = "synth_constant";
      break;
    }
  }
  return SynthResult{Dataset(std::move(name), std::move(features), std::move(labels)),
                     std::move(weights), bias};
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config '" + path + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key{trim(t.substr(0, eq))};
    const std::string value{trim(t.substr(eq + 1))};
    if (key.empty()) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    if (config.entries_.count(key) > 0) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    config.entries_[key] = value;
  }
  return config;
}

const std::string& KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw InvalidConfig("missing config key '" + key + "'");
  }
  return it->second;
}

void KeyValueConfig::apply_env_overrides(const std::vector<std::string>& known_keys,
                                         const std::string& prefix) {
  for (const auto& key : known_keys) {
    std::string env_name = prefix;
    for (char ch : key) {
      env_name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    }
    if (const char* value = std::getenv(env_name.c_str())) {
      entries_[key] = value;
    }
  }
}

void KeyValueConfig::reject_unknown_keys(const std::vector<std::string>& known_keys) const {
  for (const auto& [key, value] : entries_) {
    bool known = false;
    for (const auto& k : known_keys) {
      if (k == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw InvalidConfig("unknown config key '" + key + "'");
    }
  }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw InvalidConfig("config key '" + key + "': cannot parse '" + v + "' as an integer");
  }
  return out;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw InvalidConfig("config key '" + key + "': cannot parse '" + v +
                        "' as an unsigned integer");
  }
  return out;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw InvalidConfig("config key '" + key + "': cannot parse '" + v + "' as a number");
  }
  return out;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidConfig("config key '" + key + "': cannot parse '" + v + "' as a boolean");
}

std::string to_config_text(const std::map<std::string, std::string>& entries) {
  std::string out;
  for (const auto& [key, value] : entries) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace orars
