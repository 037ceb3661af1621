#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orars/types.hpp"

namespace orars {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// How to read a delimited dataset file.
struct DatasetFileSpec {
  std::string path;
  char delimiter = ',';
  int target_column = -1;  // -1 selects the last column
  bool has_header = false;
};

/// Raw rectangular numeric table (used by predict, which has no target).
struct NumericTable {
  Matrix values;
  std::vector<std::string> header;  // empty when the file has none
};

/// Strict rectangular parse; any ragged row, empty cell or non-numeric cell
/// fails with the offending row number.
NumericTable read_numeric_table(const std::string& path, char delimiter, bool has_header);

/// Loads a dataset: every non-target column becomes a feature.
Dataset load_csv(const DatasetFileSpec& spec);

/// Writes features followed by the target as the last column, one row per
/// sample, in shortest round-trip float form. load_csv of the result
/// reproduces the dataset bit-exactly.
void write_csv(const Dataset& dataset, const std::string& path, char delimiter = ',');

enum class SynthKind { linear, monotone_noisy, constant };

SynthKind synth_kind_from_string(const std::string& s);
std::string to_string(SynthKind kind);

/// Synthetic dataset generator for oracles and CLI demos. Features are
/// uniform in [0, 1)^dims.
///   linear:         y = w.x + b, with w, b drawn once and recorded
///   monotone_noisy: y = x_0 + normal(0, noise)
///   constant:       y = 1 (exercises degenerate-range paths)
struct SynthResult {
  Dataset dataset;
  Vector weights;  // linear kind only
  double bias = 0.0;
};

SynthResult synth_dataset(SynthKind kind, Index n, Index dims, double noise, std::uint64_t seed);

/// Flat key=value configuration document: one pair per line, '#' comments,
/// duplicate keys rejected. Typed views of the map live next to the structs
/// they configure.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  const std::string& get(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Environment variables named <prefix><UPPERCASE_KEY> override entries
  /// for every key in `known_keys`.
  void apply_env_overrides(const std::vector<std::string>& known_keys,
                           const std::string& prefix = "ORARS_");

  /// Throws InvalidConfig naming the first key not in `known_keys`.
  void reject_unknown_keys(const std::vector<std::string>& known_keys) const;

  // Typed getters; throw InvalidConfig on malformed values.
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Serializes key=value lines sorted by key (the same format parse_file
/// reads), used for effective-config echoes.
std::string to_config_text(const std::map<std::string, std::string>& entries);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace orars
