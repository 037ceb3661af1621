#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "orars/mlp.hpp"
#include "orars/normalize.hpp"
#include "orars/types.hpp"

namespace orars {

/// A trained model bundle: the network, the normalization statistics its
/// inputs expect, and (for anchor-based methods) the anchor set itself.
/// The on-disk container is a versioned JSON header followed by raw
/// little-endian 64-bit floats, so save/load round-trips are bit-exact.
struct Checkpoint {
  std::string method;  // "grnn" | "orars" | "sorars"
  MlpModel model;
  NormStats norm;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> metadata;

  bool has_anchors = false;
  Matrix anchor_features;  // normalized features, row per anchor
  Vector anchor_scores;    // ground-truth scores, anchor order
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace orars
