#include "orars/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace orars {

static_assert(std::endian::native == std::endian::little,
              "checkpoint tensor payload assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'O', 'R', 'C', 'K', 'P', 'T', '0', '1'};

using json = nlohmann::json;
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TensorRef {
  std::string name;
  Matrix values;  // vectors are stored as single-column matrices
};

void write_tensor(std::ofstream& out, const Matrix& m) {
  const RowMajor rm = m;  // payload is row-major
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(static_cast<std::size_t>(rm.size()) * sizeof(double)));
}

Matrix read_tensor(std::ifstream& in, Index rows, Index cols, const std::string& path) {
  RowMajor rm(rows, cols);
  in.read(reinterpret_cast<char*>(rm.data()),
          static_cast<std::streamsize>(static_cast<std::size_t>(rm.size()) * sizeof(double)));
  if (!in) {
    throw ParseError("'" + path + "': truncated tensor payload");
  }
  return Matrix(rm);
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  const auto& cfg = checkpoint.model.config;
  json header;
  header["method"] = checkpoint.method;
  header["seed"] = checkpoint.seed;
  header["metadata"] = checkpoint.metadata;
  header["config"] = {
      {"input_dim", cfg.input_dim},
      {"hidden_units", cfg.hidden_units},
      {"dropout_rate", cfg.dropout_rate},
      {"learning_rate", cfg.learning_rate},
      {"output", cfg.output == OutputHead::probability ? "probability" : "regression"},
  };
  header["has_anchors"] = checkpoint.has_anchors;

  std::vector<TensorRef> tensors;
  for (std::size_t l = 0; l < checkpoint.model.weights.size(); ++l) {
    tensors.push_back({"w" + std::to_string(l), checkpoint.model.weights[l]});
    tensors.push_back({"b" + std::to_string(l), checkpoint.model.biases[l]});
  }
  tensors.push_back({"norm_mean", checkpoint.norm.mean});
  tensors.push_back({"norm_stddev", checkpoint.norm.stddev});
  if (checkpoint.has_anchors) {
    tensors.push_back({"anchor_features", checkpoint.anchor_features});
    tensors.push_back({"anchor_scores", checkpoint.anchor_scores});
  }

  json manifest = json::array();
  for (const auto& t : tensors) {
    manifest.push_back({{"name", t.name}, {"rows", t.values.rows()}, {"cols", t.values.cols()}});
  }
  header["tensors"] = manifest;

  const std::string header_text = header.dump();
  const std::uint64_t header_size = header_text.size();

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&header_size), sizeof(header_size));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& t : tensors) {
    write_tensor(out, t.values);
  }
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("'" + path + "' is not a checkpoint file");
  }
  std::uint64_t header_size = 0;
  in.read(reinterpret_cast<char*>(&header_size), sizeof(header_size));
  std::string header_text(header_size, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_size));
  if (!in) {
    throw ParseError("'" + path + "': truncated header");
  }

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': bad header: " + std::string(e.what()));
  }

  Checkpoint checkpoint;
  checkpoint.method = header.at("method").get<std::string>();
  checkpoint.seed = header.at("seed").get<std::uint64_t>();
  checkpoint.metadata = header.at("metadata").get<std::map<std::string, std::string>>();
  checkpoint.has_anchors = header.at("has_anchors").get<bool>();

  const json& cfg = header.at("config");
  MlpConfig config;
  config.input_dim = cfg.at("input_dim").get<Index>();
  config.hidden_units = cfg.at("hidden_units").get<Index>();
  config.dropout_rate = cfg.at("dropout_rate").get<double>();
  config.learning_rate = cfg.at("learning_rate").get<double>();
  config.output = cfg.at("output").get<std::string>() == "probability"
                      ? OutputHead::probability
                      : OutputHead::regression;
  checkpoint.model.config = config;

  std::map<std::string, Matrix> tensors;
  for (const json& t : header.at("tensors")) {
    const Index rows = t.at("rows").get<Index>();
    const Index cols = t.at("cols").get<Index>();
    tensors[t.at("name").get<std::string>()] = read_tensor(in, rows, cols, path);
  }

  auto take = [&](const std::string& name) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw ParseError("'" + path + "': missing tensor '" + name + "'");
    }
    return std::move(it->second);
  };

  for (int l = 0; l < MlpConfig::n_blocks + 1; ++l) {
    checkpoint.model.weights.push_back(take("w" + std::to_string(l)));
    checkpoint.model.biases.push_back(Vector(take("b" + std::to_string(l)).col(0)));
  }
  checkpoint.norm.mean = Vector(take("norm_mean").col(0));
  checkpoint.norm.stddev = Vector(take("norm_stddev").col(0));
  if (checkpoint.has_anchors) {
    checkpoint.anchor_features = take("anchor_features");
    checkpoint.anchor_scores = Vector(take("anchor_scores").col(0));
  }
  return checkpoint;
}

}  // namespace orars
