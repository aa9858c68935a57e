#include "medqa/model_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace medqa {

using nlohmann::json;

void save_model(const HbamModel& model, std::ostream& out) {
  const auto& p = model.params;
  json doc;
  doc["format"] = "hbam-model";
  doc["version"] = kModelFormatVersion;
  doc["hidden"] = p.hidden;
  doc["embedding_dim"] = p.embedding_dim;
  doc["attention_dim"] = p.attention_dim();
  doc["max_seq_length"] = model.max_seq_length;
  doc["seed"] = p.seed;
  json arrays = json::array();
  for (const auto& block : p.blocks()) {
    arrays.push_back({{"name", block.name},
                      {"rows", block.rows},
                      {"cols", block.cols},
                      {"data", std::vector<double>(block.values.begin(), block.values.end())}});
  }
  doc["parameters"] = std::move(arrays);
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("failed to write model");
}

HbamModel load_model(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "hbam-model") throw std::runtime_error("not an hbam-model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw std::runtime_error("unsupported model format version " + std::to_string(version));
    }
    HbamModel model;
    model.params = HbamParameters::zeros(doc.at("hidden").get<std::size_t>(),
                                         doc.at("embedding_dim").get<std::size_t>(),
                                         doc.at("attention_dim").get<std::size_t>());
    model.params.seed = doc.at("seed").get<std::uint64_t>();
    model.max_seq_length = doc.at("max_seq_length").get<std::size_t>();
    if (model.max_seq_length == 0) throw std::runtime_error("max_seq_length must be >= 1");

    const auto& arrays = doc.at("parameters");
    auto blocks = model.params.blocks();
    if (arrays.size() != blocks.size()) {
      throw std::runtime_error("expected " + std::to_string(blocks.size()) +
                               " parameter arrays, found " + std::to_string(arrays.size()));
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& entry = arrays[i];
      if (entry.at("name") != blocks[i].name) {
        throw std::runtime_error("parameter " + std::to_string(i) + " should be " +
                                 blocks[i].name);
      }
      const auto data = entry.at("data").get<std::vector<double>>();
      if (entry.at("rows").get<std::size_t>() != blocks[i].rows ||
          entry.at("cols").get<std::size_t>() != blocks[i].cols ||
          data.size() != blocks[i].values.size()) {
        throw std::runtime_error("parameter " + blocks[i].name + " has the wrong shape");
      }
      std::copy(data.begin(), data.end(), blocks[i].values.begin());
    }
    if (!all_finite(model.params.flatten())) {
      throw std::runtime_error("model contains non-finite parameters");
    }
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed model file: ") + e.what());
  }
}

void save_model_file(const HbamModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  save_model(model, out);
}

HbamModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace medqa
