#include "mcpad/models/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"

namespace mcpad::models {

nlohmann::json train_config_to_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"weight_decay", t.weight_decay},
          {"epochs", t.epochs},               {"batch_size", t.batch_size},
          {"flip_probability", t.flip_probability}, {"seed", t.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig t;
  try {
    t.learning_rate = j.at("learning_rate").get<double>();
    t.weight_decay = j.at("weight_decay").get<double>();
    t.epochs = j.at("epochs").get<int>();
    t.batch_size = j.at("batch_size").get<int>();
    t.flip_probability = j.at("flip_probability").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("bad train config: ") + e.what());
  }
  return t;
}

Checkpoint capture_checkpoint(Network& net, const TrainConfig& train, const std::string& combo,
                              const TrainingCurve& curve) {
  Checkpoint c;
  c.model = net.config();
  c.train = train;
  c.combo = combo;
  c.curve = curve;
  for (Param* p : net.parameters()) {
    c.names.push_back(p->name);
    c.weights.push_back(p->value);
  }
  return c;
}

void restore_weights(Network& net, const Checkpoint& ckpt) {
  const auto params = net.parameters();
  if (params.size() != ckpt.weights.size()) {
    throw ModelError("checkpoint holds " + std::to_string(ckpt.weights.size()) +
                     " tensors, network has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->size() != ckpt.weights[i].size()) {
      throw ModelError("shape mismatch for " + params[i]->name);
    }
    params[i]->value = ckpt.weights[i];
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json h;
  h["version"] = kCheckpointVersion;
  h["model"] = model_config_to_json(ckpt.model);
  h["train"] = train_config_to_json(ckpt.train);
  h["combo"] = ckpt.combo;
  h["curve"] = {{"initial_train_loss", ckpt.curve.initial_train_loss},
                {"train_loss", ckpt.curve.train_loss},
                {"dev_loss", ckpt.curve.dev_loss},
                {"best_epoch", ckpt.curve.best_epoch}};
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t i = 0; i < ckpt.weights.size(); ++i) {
    params.push_back({{"name", ckpt.names.at(i)}, {"size", ckpt.weights[i].size()}});
  }
  h["parameters"] = params;
  const std::string header = h.dump();

  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  binio::write_magic(out, "MCKP");
  binio::write_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& w : ckpt.weights) binio::write_f32(out, w);
  if (!out) throw IoError("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  binio::expect_magic(in, "MCKP", path);
  const std::uint32_t len = binio::read_u32(in);
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw ParseError(path + ": truncated header");
  Checkpoint c;
  try {
    const auto h = nlohmann::json::parse(header);
    const int version = h.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));
    }
    c.model = model_config_from_json(h.at("model"));
    c.train = train_config_from_json(h.at("train"));
    c.combo = h.at("combo").get<std::string>();
    const auto& cv = h.at("curve");
    c.curve.initial_train_loss = cv.at("initial_train_loss").get<double>();
    c.curve.train_loss = cv.at("train_loss").get<std::vector<double>>();
    c.curve.dev_loss = cv.at("dev_loss").get<std::vector<double>>();
    c.curve.best_epoch = cv.at("best_epoch").get<int>();
    for (const auto& p : h.at("parameters")) {
      c.names.push_back(p.at("name").get<std::string>());
      std::vector<float> w(p.at("size").get<std::size_t>());
      binio::read_f32(in, w);
      c.weights.push_back(std::move(w));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return c;
}

}  // namespace mcpad::models
