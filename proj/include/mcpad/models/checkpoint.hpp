#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcpad/models/network.hpp"

namespace mcpad::models {

struct TrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-5;
  int epochs = 30;
  int batch_size = 32;
  double flip_probability = 0.5;
  std::uint64_t seed = 0;
};

nlohmann::json train_config_to_json(const TrainConfig& t);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct TrainingCurve {
  double initial_train_loss = 0.0;
  std::vector<double> train_loss;  ///< running mean over each epoch
  std::vector<double> dev_loss;
  int best_epoch = 0;  ///< 0 = initialization
};

struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  std::string combo;
  TrainingCurve curve;
  std::vector<std::string> names;
  std::vector<std::vector<float>> weights;  ///< parameter order of Network::parameters()
};

inline constexpr int kCheckpointVersion = 1;

Checkpoint capture_checkpoint(Network& net, const TrainConfig& train, const std::string& combo,
                              const TrainingCurve& curve);
/// Copies weights into `net`; throws ModelError on any shape mismatch.
void restore_weights(Network& net, const Checkpoint& ckpt);

/// "MCKP", u32 header length, JSON header (version, configs, combo, curve,
/// parameter names and sizes), then float32 weights in parameter order.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mcpad::models
