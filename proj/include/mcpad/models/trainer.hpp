#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcpad/models/checkpoint.hpp"
#include "mcpad/preprocess/channels.hpp"
#include "mcpad/preprocess/cube.hpp"

namespace mcpad::models {

struct Example {
  std::string id;
  double label = 0.0;  ///< bonafide = 1, attack = 0
  Tensor input;        ///< already restricted to the combo's channels
};

using EpochCallback = std::function<void(int epoch, double train_loss, double dev_loss)>;

/// Mini-batch Adam on the pixel-wise + binary loss. Deterministic for a fixed
/// seed: the shuffle order and flip decisions come from one seeded stream.
/// Returns the weights of the epoch with the lowest dev loss (epoch 0 is the
/// initialization, so epochs = 0 returns it unchanged).
Checkpoint train_model(const std::vector<Example>& train, const std::vector<Example>& dev,
                       const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                       const std::string& combo, const EpochCallback& on_epoch = {});

double mean_loss(Network& net, const std::vector<Example>& data);

/// Inference wrapper around a checkpoint. Read-only after construction, so
/// concurrent score / extract_features calls are safe.
class Detector {
public:
  explicit Detector(const Checkpoint& ckpt);

  const Checkpoint& checkpoint() const { return ckpt_; }
  const preprocess::ChannelCombo& combo() const { return combo_; }
  int embedding_dim() const { return ckpt_.model.feature_channels(); }

  /// Accepts a full cube (the combo is selected) or an already selected one.
  Tensor prepare(const preprocess::ChannelCube& cube) const;

  ForwardResult forward(const preprocess::ChannelCube& cube) const;
  ForwardResult forward(const Tensor& input) const;
  /// Mean of the score map, in [0, 1]; higher = bonafide.
  double score(const preprocess::ChannelCube& cube) const;
  std::vector<float> extract_features(const preprocess::ChannelCube& cube) const;

private:
  Checkpoint ckpt_;
  preprocess::ChannelCombo combo_;
  mutable Network net_;
};

double map_score(const std::vector<float>& map);

}  // namespace mcpad::models
