#include "mcpad/models/trainer.hpp"

#include <numeric>

#include "mcpad/common/error.hpp"
#include "mcpad/common/rng.hpp"
#include "mcpad/models/loss.hpp"
#include "mcpad/models/optimizer.hpp"

namespace mcpad::models {

namespace {

double train_step(Network& net, const Tensor& input, double label) {
  const ForwardResult r = net.forward(input, true);
  std::vector<double> logits(r.map_logits.data.begin(), r.map_logits.data.end());
  const LossGrad g = pixbis_loss_grad(logits, r.binary_logit, label);
  net.backward(g.d_map_logits, g.d_binary_logit);
  return g.loss;
}

}  // namespace

double mean_loss(Network& net, const std::vector<Example>& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const Example& e : data) {
    const ForwardResult r = net.forward(e.input, false);
    total += pixbis_loss(r.map, r.binary_prob, e.label);
  }
  return total / static_cast<double>(data.size());
}

Checkpoint train_model(const std::vector<Example>& train, const std::vector<Example>& dev,
                       const ModelConfig& model_cfg, const TrainConfig& cfg,
                       const std::string& combo, const EpochCallback& on_epoch) {
  if (train.empty()) throw ModelError("training set is empty");
  if (dev.empty()) throw ModelError("dev set is empty");
  if (cfg.batch_size < 1 || cfg.epochs < 0 || !(cfg.learning_rate > 0.0)) {
    throw ModelError("invalid training configuration");
  }
  Network net(model_cfg);
  net.initialize(cfg.seed);

  TrainingCurve curve;
  curve.initial_train_loss = mean_loss(net, train);
  Checkpoint best = capture_checkpoint(net, cfg, combo, curve);
  double best_dev = cfg.epochs > 0 ? mean_loss(net, dev) : 0.0;

  Adam adam(net.parameters(), cfg.learning_rate, cfg.weight_decay);
  Rng rng(cfg.seed ^ 0xA5A5A5A5DEADBEEFULL);
  std::vector<std::size_t> order(train.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      net.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const Example& e = train[order[i]];
        if (rng.bernoulli(cfg.flip_probability)) {
          total += train_step(net, flip_horizontal(e.input), e.label);
        } else {
          total += train_step(net, e.input, e.label);
        }
      }
      adam.step(1.0 / static_cast<double>(end - start));
    }
    const double train_loss = total / static_cast<double>(train.size());
    const double dev_loss = mean_loss(net, dev);
    curve.train_loss.push_back(train_loss);
    curve.dev_loss.push_back(dev_loss);
    if (dev_loss < best_dev) {
      best_dev = dev_loss;
      best = capture_checkpoint(net, cfg, combo, curve);
      best.curve.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(epoch, train_loss, dev_loss);
  }
  const int best_epoch = best.curve.best_epoch;
  best.curve = curve;
  best.curve.best_epoch = best_epoch;
  return best;
}

Detector::Detector(const Checkpoint& ckpt)
    : ckpt_(ckpt), combo_(preprocess::parse_combo(ckpt.combo)), net_(ckpt.model) {
  if (combo_.size() != ckpt.model.in_channels) {
    throw ModelError("checkpoint combo " + ckpt.combo + " does not match " +
                     std::to_string(ckpt.model.in_channels) + " input channels");
  }
  restore_weights(net_, ckpt_);
}

Tensor Detector::prepare(const preprocess::ChannelCube& cube) const {
  if (cube.channels == combo_.indices) return cube_to_tensor(cube);
  try {
    return cube_to_tensor(preprocess::select_channels(cube, combo_));
  } catch (const StackingError& e) {
    throw ModelError("input does not provide combo " + ckpt_.combo + ": " + e.what());
  }
}

ForwardResult Detector::forward(const preprocess::ChannelCube& cube) const {
  return forward(prepare(cube));
}

ForwardResult Detector::forward(const Tensor& input) const {
  if (input.c != combo_.size()) {
    throw ModelError("expected " + std::to_string(combo_.size()) + " channels for combo " +
                     ckpt_.combo + ", got " + std::to_string(input.c));
  }
  return net_.forward(input, false);
}

double map_score(const std::vector<float>& map) {
  double s = 0.0;
  for (float v : map) s += v;
  return map.empty() ? 0.0 : s / static_cast<double>(map.size());
}

double Detector::score(const preprocess::ChannelCube& cube) const {
  return map_score(forward(cube).map);
}

std::vector<float> Detector::extract_features(const preprocess::ChannelCube& cube) const {
  return forward(cube).embedding;
}

}  // namespace mcpad::models
