#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "../support/scratch.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/models/adapt.hpp"
#include "mcpad/models/checkpoint.hpp"
#include "mcpad/models/complexity.hpp"
#include "mcpad/models/haralick.hpp"
#include "mcpad/models/layers.hpp"
#include "mcpad/models/linear_classifier.hpp"
#include "mcpad/models/loss.hpp"
#include "mcpad/models/network.hpp"
#include "mcpad/models/trainer.hpp"

using namespace mcpad;
using namespace mcpad::models;
namespace fs = std::filesystem;

namespace {

// Fast config with the 14x14 interface: 56 -> stem/2 -> 28 -> one block -> 14.
ModelConfig tiny_config(int in_channels) {
  ModelConfig c;
  c.preset = "desk-scale";
  c.in_channels = in_channels;
  c.input_size = 56;
  c.backbone.stem_channels = 6;
  c.backbone.stem_pool = false;
  c.backbone.growth = 4;
  c.backbone.bottleneck = 8;
  c.backbone.block_layers = {2};
  c.backbone.transition_channels = {8};
  return c;
}

Tensor random_tensor(int c, int h, int w, std::mt19937& gen) {
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  Tensor t(c, h, w);
  for (float& v : t.data) v = d(gen);
  return t;
}

double bce(double p, double y) {
  p = std::clamp(p, 1e-7, 1.0 - 1e-7);
  return -(y * std::log(p) + (1 - y) * std::log(1 - p));
}

}  // namespace

TEST(Loss, HandValues) {
  const std::vector<float> half(196, 0.5f);
  EXPECT_NEAR(pixbis_loss(half, 0.5, 1.0), std::log(2.0), 1e-9);
  const std::vector<float> nine(196, 0.9f);
  EXPECT_NEAR(pixbis_loss(nine, 0.9, 1.0), -std::log(0.9), 1e-7);
  const std::vector<float> ones(196, 1.0f);
  EXPECT_LT(pixbis_loss(ones, 1.0, 1.0), 1e-6);
  const std::vector<float> zeros(196, 0.0f);
  EXPECT_LT(pixbis_loss(zeros, 0.0, 0.0), 1e-6);
}

TEST(Loss, MatchesDefinitionAndIsNonNegative) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<float> map(196);
    double pix = 0;
    const double y = t % 2;
    for (float& v : map) {
      v = static_cast<float>(d(gen));
      pix += bce(v, y);
    }
    const double b = d(gen);
    const double expected = 0.5 * pix / 196.0 + 0.5 * bce(b, y);
    const double got = pixbis_loss(map, b, y);
    EXPECT_NEAR(got, expected, 1e-9);
    EXPECT_GE(got, 0.0);
  }
}

TEST(Loss, GradientMatchesCentralDifferences) {
  std::mt19937 gen(17);
  std::normal_distribution<double> n(0.0, 2.0);
  const double h = 1e-3;
  for (int t = 0; t < 20; ++t) {
    const int size = 4 + t;
    std::vector<double> logits(static_cast<std::size_t>(size));
    for (double& v : logits) v = n(gen);
    const double b = n(gen), y = t % 2;
    const LossGrad g = pixbis_loss_grad(logits, b, y);
    for (int i = 0; i < size; ++i) {
      auto lp = logits, lm = logits;
      lp[i] += h;
      lm[i] -= h;
      const double fd = (pixbis_loss_grad(lp, b, y).loss - pixbis_loss_grad(lm, b, y).loss) / (2 * h);
      ASSERT_LT(std::abs(fd - g.d_map_logits[i]) / std::max(std::abs(fd), 1e-8), 1e-4);
    }
    const double fd = (pixbis_loss_grad(logits, b + h, y).loss - pixbis_loss_grad(logits, b - h, y).loss) / (2 * h);
    ASSERT_LT(std::abs(fd - g.d_binary_logit) / std::max(std::abs(fd), 1e-8), 1e-4);
  }
}

TEST(Adapt, HandExamples) {
  const std::vector<float> w{1.0f, 2.0f, 3.0f};
  EXPECT_EQ(adapt_first_layer(w, 1, 1, 2), (std::vector<float>{3.0f, 3.0f}));
  EXPECT_EQ(adapt_first_layer(w, 1, 1, 16), std::vector<float>(16, 0.375f));
  EXPECT_EQ(adapt_first_layer(w, 1, 1, 3), w);
}

TEST(Adapt, ConstantInputResponsePreserved) {
  std::mt19937 gen(8);
  std::normal_distribution<float> n(0.0f, 0.5f);
  for (int c : {1, 2, 4, 10, 16}) {
    Conv2d rgb("rgb", 3, 5, 3, 1, 1, true);
    for (float& v : rgb.weight().value) v = n(gen);
    for (float& v : rgb.bias()->value) v = n(gen);
    Conv2d adapted("adapted", c, 5, 3, 1, 1, true);
    adapted.weight().value = adapt_first_layer(rgb.weight().value, 5, 3, c);
    adapted.bias()->value = rgb.bias()->value;
    const float level = 0.37f;
    const Tensor a = rgb.forward(Tensor(3, 6, 6, level), false);
    const Tensor b = adapted.forward(Tensor(c, 6, 6, level), false);
    for (std::size_t i = 0; i < a.data.size(); ++i) ASSERT_NEAR(a.data[i], b.data[i], 1e-6) << c;
  }
}

TEST(Complexity, ClosedFormLayerCases) {
  const LayerCost conv = conv_cost(2, 4, 3, 1, 1, true, 8, 8);
  EXPECT_EQ(conv.params, 76);
  EXPECT_EQ(conv.macs, 4608);
  EXPECT_EQ(linear_cost(10, 1, true).params, 11);
}

TEST(Complexity, ReportMatchesAllocatedScalarsAndCountedMacs) {
  std::mt19937 gen(23);
  std::uniform_int_distribution<int> small(1, 6), chans(1, 16);
  int tried = 0;
  while (tried < 5) {
    ModelConfig cfg = tiny_config(chans(gen));
    cfg.backbone.stem_channels = small(gen) + 2;
    cfg.backbone.growth = small(gen);
    cfg.backbone.bottleneck = small(gen) + 2;
    cfg.backbone.block_layers = {small(gen) % 3 + 1};
    cfg.backbone.transition_channels = {small(gen) + 3};
    cfg.backbone.batch_norm = (tried % 2) == 1;
    ++tried;
    Network net(cfg);
    std::int64_t scalars = 0;
    for (Param* p : net.parameters()) scalars += static_cast<std::int64_t>(p->value.size());
    const auto report = model_complexity_report(cfg);
    EXPECT_EQ(report.parameters, scalars);
    EXPECT_EQ(report.parameters, static_cast<std::int64_t>(net.parameter_count()));
    net.initialize(1);
    reset_mac_counter();
    net.forward(Tensor(cfg.in_channels, cfg.input_size, cfg.input_size, 0.5f), false);
    EXPECT_EQ(report.macs, mac_counter());
  }
}

TEST(Complexity, ExtraChannelOnlyTouchesFirstLayer) {
  const auto a = model_complexity_report(desk_scale_config(3));
  const auto b = model_complexity_report(desk_scale_config(4));
  ASSERT_EQ(a.layers.size(), b.layers.size());
  for (std::size_t i = 1; i < a.layers.size(); ++i) {
    EXPECT_EQ(a.layers[i].params, b.layers[i].params) << a.layers[i].name;
  }
  EXPECT_GT(b.layers[0].params, a.layers[0].params);
}

TEST(Network, ShapesAndZeroHeads) {
  std::mt19937 gen(4);
  const ModelConfig cfg = desk_scale_config(10);
  Network net(cfg);
  net.initialize(5);
  const Tensor x = random_tensor(10, 224, 224, gen);
  const ForwardResult r = net.forward(x);
  EXPECT_EQ(r.map.size(), 196u);
  EXPECT_EQ(static_cast<int>(r.embedding.size()), cfg.feature_channels());
  for (float p : r.map) ASSERT_TRUE(p >= 0.0f && p <= 1.0f);
  const ForwardResult again = net.forward(x);
  EXPECT_EQ(r.map, again.map);
  EXPECT_EQ(r.embedding, again.embedding);
  net.zero_heads();
  for (float p : net.forward(x).map) ASSERT_EQ(p, 0.5f);

  const auto large = paper_scale_config(3);
  EXPECT_EQ(large.feature_channels(), 384);
  EXPECT_EQ(large.map_size(), 14);
  EXPECT_THROW(preset_config("huge", 3), ModelError);
}

TEST(Network, BackwardMatchesFiniteDifferences) {
  std::mt19937 gen(31);
  Network net(tiny_config(2));
  net.initialize(9);
  const Tensor x = random_tensor(2, 56, 56, gen);
  auto loss_of = [&](bool keep) {
    const ForwardResult r = net.forward(x, keep);
    std::vector<double> logits(r.map_logits.data.begin(), r.map_logits.data.end());
    return pixbis_loss_grad(logits, r.binary_logit, 1.0);
  };
  net.zero_grad();
  const LossGrad g = loss_of(true);
  net.backward(g.d_map_logits, g.d_binary_logit);
  int checked = 0;
  for (Param* p : net.parameters()) {
    for (std::size_t i = 0; i < p->value.size(); i += std::max<std::size_t>(1, p->value.size() / 3)) {
      const float keep = p->value[i];
      const float h = 1e-2f;
      p->value[i] = keep + h;
      const double lp = loss_of(false).loss;
      p->value[i] = keep - h;
      const double lm = loss_of(false).loss;
      p->value[i] = keep;
      const double fd = (lp - lm) / (2.0 * h);
      const double an = p->grad[i];
      if (std::abs(fd) < 1e-4 && std::abs(an) < 1e-4) continue;
      EXPECT_NEAR(an, fd, 0.05 * std::max(std::abs(fd), std::abs(an)) + 1e-5) << p->name << "[" << i << "]";
      ++checked;
    }
  }
  EXPECT_GT(checked, 10);
}

namespace {

std::vector<Example> toy_examples(int n, int channels, std::mt19937& gen) {
  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    Example e;
    e.id = "s" + std::to_string(i);
    e.label = i % 2;
    e.input = random_tensor(channels, 56, 56, gen);
    // Bonafide examples are brighter in channel 0.
    if (e.label > 0) {
      for (int k = 0; k < 56 * 56; ++k) e.input.data[static_cast<std::size_t>(k)] += 0.5f;
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

TEST(Training, DeterministicAndLearns) {
  std::mt19937 gen(12);
  const auto train = toy_examples(12, 2, gen);
  const auto dev = toy_examples(6, 2, gen);
  TrainConfig tc;
  tc.epochs = 6;
  tc.batch_size = 4;
  tc.learning_rate = 1e-2;
  tc.seed = 3;
  const Checkpoint a = train_model(train, dev, tiny_config(2), tc, "RGB-T");
  const Checkpoint b = train_model(train, dev, tiny_config(2), tc, "RGB-T");
  EXPECT_EQ(a.curve.dev_loss, b.curve.dev_loss);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_LT(a.curve.train_loss.back(), a.curve.initial_train_loss);

  tc.epochs = 0;
  const Checkpoint init = train_model(train, dev, tiny_config(2), tc, "RGB-T");
  Network net(tiny_config(2));
  net.initialize(3);
  const auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) EXPECT_EQ(init.weights[i], params[i]->value);
  EXPECT_EQ(init.curve.best_epoch, 0);
}

TEST(Checkpoint, RoundTripAndDetector) {
  std::mt19937 gen(2);
  const auto train = toy_examples(4, 4, gen);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 2;
  ModelConfig cfg = tiny_config(4);
  const Checkpoint ckpt = train_model(train, train, cfg, tc, "RGB-SWIR_1450nm");
  const fs::path path = scratch::path("mcpad_ckpt.mckp");
  save_checkpoint(path.string(), ckpt);
  const Checkpoint back = load_checkpoint(path.string());
  EXPECT_EQ(back.weights, ckpt.weights);
  EXPECT_EQ(back.combo, ckpt.combo);
  EXPECT_EQ(back.curve.dev_loss, ckpt.curve.dev_loss);
  fs::remove(path);

  Detector det(back);
  const ForwardResult r1 = det.forward(train[0].input), r2 = det.forward(train[0].input);
  EXPECT_EQ(r1.map, r2.map);
  EXPECT_EQ(static_cast<int>(r1.embedding.size()), det.embedding_dim());
  EXPECT_THROW(det.forward(Tensor(3, 56, 56)), ModelError);

  Checkpoint wrong = ckpt;
  wrong.weights[0].pop_back();
  Network net(cfg);
  EXPECT_THROW(restore_weights(net, wrong), ModelError);
}

TEST(Scoring, MapMean) {
  EXPECT_DOUBLE_EQ(map_score(std::vector<float>(196, 0.25f)), 0.25);
  std::vector<float> half(196, 0.0f);
  std::fill(half.begin(), half.begin() + 98, 1.0f);
  EXPECT_DOUBLE_EQ(map_score(half), 0.5);
}

TEST(Haralick, ConstantAndCheckerboardCells) {
  const cv::Mat flat(16, 16, CV_8UC1, cv::Scalar(3));
  const GlcmStats s = glcm_stats(glcm(flat, 1, 0));
  EXPECT_DOUBLE_EQ(s.energy, 1.0);
  EXPECT_DOUBLE_EQ(s.entropy, 0.0);
  EXPECT_DOUBLE_EQ(s.contrast, 0.0);
  EXPECT_DOUBLE_EQ(s.homogeneity, 1.0);

  cv::Mat checker(16, 16, CV_8UC1);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) checker.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>((x + y) % 2 + 2);
  }
  const Eigen::MatrixXd p = glcm(checker, 1, 0);
  EXPECT_DOUBLE_EQ(p(2, 3), 0.5);
  EXPECT_DOUBLE_EQ(p(3, 2), 0.5);
  EXPECT_DOUBLE_EQ(glcm_stats(p).contrast, 1.0);
  EXPECT_DOUBLE_EQ(glcm_stats(p).entropy, 1.0);
}

TEST(Haralick, GlcmMatchesPairEnumeration) {
  std::mt19937 gen(6);
  std::uniform_int_distribution<int> d(0, 7);
  cv::Mat img(9, 11, CV_8UC1);
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 11; ++x) img.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(d(gen));
  }
  for (auto [dx, dy] : std::vector<std::pair<int, int>>{{1, 0}, {1, -1}, {0, 1}, {1, 1}}) {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(8, 8);
    for (int y = 0; y < 9; ++y) {
      for (int x = 0; x < 11; ++x) {
        const int x2 = x + dx, y2 = y + dy;
        if (x2 < 0 || x2 >= 11 || y2 < 0 || y2 >= 9) continue;
        const int i = img.at<std::uint8_t>(y, x), j = img.at<std::uint8_t>(y2, x2);
        counts(i, j) += 1;
        counts(j, i) += 1;
      }
    }
    counts /= counts.sum();
    EXPECT_LT((glcm(img, dx, dy) - counts).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Haralick, FeatureLength) {
  preprocess::ChannelCube cube;
  cube.channels = {0, 1, 2, 13};
  cube.data.assign(static_cast<std::size_t>(224) * 224 * 4, 0.5f);
  const auto f = haralick_features(cube);
  EXPECT_EQ(f.size(), 4u * 16u * 4u * 5u);
  for (float v : f) ASSERT_TRUE(std::isfinite(v));
}

TEST(Haralick, HaarBandsOfConstantPlane) {
  const auto bands = haar_undecimated(cv::Mat(8, 8, CV_32FC1, cv::Scalar(0.4f)));
  EXPECT_LE(cv::norm(bands[0], cv::Mat(8, 8, CV_32FC1, cv::Scalar(0.4f)), cv::NORM_INF), 1e-7);
  for (int b = 1; b < 4; ++b) EXPECT_EQ(cv::countNonZero(bands[b]), 0);
}

namespace {

void blobs(int n, std::mt19937& gen, Eigen::MatrixXd& x, std::vector<int>& y) {
  std::normal_distribution<double> d(0.0, 0.3);
  x.resize(n, 2);
  y.clear();
  for (int i = 0; i < n; ++i) {
    const int label = i % 3 == 0 ? 1 : 0;
    const double c = label ? 1.5 : -1.5;
    x(i, 0) = c + d(gen);
    x(i, 1) = -c + d(gen);
    y.push_back(label);
  }
}

}  // namespace

TEST(LinearClassifier, SeparableBlobsFullyClassified) {
  std::mt19937 gen(10);
  Eigen::MatrixXd x;
  std::vector<int> y;
  blobs(90, gen, x, y);
  const auto clf = fit_linear_classifier(x, y);
  const Eigen::VectorXd s = clf.scores(x);
  for (int i = 0; i < x.rows(); ++i) {
    ASSERT_EQ(s(i) > 0.5, y[static_cast<std::size_t>(i)] == 1) << i;
    ASSERT_TRUE(s(i) >= 0.0 && s(i) <= 1.0);
  }
  const auto back = LinearClassifier::from_json(clf.to_json());
  EXPECT_LT((back.scores(x) - s).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LinearClassifier, DuplicatedColumnsGiveSameScores) {
  std::mt19937 gen(11);
  Eigen::MatrixXd x;
  std::vector<int> y;
  blobs(60, gen, x, y);
  Eigen::MatrixXd dup(x.rows(), 4);
  dup << x, x;
  const auto a = fit_linear_classifier(x, y), b = fit_linear_classifier(dup, y);
  EXPECT_LT((a.scores(x) - b.scores(dup)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LinearClassifier, SingleClassRejected) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
  EXPECT_THROW(fit_linear_classifier(x, {1, 1, 1, 1, 1}), Error);
  EXPECT_THROW(fit_linear_classifier(x, {1, 0}), Error);
}
