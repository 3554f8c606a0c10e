#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mcpad/models/tensor.hpp"

namespace mcpad::models {

struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<float> value;
  std::vector<float> grad;

  Param(std::string n, std::vector<int> s);
  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0f); }
};

/// Multiply-accumulates performed by convolutions and linear layers on this
/// thread since the last reset.
std::int64_t mac_counter();
void reset_mac_counter();
void add_macs(std::int64_t n);

/// Single-sample layer. forward(.., keep=true) caches what backward needs; only
/// one cached pass is held at a time. backward accumulates into Param::grad.
class Layer {
public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& in, bool keep) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual void collect(std::vector<Param*>& /*out*/) {}
};

class Conv2d : public Layer {
public:
  Conv2d(std::string name, int in, int out, int kernel, int stride, int pad, bool bias);
  Tensor forward(const Tensor& in, bool keep) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Param*>& out) override;

  Param& weight() { return weight_; }
  Param* bias() { return bias_ ? bias_.get() : nullptr; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }

private:
  int in_, out_, k_, stride_, pad_;
  Param weight_;  // [out][in][k][k]
  std::unique_ptr<Param> bias_;
  Tensor cached_in_;
  std::vector<float> cached_cols_;
  int ho_ = 0, wo_ = 0;

  bool pointwise() const { return k_ == 1 && stride_ == 1 && pad_ == 0; }
  void im2col(const Tensor& in, int ho, int wo, std::vector<float>& cols) const;
};

/// Batch normalization with frozen statistics: y = gamma * x + beta per channel.
class Affine : public Layer {
public:
  Affine(std::string name, int channels);
  Tensor forward(const Tensor& in, bool keep) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Param*>& out) override;

private:
  Param gamma_, beta_;
  Tensor cached_in_;
};

class ReLU : public Layer {
public:
  Tensor forward(const Tensor& in, bool keep) override;
  Tensor backward(const Tensor& grad_out) override;

private:
  Tensor cached_out_;
};

/// 3x3, stride 2, pad 1.
class MaxPool : public Layer {
public:
  Tensor forward(const Tensor& in, bool keep) override;
  Tensor backward(const Tensor& grad_out) override;

private:
  std::vector<std::int32_t> argmax_;
  int in_c_ = 0, in_h_ = 0, in_w_ = 0;
};

/// 2x2, stride 2.
class AvgPool : public Layer {
public:
  Tensor forward(const Tensor& in, bool keep) override;
  Tensor backward(const Tensor& grad_out) override;

private:
  int in_c_ = 0, in_h_ = 0, in_w_ = 0;
};

class Sequential : public Layer {
public:
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  Tensor forward(const Tensor& in, bool keep) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Param*>& out) override;
  Layer& at(std::size_t i) { return *layers_.at(i); }
  std::size_t size() const { return layers_.size(); }

private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Densely connected block: every layer sees the concatenation of the block
/// input and all previous layer outputs.
class DenseBlock : public Layer {
public:
  DenseBlock(std::string name, int in, int layers, int growth, int bottleneck, bool batch_norm);
  Tensor forward(const Tensor& in, bool keep) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Param*>& out) override;
  int out_channels() const { return in_ + static_cast<int>(layers_.size()) * growth_; }

private:
  int in_, growth_;
  std::vector<Sequential> layers_;
};

}  // namespace mcpad::models
