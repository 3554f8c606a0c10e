#include "mcpad/models/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstring>
#include <limits>

#include "mcpad/common/error.hpp"

namespace mcpad::models {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using CMapM = Eigen::Map<const MatRM>;

thread_local std::int64_t g_macs = 0;

std::vector<int> weight_shape(int out, int in, int k) { return {out, in, k, k}; }

}  // namespace

Param::Param(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
  std::size_t total = 1;
  for (int d : shape) total *= static_cast<std::size_t>(d);
  value.assign(total, 0.0f);
  grad.assign(total, 0.0f);
}

std::int64_t mac_counter() { return g_macs; }
void reset_mac_counter() { g_macs = 0; }
void add_macs(std::int64_t n) { g_macs += n; }

// ---- Conv2d

Conv2d::Conv2d(std::string name, int in, int out, int kernel, int stride, int pad, bool bias)
    : in_(in), out_(out), k_(kernel), stride_(stride), pad_(pad),
      weight_(name + ".weight", weight_shape(out, in, kernel)) {
  if (bias) bias_ = std::make_unique<Param>(name + ".bias", std::vector<int>{out});
}

void Conv2d::collect(std::vector<Param*>& out) {
  out.push_back(&weight_);
  if (bias_) out.push_back(bias_.get());
}

void Conv2d::im2col(const Tensor& in, int ho, int wo, std::vector<float>& cols) const {
  const std::size_t n = static_cast<std::size_t>(ho) * wo;
  cols.assign(static_cast<std::size_t>(in_) * k_ * k_ * n, 0.0f);
  for (int ci = 0; ci < in_; ++ci) {
    const float* src = in.channel(ci);
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        float* row = &cols[((static_cast<std::size_t>(ci) * k_ + ky) * k_ + kx) * n];
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= in.h) continue;
          float* dst = row + static_cast<std::size_t>(oy) * wo;
          const float* srow = src + static_cast<std::size_t>(iy) * in.w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride_ - pad_ + kx;
            if (ix >= 0 && ix < in.w) dst[ox] = srow[ix];
          }
        }
      }
    }
  }
}

Tensor Conv2d::forward(const Tensor& in, bool keep) {
  if (in.c != in_) {
    throw ModelError(weight_.name + ": expected " + std::to_string(in_) + " input channels, got " +
                     std::to_string(in.c));
  }
  const int ho = (in.h + 2 * pad_ - k_) / stride_ + 1;
  const int wo = (in.w + 2 * pad_ - k_) / stride_ + 1;
  const int n = ho * wo;
  const int kk = in_ * k_ * k_;
  Tensor out(out_, ho, wo);
  CMapM w(weight_.value.data(), out_, kk);
  MapM o(out.data.data(), out_, n);
  if (pointwise()) {
    o.noalias() = w * CMapM(in.data.data(), kk, n);
    if (keep) cached_in_ = in;
  } else {
    std::vector<float> cols;
    im2col(in, ho, wo, cols);
    o.noalias() = w * CMapM(cols.data(), kk, n);
    if (keep) {
      cached_cols_ = std::move(cols);
      cached_in_ = Tensor();
      cached_in_.c = in.c;
      cached_in_.h = in.h;
      cached_in_.w = in.w;
    }
  }
  if (keep) {
    ho_ = ho;
    wo_ = wo;
  }
  if (bias_) {
    for (int co = 0; co < out_; ++co) o.row(co).array() += bias_->value[static_cast<std::size_t>(co)];
  }
  g_macs += static_cast<std::int64_t>(out_) * kk * n;
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const int n = ho_ * wo_;
  const int kk = in_ * k_ * k_;
  CMapM go(grad_out.data.data(), out_, n);
  MapM gw(weight_.grad.data(), out_, kk);
  CMapM w(weight_.value.data(), out_, kk);
  if (bias_) {
    // Plain loop: Eigen's vectorized sum depends on buffer alignment, which
    // would make training runs differ in the last bits.
    for (int co = 0; co < out_; ++co) {
      const float* g = grad_out.channel(co);
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g[i];
      bias_->grad[static_cast<std::size_t>(co)] += static_cast<float>(s);
    }
  }
  Tensor gin(cached_in_.c, cached_in_.h, cached_in_.w);
  if (pointwise()) {
    gw.noalias() += go * CMapM(cached_in_.data.data(), kk, n).transpose();
    MapM(gin.data.data(), kk, n).noalias() = w.transpose() * go;
    return gin;
  }
  gw.noalias() += go * CMapM(cached_cols_.data(), kk, n).transpose();
  MatRM gcols = w.transpose() * go;
  for (int ci = 0; ci < in_; ++ci) {
    float* dst = gin.channel(ci);
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        const float* row = gcols.data() + ((static_cast<std::size_t>(ci) * k_ + ky) * k_ + kx) * n;
        for (int oy = 0; oy < ho_; ++oy) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= gin.h) continue;
          float* drow = dst + static_cast<std::size_t>(iy) * gin.w;
          const float* srow = row + static_cast<std::size_t>(oy) * wo_;
          for (int ox = 0; ox < wo_; ++ox) {
            const int ix = ox * stride_ - pad_ + kx;
            if (ix >= 0 && ix < gin.w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
  return gin;
}

// ---- Affine (frozen batch norm)

Affine::Affine(std::string name, int channels)
    : gamma_(name + ".weight", {channels}), beta_(name + ".bias", {channels}) {
  std::fill(gamma_.value.begin(), gamma_.value.end(), 1.0f);
}

void Affine::collect(std::vector<Param*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

Tensor Affine::forward(const Tensor& in, bool keep) {
  Tensor out(in.c, in.h, in.w);
  const std::size_t p = in.plane();
  for (int k = 0; k < in.c; ++k) {
    const float g = gamma_.value[static_cast<std::size_t>(k)];
    const float b = beta_.value[static_cast<std::size_t>(k)];
    const float* s = in.channel(k);
    float* d = out.channel(k);
    for (std::size_t i = 0; i < p; ++i) d[i] = g * s[i] + b;
  }
  if (keep) cached_in_ = in;
  return out;
}

Tensor Affine::backward(const Tensor& grad_out) {
  Tensor gin(grad_out.c, grad_out.h, grad_out.w);
  const std::size_t p = grad_out.plane();
  for (int k = 0; k < grad_out.c; ++k) {
    const float g = gamma_.value[static_cast<std::size_t>(k)];
    const float* go = grad_out.channel(k);
    const float* x = cached_in_.channel(k);
    float* gi = gin.channel(k);
    double dg = 0.0, db = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      dg += static_cast<double>(go[i]) * x[i];
      db += go[i];
      gi[i] = g * go[i];
    }
    gamma_.grad[static_cast<std::size_t>(k)] += static_cast<float>(dg);
    beta_.grad[static_cast<std::size_t>(k)] += static_cast<float>(db);
  }
  return gin;
}

// ---- ReLU

Tensor ReLU::forward(const Tensor& in, bool keep) {
  Tensor out = in;
  for (float& v : out.data) v = v > 0.0f ? v : 0.0f;
  if (keep) cached_out_ = out;
  return out;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  Tensor gin = grad_out;
  for (std::size_t i = 0; i < gin.size(); ++i) {
    if (!(cached_out_.data[i] > 0.0f)) gin.data[i] = 0.0f;
  }
  return gin;
}

// ---- MaxPool 3x3 / s2 / p1

Tensor MaxPool::forward(const Tensor& in, bool keep) {
  const int ho = (in.h + 2 - 3) / 2 + 1;
  const int wo = (in.w + 2 - 3) / 2 + 1;
  Tensor out(in.c, ho, wo);
  if (keep) {
    argmax_.assign(out.size(), -1);
    in_c_ = in.c;
    in_h_ = in.h;
    in_w_ = in.w;
  }
  std::size_t o = 0;
  for (int k = 0; k < in.c; ++k) {
    const float* src = in.channel(k);
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox, ++o) {
        float best = -std::numeric_limits<float>::infinity();
        int arg = -1;
        for (int dy = 0; dy < 3; ++dy) {
          const int iy = oy * 2 - 1 + dy;
          if (iy < 0 || iy >= in.h) continue;
          for (int dx = 0; dx < 3; ++dx) {
            const int ix = ox * 2 - 1 + dx;
            if (ix < 0 || ix >= in.w) continue;
            const float v = src[iy * in.w + ix];
            if (v > best) {
              best = v;
              arg = iy * in.w + ix;
            }
          }
        }
        out.data[o] = best;
        if (keep) argmax_[o] = arg;
      }
    }
  }
  return out;
}

Tensor MaxPool::backward(const Tensor& grad_out) {
  Tensor gin(in_c_, in_h_, in_w_);
  const std::size_t per = grad_out.plane();
  for (std::size_t o = 0; o < grad_out.size(); ++o) {
    const std::size_t k = o / per;
    gin.data[k * gin.plane() + static_cast<std::size_t>(argmax_[o])] += grad_out.data[o];
  }
  return gin;
}

// ---- AvgPool 2x2 / s2

Tensor AvgPool::forward(const Tensor& in, bool keep) {
  const int ho = in.h / 2;
  const int wo = in.w / 2;
  Tensor out(in.c, ho, wo);
  if (keep) {
    in_c_ = in.c;
    in_h_ = in.h;
    in_w_ = in.w;
  }
  for (int k = 0; k < in.c; ++k) {
    const float* s = in.channel(k);
    float* d = out.channel(k);
    for (int oy = 0; oy < ho; ++oy) {
      const float* r0 = s + static_cast<std::size_t>(2 * oy) * in.w;
      const float* r1 = r0 + in.w;
      for (int ox = 0; ox < wo; ++ox) {
        d[oy * wo + ox] = 0.25f * (r0[2 * ox] + r0[2 * ox + 1] + r1[2 * ox] + r1[2 * ox + 1]);
      }
    }
  }
  return out;
}

Tensor AvgPool::backward(const Tensor& grad_out) {
  Tensor gin(in_c_, in_h_, in_w_);
  for (int k = 0; k < grad_out.c; ++k) {
    const float* g = grad_out.channel(k);
    float* d = gin.channel(k);
    for (int oy = 0; oy < grad_out.h; ++oy) {
      for (int ox = 0; ox < grad_out.w; ++ox) {
        const float v = 0.25f * g[oy * grad_out.w + ox];
        float* r0 = d + static_cast<std::size_t>(2 * oy) * in_w_ + 2 * ox;
        r0[0] += v;
        r0[1] += v;
        r0[in_w_] += v;
        r0[in_w_ + 1] += v;
      }
    }
  }
  return gin;
}

// ---- Sequential

Tensor Sequential::forward(const Tensor& in, bool keep) {
  Tensor x = in;
  for (auto& l : layers_) x = l->forward(x, keep);
  return x;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

void Sequential::collect(std::vector<Param*>& out) {
  for (auto& l : layers_) l->collect(out);
}

// ---- DenseBlock

DenseBlock::DenseBlock(std::string name, int in, int layers, int growth, int bottleneck,
                       bool batch_norm)
    : in_(in), growth_(growth) {
  for (int i = 0; i < layers; ++i) {
    const std::string p = name + ".denselayer" + std::to_string(i + 1);
    const int c = in + i * growth;
    Sequential s;
    if (batch_norm) s.add(std::make_unique<Affine>(p + ".norm1", c));
    s.add(std::make_unique<ReLU>());
    s.add(std::make_unique<Conv2d>(p + ".conv1", c, bottleneck, 1, 1, 0, !batch_norm));
    if (batch_norm) s.add(std::make_unique<Affine>(p + ".norm2", bottleneck));
    s.add(std::make_unique<ReLU>());
    s.add(std::make_unique<Conv2d>(p + ".conv2", bottleneck, growth, 3, 1, 1, !batch_norm));
    layers_.push_back(std::move(s));
  }
}

void DenseBlock::collect(std::vector<Param*>& out) {
  for (auto& l : layers_) l.collect(out);
}

Tensor DenseBlock::forward(const Tensor& in, bool keep) {
  Tensor feats(out_channels(), in.h, in.w);
  std::copy(in.data.begin(), in.data.end(), feats.data.begin());
  const std::size_t p = in.plane();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const int c = in_ + static_cast<int>(i) * growth_;
    Tensor x(c, in.h, in.w);
    std::copy_n(feats.data.begin(), static_cast<std::size_t>(c) * p, x.data.begin());
    const Tensor y = layers_[i].forward(x, keep);
    std::copy(y.data.begin(), y.data.end(), feats.data.begin() + static_cast<std::ptrdiff_t>(c * p));
  }
  return feats;
}

Tensor DenseBlock::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  const std::size_t p = g.plane();
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const int c = in_ + static_cast<int>(i) * growth_;
    Tensor gy(growth_, g.h, g.w);
    std::copy_n(g.data.begin() + static_cast<std::ptrdiff_t>(c * p), gy.size(), gy.data.begin());
    const Tensor gx = layers_[i].backward(gy);
    for (std::size_t j = 0; j < gx.size(); ++j) g.data[j] += gx.data[j];
  }
  Tensor gin(in_, g.h, g.w);
  std::copy_n(g.data.begin(), gin.size(), gin.data.begin());
  return gin;
}

}  // namespace mcpad::models
