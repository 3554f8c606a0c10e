#include "mcpad/evaluation/fusion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mcpad/common/error.hpp"
#include "mcpad/common/rng.hpp"
#include "mcpad/models/loss.hpp"

namespace mcpad::evaluation {

using models::sigmoid;

std::string_view fusion_method_name(FusionMethod m) {
  switch (m) {
    case FusionMethod::Mean: return "Mean";
    case FusionMethod::LLR: return "LLR";
    case FusionMethod::MLP: return "MLP";
    case FusionMethod::GMM: return "GMM";
  }
  return "?";
}

FusionMethod parse_fusion_method(std::string_view name) {
  for (FusionMethod m : {FusionMethod::Mean, FusionMethod::LLR, FusionMethod::MLP, FusionMethod::GMM}) {
    if (fusion_method_name(m) == name) return m;
  }
  throw EvaluationError("unknown fusion method '" + std::string(name) + "'");
}

namespace {

template <typename Row>
std::vector<std::size_t> match_ids(const std::vector<ScoreRow>& ref, const std::vector<Row>& other,
                                   auto id_of, std::size_t system) {
  if (other.size() != ref.size()) {
    throw EvaluationError("system " + std::to_string(system) + " has " +
                          std::to_string(other.size()) + " samples, expected " +
                          std::to_string(ref.size()));
  }
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < other.size(); ++i) {
    if (!pos.emplace(id_of(other[i]), i).second) {
      throw EvaluationError("duplicate sample id " + id_of(other[i]));
    }
  }
  std::vector<std::size_t> idx;
  idx.reserve(ref.size());
  for (const auto& r : ref) {
    auto it = pos.find(r.sample_id);
    if (it == pos.end()) {
      throw EvaluationError("sample " + r.sample_id + " missing from system " +
                            std::to_string(system));
    }
    idx.push_back(it->second);
  }
  return idx;
}

std::vector<double> class_weights(const std::vector<ScoreRow>& meta) {
  int pos = 0;
  for (const auto& r : meta) pos += r.is_bonafide() ? 1 : 0;
  const int neg = static_cast<int>(meta.size()) - pos;
  if (pos == 0 || neg == 0) throw EvaluationError("fusion training needs both classes in dev");
  std::vector<double> w;
  for (const auto& r : meta) {
    w.push_back(0.5 * static_cast<double>(meta.size()) / (r.is_bonafide() ? pos : neg));
  }
  return w;
}

class MeanFuser : public ScoreFuser {
public:
  // Shifted by the first score so identical systems return that score exactly;
  // a plain sum / n rounds (0.1 * 3 / 3 != 0.1).
  double fuse(const Eigen::VectorXd& s) const override {
    double dev = 0.0;
    for (Eigen::Index i = 1; i < s.size(); ++i) dev += s[i] - s[0];
    return s[0] + dev / static_cast<double>(s.size());
  }
};

// Logistic regression by iteratively reweighted least squares with a small ridge.
class LlrFuser : public ScoreFuser {
public:
  LlrFuser(const ScoreMatrix& dev, const FusionConfig& cfg) {
    const auto cw = class_weights(dev.meta);
    const Eigen::Index n = dev.x.rows();
    const Eigen::Index d = dev.x.cols() + 1;
    Eigen::MatrixXd a(n, d);
    a.leftCols(d - 1) = dev.x;
    a.col(d - 1).setOnes();
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = dev.meta[static_cast<std::size_t>(i)].is_bonafide() ? 1.0 : 0.0;
    beta_ = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd ridge = cfg.llr_ridge * Eigen::MatrixXd::Identity(d, d);
    ridge(d - 1, d - 1) = 0.0;
    for (int it = 0; it < 100; ++it) {
      const Eigen::VectorXd eta = a * beta_;
      Eigen::VectorXd grad = -ridge * beta_;
      Eigen::MatrixXd hess = ridge;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double p = sigmoid(eta[i]);
        const double w = cw[static_cast<std::size_t>(i)];
        grad += w * (y[i] - p) * a.row(i).transpose();
        hess += w * std::max(p * (1.0 - p), 1e-12) * a.row(i).transpose() * a.row(i);
      }
      const Eigen::VectorXd step = hess.ldlt().solve(grad);
      if (!step.allFinite()) break;
      beta_ += step;
      if (step.norm() < 1e-10 * (1.0 + beta_.norm())) break;
    }
  }
  double fuse(const Eigen::VectorXd& s) const override {
    const Eigen::Index d = beta_.size() - 1;
    return sigmoid(beta_.head(d).dot(s) + beta_[d]);
  }

private:
  Eigen::VectorXd beta_;
};

// One hidden layer of logistic units, full-batch Adam on weighted cross-entropy.
class MlpFuser : public ScoreFuser {
public:
  MlpFuser(const ScoreMatrix& dev, const FusionConfig& cfg) {
    const auto cw = class_weights(dev.meta);
    const Eigen::Index n = dev.x.rows();
    const Eigen::Index d = dev.x.cols();
    const Eigen::Index h = cfg.mlp_hidden;
    Rng rng(cfg.seed ^ 0x6D6C70ULL);
    w1_.resize(h, d);
    for (Eigen::Index i = 0; i < w1_.size(); ++i) w1_.data()[i] = rng.normal(0.0, 1.0 / std::sqrt(double(d)));
    b1_ = Eigen::VectorXd::Zero(h);
    w2_.resize(h);
    for (Eigen::Index i = 0; i < h; ++i) w2_[i] = rng.normal(0.0, 1.0 / std::sqrt(double(h)));
    b2_ = 0.0;

    Eigen::VectorXd y(n), wt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[i] = dev.meta[static_cast<std::size_t>(i)].is_bonafide() ? 1.0 : 0.0;
      wt[i] = cw[static_cast<std::size_t>(i)] / static_cast<double>(n);
    }

    // Adam state for (w1, b1, w2, b2) flattened.
    const Eigen::Index np = h * d + h + h + 1;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(np), v = Eigen::VectorXd::Zero(np);
    const double b1m = 0.9, b2m = 0.999, eps = 1e-8;
    for (int t = 1; t <= cfg.mlp_epochs; ++t) {
      const Eigen::MatrixXd z1 = (dev.x * w1_.transpose()).rowwise() + b1_.transpose();
      const Eigen::MatrixXd a1 = z1.unaryExpr([](double q) { return sigmoid(q); });
      const Eigen::VectorXd out = (a1 * w2_).array() + b2_;
      Eigen::VectorXd dout(n);
      for (Eigen::Index i = 0; i < n; ++i) dout[i] = wt[i] * (sigmoid(out[i]) - y[i]);
      const Eigen::VectorXd gw2 = a1.transpose() * dout;
      const double gb2 = dout.sum();
      const Eigen::MatrixXd da1 = dout * w2_.transpose();
      const Eigen::MatrixXd dz1 = da1.array() * a1.array() * (1.0 - a1.array());
      const Eigen::MatrixXd gw1 = dz1.transpose() * dev.x;
      const Eigen::VectorXd gb1 = dz1.colwise().sum().transpose();

      Eigen::VectorXd g(np);
      g << Eigen::Map<const Eigen::VectorXd>(gw1.data(), h * d), gb1, gw2, gb2;
      m = b1m * m + (1.0 - b1m) * g;
      v = b2m * v + (1.0 - b2m) * g.cwiseAbs2();
      const double c1 = 1.0 - std::pow(b1m, t);
      const double c2 = 1.0 - std::pow(b2m, t);
      const Eigen::VectorXd upd =
          cfg.mlp_lr * (m / c1).array() / ((v / c2).array().sqrt() + eps);
      Eigen::Map<Eigen::VectorXd>(w1_.data(), h * d) -= upd.head(h * d);
      b1_ -= upd.segment(h * d, h);
      w2_ -= upd.segment(h * d + h, h);
      b2_ -= upd[np - 1];
    }
  }
  double fuse(const Eigen::VectorXd& s) const override {
    const Eigen::VectorXd a1 = (w1_ * s + b1_).unaryExpr([](double q) { return sigmoid(q); });
    return sigmoid(a1.dot(w2_) + b2_);
  }

private:
  Eigen::MatrixXd w1_;
  Eigen::VectorXd b1_;
  Eigen::VectorXd w2_;
  double b2_ = 0.0;
};

// Diagonal Gaussian mixture fitted by EM.
class DiagonalGmm {
public:
  DiagonalGmm() = default;
  DiagonalGmm(const Eigen::MatrixXd& x, int components, int iterations, double var_floor) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const int k = std::max(1, std::min<int>(components, static_cast<int>(n)));
    // Deterministic start: split the samples ordered by their row sum into k runs.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return x.row(a).sum() < x.row(b).sum(); });
    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index r = 0; r < n; ++r) {
      resp(order[static_cast<std::size_t>(r)], static_cast<Eigen::Index>(r * k / n)) = 1.0;
    }
    mean_.resize(k, d);
    var_.resize(k, d);
    weight_.resize(k);
    for (int it = 0; it < iterations; ++it) {
      // M step
      for (int c = 0; c < k; ++c) {
        const double nk = resp.col(c).sum() + 1e-12;
        weight_[c] = nk / static_cast<double>(n);
        mean_.row(c) = (resp.col(c).transpose() * x) / nk;
        const Eigen::MatrixXd diff = x.rowwise() - mean_.row(c);
        var_.row(c) = (resp.col(c).transpose() * diff.cwiseAbs2()) / nk;
        var_.row(c) = var_.row(c).array() + var_floor;
      }
      // E step
      double total = 0.0;
      for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::VectorXd lp(k);
        for (int c = 0; c < k; ++c) lp[c] = std::log(weight_[c] + 1e-300) + component_log_pdf(c, x.row(r));
        const double mx = lp.maxCoeff();
        const double lse = mx + std::log((lp.array() - mx).exp().sum());
        total += lse;
        resp.row(r) = (lp.array() - lse).exp().transpose();
      }
      if (it > 0 && std::abs(total - last_) < 1e-10 * (1.0 + std::abs(total))) break;
      last_ = total;
    }
  }

  double log_likelihood(const Eigen::RowVectorXd& s) const {
    const Eigen::Index k = weight_.size();
    Eigen::VectorXd lp(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      lp[c] = std::log(weight_[c] + 1e-300) + component_log_pdf(static_cast<int>(c), s);
    }
    const double mx = lp.maxCoeff();
    return mx + std::log((lp.array() - mx).exp().sum());
  }

private:
  double component_log_pdf(int c, const Eigen::RowVectorXd& s) const {
    double lp = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      const double v = var_(c, j);
      const double dlt = s[j] - mean_(c, j);
      lp += -0.5 * (std::log(2.0 * M_PI * v) + dlt * dlt / v);
    }
    return lp;
  }

  Eigen::MatrixXd mean_;
  Eigen::MatrixXd var_;
  Eigen::VectorXd weight_;
  double last_ = 0.0;
};

class GmmFuser : public ScoreFuser {
public:
  GmmFuser(const ScoreMatrix& dev, const FusionConfig& cfg) {
    class_weights(dev.meta);  // both classes present
    std::vector<Eigen::Index> bf, pa;
    for (std::size_t i = 0; i < dev.meta.size(); ++i) {
      (dev.meta[i].is_bonafide() ? bf : pa).push_back(static_cast<Eigen::Index>(i));
    }
    bonafide_ = DiagonalGmm(dev.x(bf, Eigen::all), cfg.gmm_components, cfg.gmm_iterations, cfg.gmm_var_floor);
    attack_ = DiagonalGmm(dev.x(pa, Eigen::all), cfg.gmm_components, cfg.gmm_iterations, cfg.gmm_var_floor);
  }
  double fuse(const Eigen::VectorXd& s) const override {
    const Eigen::RowVectorXd r = s.transpose();
    return sigmoid(bonafide_.log_likelihood(r) - attack_.log_likelihood(r));
  }

private:
  DiagonalGmm bonafide_;
  DiagonalGmm attack_;
};

ScoreFile apply(const ScoreFuser& f, const ScoreMatrix& m, const std::string& fold) {
  ScoreFile out;
  out.fold = fold;
  for (std::size_t i = 0; i < m.meta.size(); ++i) {
    ScoreRow r = m.meta[i];
    r.score = f.fuse(m.x.row(static_cast<Eigen::Index>(i)).transpose());
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace

ScoreMatrix align_scores(const std::vector<ScoreFile>& systems) {
  if (systems.empty()) throw EvaluationError("no score files to fuse");
  ScoreMatrix m;
  m.meta = systems[0].rows;
  m.x.resize(static_cast<Eigen::Index>(m.meta.size()), static_cast<Eigen::Index>(systems.size()));
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const auto idx = match_ids(m.meta, systems[s].rows, [](const ScoreRow& r) { return r.sample_id; }, s);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const ScoreRow& r = systems[s].rows[idx[i]];
      if (r.label != m.meta[i].label) {
        throw EvaluationError("label mismatch for " + r.sample_id + " in system " + std::to_string(s));
      }
      m.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = r.score;
    }
  }
  return m;
}

std::unique_ptr<ScoreFuser> fit_fuser(FusionMethod method, const ScoreMatrix& dev,
                                      const FusionConfig& cfg) {
  switch (method) {
    case FusionMethod::Mean: return std::make_unique<MeanFuser>();
    case FusionMethod::LLR: return std::make_unique<LlrFuser>(dev, cfg);
    case FusionMethod::MLP: return std::make_unique<MlpFuser>(dev, cfg);
    case FusionMethod::GMM: return std::make_unique<GmmFuser>(dev, cfg);
  }
  throw EvaluationError("unknown fusion method");
}

FusedScores fuse_scores_with_dev(FusionMethod method, const std::vector<ScoreFile>& dev,
                                 const std::vector<ScoreFile>& test, const FusionConfig& cfg) {
  if (dev.size() != test.size()) throw EvaluationError("dev and test system counts differ");
  const ScoreMatrix d = align_scores(dev);
  const ScoreMatrix t = align_scores(test);
  const auto fuser = fit_fuser(method, d, cfg);
  return {apply(*fuser, d, "dev"), apply(*fuser, t, "test")};
}

ScoreFile fuse_scores(FusionMethod method, const std::vector<ScoreFile>& dev,
                      const std::vector<ScoreFile>& test, const FusionConfig& cfg) {
  return fuse_scores_with_dev(method, dev, test, cfg).test;
}

namespace {

ScoreMatrix concat_embeddings(const std::vector<EmbeddingTable>& tables) {
  if (tables.empty()) throw EvaluationError("no embeddings to fuse");
  ScoreMatrix m;
  m.meta = tables[0].meta;
  Eigen::Index dim = 0;
  for (const auto& t : tables) dim += t.features.cols();
  m.x.resize(static_cast<Eigen::Index>(m.meta.size()), dim);
  Eigen::Index col = 0;
  for (std::size_t s = 0; s < tables.size(); ++s) {
    const auto& t = tables[s];
    const auto idx = match_ids(m.meta, t.meta, [](const ScoreRow& r) { return r.sample_id; }, s);
    if (!t.features.allFinite()) throw EvaluationError("non-finite embedding values");
    for (std::size_t i = 0; i < idx.size(); ++i) {
      m.x.block(static_cast<Eigen::Index>(i), col, 1, t.features.cols()) =
          t.features.row(static_cast<Eigen::Index>(idx[i]));
    }
    col += t.features.cols();
  }
  return m;
}

std::vector<int> labels_of(const std::vector<ScoreRow>& meta) {
  std::vector<int> y;
  for (const auto& r : meta) y.push_back(r.is_bonafide() ? 1 : 0);
  return y;
}

}  // namespace

FusedScores fuse_features(const std::vector<EmbeddingTable>& dev,
                          const std::vector<EmbeddingTable>& test,
                          const models::LinearClassifierConfig& cfg) {
  if (dev.size() != test.size()) throw EvaluationError("dev and test system counts differ");
  const ScoreMatrix d = concat_embeddings(dev);
  const ScoreMatrix t = concat_embeddings(test);
  const auto clf = models::fit_linear_classifier(d.x, labels_of(d.meta), cfg);
  FusedScores out;
  out.dev.fold = "dev";
  out.test.fold = "test";
  const Eigen::VectorXd sd = clf.scores(d.x);
  const Eigen::VectorXd st = clf.scores(t.x);
  for (std::size_t i = 0; i < d.meta.size(); ++i) {
    out.dev.rows.push_back(d.meta[i]);
    out.dev.rows.back().score = sd[static_cast<Eigen::Index>(i)];
  }
  for (std::size_t i = 0; i < t.meta.size(); ++i) {
    out.test.rows.push_back(t.meta[i]);
    out.test.rows.back().score = st[static_cast<Eigen::Index>(i)];
  }
  return out;
}

}  // namespace mcpad::evaluation
