#include "mcpad/orchestrate/embeddings.hpp"

#include <map>

#include "mcpad/common/error.hpp"

namespace mcpad::orchestrate {

evaluation::EmbeddingTable collect_embeddings(const Workspace& ws, const models::Detector& detector,
                                              const protocols::ProtocolDefinition& protocol,
                                              dataset::Fold fold, double scale,
                                              int frames_per_video) {
  const auto manifest = ws.manifest();
  std::map<std::string, const dataset::SampleRecord*> index;
  for (const auto& r : manifest) index[r.sample_id] = &r;

  const auto& ids = protocol.fold(fold);
  evaluation::EmbeddingTable t;
  t.features.resize(static_cast<Eigen::Index>(ids.size()), detector.embedding_dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = index.find(ids[i]);
    if (it == index.end()) throw ProtocolError("sample " + ids[i] + " is not in the manifest");
    const auto& r = *it->second;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(detector.embedding_dim());
    const auto frames = dataset::sample_frames(r.frames, frames_per_video);
    for (int f : frames) {
      const fs::path p = ws.cube_path(scale, r.sample_id, f);
      if (!fs::exists(p)) throw IoError("missing cube for sample " + r.sample_id + ": " + p.string());
      const auto e = detector.extract_features(preprocess::read_cube(p.string()));
      for (std::size_t k = 0; k < e.size(); ++k) acc[static_cast<Eigen::Index>(k)] += e[k];
    }
    // Stored as float so the CSV (%.9g) reproduces it exactly.
    for (Eigen::Index k = 0; k < acc.size(); ++k) {
      t.features(static_cast<Eigen::Index>(i), k) =
          static_cast<float>(acc[k] / static_cast<double>(frames.size()));
    }
    evaluation::ScoreRow m;
    m.sample_id = r.sample_id;
    m.label = r.label;
    m.attack_type = r.attack_type;
    t.meta.push_back(m);
  }
  return t;
}

evaluation::EmbeddingTable export_embeddings(const Workspace& ws, const models::Checkpoint& ckpt,
                                             const protocols::ProtocolDefinition& protocol,
                                             dataset::Fold fold, double scale,
                                             const std::string& out_csv, int frames_per_video) {
  const models::Detector detector(ckpt);
  auto t = collect_embeddings(ws, detector, protocol, fold, scale, frames_per_video);
  evaluation::save_embeddings(out_csv, t);
  return t;
}

}  // namespace mcpad::orchestrate
