#include "mcpad/dataset/manifest.hpp"

#include <cmath>
#include <set>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"

namespace mcpad::dataset {

namespace {

using ojson = nlohmann::ordered_json;

ojson point_json(const preprocess::Point2& p) { return ojson::array({p.x, p.y}); }

preprocess::Point2 point_from(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw SchemaError(path, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json parse_file(const std::string& path) {
  const std::string text = binio::read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

std::string_view label_name(Label l) { return l == Label::Bonafide ? "bonafide" : "attack"; }

std::string_view attack_type_name(AttackType t) {
  switch (t) {
    case AttackType::Flexiblemask: return "Flexiblemask";
    case AttackType::Glasses: return "Glasses";
    case AttackType::Makeup: return "Makeup";
    case AttackType::Mannequin: return "Mannequin";
    case AttackType::Papermask: return "Papermask";
    case AttackType::Print: return "Print";
    case AttackType::Replay: return "Replay";
    case AttackType::Rigidmask: return "Rigidmask";
    case AttackType::Tattoo: return "Tattoo";
  }
  return "?";
}

std::optional<AttackType> parse_attack_type(std::string_view name) {
  for (AttackType t : kAllAttackTypes) {
    if (attack_type_name(t) == name) return t;
  }
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view name) {
  if (name == "bonafide") return Label::Bonafide;
  if (name == "attack") return Label::Attack;
  return std::nullopt;
}

std::string SampleRecord::class_name() const {
  if (label == Label::Bonafide || !attack_type) return "bonafide";
  return std::string(attack_type_name(*attack_type));
}

void validate_record(const SampleRecord& r, const std::string& path) {
  if (r.sample_id.empty()) throw SchemaError(path + ".sample_id", "must be non-empty");
  if (r.subject_id.empty()) throw SchemaError(path + ".subject_id", "must be non-empty");
  if ((r.label == Label::Attack) != r.attack_type.has_value()) {
    throw SchemaError(path + ".attack_type", "must be present iff label is attack");
  }
  const bool makeup = r.attack_type == AttackType::Makeup;
  if (makeup != r.makeup_level.has_value()) {
    throw SchemaError(path + ".makeup_level", "must be present iff attack_type is Makeup");
  }
  if (r.makeup_level && (*r.makeup_level < 0 || *r.makeup_level > 2)) {
    throw SchemaError(path + ".makeup_level", "must be 0, 1 or 2");
  }
  if (r.frames < 0) throw SchemaError(path + ".frames", "must be >= 0");
  if (!r.landmarks.empty() && static_cast<int>(r.landmarks.size()) != r.frames) {
    throw SchemaError(path + ".landmarks", "must be empty or hold one entry per frame");
  }
}

ojson record_to_json(const SampleRecord& r) {
  ojson j;
  j["sample_id"] = r.sample_id;
  j["subject_id"] = r.subject_id;
  j["session_id"] = r.session_id;
  j["label"] = std::string(label_name(r.label));
  j["attack_type"] = r.attack_type ? ojson(std::string(attack_type_name(*r.attack_type))) : ojson();
  j["makeup_level"] = r.makeup_level ? ojson(*r.makeup_level) : ojson();
  j["wig"] = r.wig;
  j["retro_glasses"] = r.retro_glasses;
  j["frames"] = r.frames;
  ojson lms = ojson::array();
  for (const auto& lm : r.landmarks) {
    ojson e;
    e["left_eye"] = point_json(lm.left_eye);
    e["right_eye"] = point_json(lm.right_eye);
    if (lm.nose) e["nose"] = point_json(*lm.nose);
    if (lm.mouth_left) e["mouth_left"] = point_json(*lm.mouth_left);
    if (lm.mouth_right) e["mouth_right"] = point_json(*lm.mouth_right);
    lms.push_back(e);
  }
  j["landmarks"] = lms;
  return j;
}

SampleRecord record_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "record must be an object");
  auto field = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "." + key, "missing field");
    return *it;
  };
  auto str = [&](const char* key) {
    const auto& v = field(key);
    if (!v.is_string()) throw SchemaError(path + "." + key, "expected a string");
    return v.get<std::string>();
  };
  auto flag = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return false;
    if (!it->is_boolean()) throw SchemaError(path + "." + key, "expected a boolean");
    return it->get<bool>();
  };

  SampleRecord r;
  r.sample_id = str("sample_id");
  r.subject_id = str("subject_id");
  r.session_id = j.contains("session_id") && j["session_id"].is_string()
                     ? j["session_id"].get<std::string>()
                     : std::string();
  const auto label = parse_label(str("label"));
  if (!label) throw SchemaError(path + ".label", "expected bonafide or attack");
  r.label = *label;

  if (auto it = j.find("attack_type"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError(path + ".attack_type", "expected a string");
    r.attack_type = parse_attack_type(it->get<std::string>());
    if (!r.attack_type) {
      throw SchemaError(path + ".attack_type", "unknown attack type " + it->get<std::string>());
    }
  }
  if (auto it = j.find("makeup_level"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw SchemaError(path + ".makeup_level", "expected an integer");
    r.makeup_level = it->get<int>();
  }
  r.wig = flag("wig");
  r.retro_glasses = flag("retro_glasses");
  const auto& frames = field("frames");
  if (!frames.is_number_integer()) throw SchemaError(path + ".frames", "expected an integer");
  r.frames = frames.get<int>();

  if (auto it = j.find("landmarks"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError(path + ".landmarks", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string lp = path + ".landmarks[" + std::to_string(i) + "]";
      const auto& e = (*it)[i];
      if (!e.is_object()) throw SchemaError(lp, "expected an object");
      preprocess::FaceLandmarks lm;
      if (!e.contains("left_eye")) throw SchemaError(lp + ".left_eye", "missing field");
      if (!e.contains("right_eye")) throw SchemaError(lp + ".right_eye", "missing field");
      lm.left_eye = point_from(e["left_eye"], lp + ".left_eye");
      lm.right_eye = point_from(e["right_eye"], lp + ".right_eye");
      if (e.contains("nose")) lm.nose = point_from(e["nose"], lp + ".nose");
      if (e.contains("mouth_left")) lm.mouth_left = point_from(e["mouth_left"], lp + ".mouth_left");
      if (e.contains("mouth_right")) {
        lm.mouth_right = point_from(e["mouth_right"], lp + ".mouth_right");
      }
      r.landmarks.push_back(lm);
    }
  }
  validate_record(r, path);
  return r;
}

std::vector<SampleRecord> manifest_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SchemaError("$", "manifest must be an array of records");
  std::vector<SampleRecord> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "$[" + std::to_string(i) + "]";
    out.push_back(record_from_json(j[i], path));
    if (!seen.insert(out.back().sample_id).second) {
      throw SchemaError(path + ".sample_id", "duplicate sample_id " + out.back().sample_id);
    }
  }
  return out;
}

ojson manifest_to_json(const std::vector<SampleRecord>& records) {
  ojson j = ojson::array();
  for (const auto& r : records) j.push_back(record_to_json(r));
  return j;
}

std::vector<SampleRecord> load_manifest(const std::string& path) {
  return manifest_from_json(parse_file(path));
}

void save_manifest(const std::string& path, const std::vector<SampleRecord>& records) {
  binio::write_file(path, manifest_to_json(records).dump(1) + "\n");
}

std::string_view fold_name(Fold f) {
  switch (f) {
    case Fold::Train: return "train";
    case Fold::Dev: return "dev";
    case Fold::Test: return "test";
  }
  return "?";
}

std::optional<Fold> parse_fold(std::string_view name) {
  for (Fold f : kAllFolds) {
    if (fold_name(f) == name) return f;
  }
  return std::nullopt;
}

FoldAssignment load_folds(const std::string& path) {
  const nlohmann::json j = parse_file(path);
  if (!j.is_object()) throw SchemaError("$", "fold assignment must map subject_id to fold");
  FoldAssignment out;
  for (const auto& [subject, v] : j.items()) {
    const auto f = v.is_string() ? parse_fold(v.get<std::string>()) : std::nullopt;
    if (!f) throw SchemaError("$." + subject, "expected train, dev or test");
    out[subject] = *f;
  }
  return out;
}

void save_folds(const std::string& path, const FoldAssignment& folds) {
  ojson j = ojson::object();
  for (const auto& [subject, f] : folds) j[subject] = std::string(fold_name(f));
  binio::write_file(path, j.dump(1) + "\n");
}

std::vector<int> sample_frames(int frame_count, int n) {
  if (frame_count < 1 || n < 1) throw Error("sample_frames needs N >= 1 and n >= 1");
  std::vector<int> out;
  if (frame_count <= n) {
    for (int i = 0; i < frame_count; ++i) out.push_back(i);
    return out;
  }
  if (n == 1) return {0};
  for (int i = 0; i < n; ++i) {
    // Exact rational half-up rounding: floor((2*i*(N-1) + (n-1)) / (2*(n-1))).
    const long long num = 2LL * i * (frame_count - 1) + (n - 1);
    const int idx = static_cast<int>(num / (2LL * (n - 1)));
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

}  // namespace mcpad::dataset
