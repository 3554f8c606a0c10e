#include "mcpad/protocols/protocol.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"

namespace mcpad::protocols {

namespace {

using dataset::Label;

std::unordered_map<std::string, const SampleRecord*> index_manifest(
    const std::vector<SampleRecord>& manifest) {
  std::unordered_map<std::string, const SampleRecord*> idx;
  for (const auto& r : manifest) idx.emplace(r.sample_id, &r);
  return idx;
}

}  // namespace

bool is_borderline(const SampleRecord& r, const CurationRules& rules) {
  if (rules.exclude_wig && r.wig) return true;
  if (rules.exclude_retro_glasses && r.retro_glasses) return true;
  if (rules.exclude_makeup_level0 && r.attack_type == AttackType::Makeup && r.makeup_level == 0) {
    return true;
  }
  return false;
}

std::vector<AttackType> protocol_attack_types(std::string_view kind) {
  if (kind == "grandtest-c") {
    return {std::begin(dataset::kAllAttackTypes), std::end(dataset::kAllAttackTypes)};
  }
  if (kind == "impersonation-c") {
    return {AttackType::Flexiblemask, AttackType::Mannequin, AttackType::Papermask,
            AttackType::Print,        AttackType::Replay,    AttackType::Rigidmask};
  }
  if (kind == "obfuscation-c") return {AttackType::Glasses, AttackType::Makeup, AttackType::Tattoo};
  throw ProtocolError("unknown protocol kind '" + std::string(kind) +
                      "' (expected grandtest-c, impersonation-c or obfuscation-c)");
}

ProtocolDefinition build_protocol(const std::vector<SampleRecord>& manifest, std::string_view kind,
                                  const dataset::FoldAssignment& folds) {
  const std::vector<AttackType> keep = protocol_attack_types(kind);
  ProtocolDefinition p;
  p.name = std::string(kind);
  for (const auto& r : manifest) {
    auto it = folds.find(r.subject_id);
    if (it == folds.end()) {
      throw ProtocolError("subject " + r.subject_id + " of " + r.sample_id +
                          " has no fold assignment");
    }
    if (is_borderline(r, p.curation)) continue;
    if (r.label == Label::Attack &&
        std::find(keep.begin(), keep.end(), *r.attack_type) == keep.end()) {
      continue;
    }
    p.fold(it->second).push_back(r.sample_id);
  }
  return p;
}

std::vector<AttackType> loo_attack_types() {
  return {AttackType::Flexiblemask, AttackType::Glasses,   AttackType::Makeup,
          AttackType::Mannequin,    AttackType::Papermask, AttackType::Rigidmask,
          AttackType::Tattoo,       AttackType::Replay};
}

ProtocolDefinition build_loo(const ProtocolDefinition& grandtest,
                             const std::vector<SampleRecord>& manifest, AttackType attack) {
  if (attack == AttackType::Print) {
    throw ProtocolError("no leave-one-out protocol exists for Print");
  }
  const auto idx = index_manifest(manifest);
  auto lookup = [&](const std::string& id) -> const SampleRecord& {
    auto it = idx.find(id);
    if (it == idx.end()) throw ProtocolError("sample " + id + " not in manifest");
    return *it->second;
  };

  ProtocolDefinition p;
  p.name = "LOO_" + std::string(dataset::attack_type_name(attack));
  p.curation = grandtest.curation;
  p.left_out = attack;
  for (Fold f : dataset::kAllFolds) {
    for (const std::string& id : grandtest.fold(f)) {
      const SampleRecord& r = lookup(id);
      const bool is_attack = r.attack_type == attack;
      const bool keep = f == Fold::Test ? (r.is_bonafide() || is_attack) : !is_attack;
      if (keep) p.fold(f).push_back(id);
    }
  }
  return p;
}

ProtocolDefinition build_named_protocol(const std::vector<SampleRecord>& manifest,
                                        const dataset::FoldAssignment& folds,
                                        std::string_view name) {
  constexpr std::string_view kLoo = "LOO_";
  if (name.substr(0, kLoo.size()) == kLoo) {
    const auto attack = dataset::parse_attack_type(name.substr(kLoo.size()));
    if (!attack) throw ProtocolError("unknown attack in protocol name " + std::string(name));
    return build_loo(build_protocol(manifest, "grandtest-c", folds), manifest, *attack);
  }
  return build_protocol(manifest, name, folds);
}

std::string_view violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::SubjectOverlap: return "subject-overlap";
    case ViolationKind::CurationLeak: return "curation-leak";
    case ViolationKind::EmptyFold: return "empty-fold";
    case ViolationKind::DuplicateSample: return "duplicate-sample";
    case ViolationKind::UnknownSample: return "unknown-sample";
    case ViolationKind::LeftOutLeak: return "left-out-leak";
  }
  return "?";
}

std::vector<Violation> validate_protocol(const ProtocolDefinition& p,
                                         const std::vector<SampleRecord>& manifest) {
  std::vector<Violation> out;
  const auto idx = index_manifest(manifest);
  std::map<std::string, std::set<Fold>> subject_folds;
  std::set<std::string> seen;

  for (Fold f : dataset::kAllFolds) {
    const auto& ids = p.fold(f);
    if (ids.empty()) {
      out.push_back({ViolationKind::EmptyFold, std::string(dataset::fold_name(f)) + " is empty"});
    }
    for (const std::string& id : ids) {
      if (!seen.insert(id).second) {
        out.push_back({ViolationKind::DuplicateSample, id + " appears more than once"});
      }
      auto it = idx.find(id);
      if (it == idx.end()) {
        out.push_back({ViolationKind::UnknownSample, id + " is not in the manifest"});
        continue;
      }
      const SampleRecord& r = *it->second;
      subject_folds[r.subject_id].insert(f);
      if (is_borderline(r, p.curation)) {
        out.push_back({ViolationKind::CurationLeak, id + " is a borderline presentation"});
      }
      if (p.left_out) {
        const bool is_left_out = r.attack_type == *p.left_out;
        if (f != Fold::Test && is_left_out) {
          out.push_back({ViolationKind::LeftOutLeak, id + " (left-out attack) in " +
                                                         std::string(dataset::fold_name(f))});
        }
        if (f == Fold::Test && !r.is_bonafide() && !is_left_out) {
          out.push_back({ViolationKind::LeftOutLeak, id + " is a seen attack in test"});
        }
      }
    }
  }
  for (const auto& [subject, fs] : subject_folds) {
    if (fs.size() > 1) {
      out.push_back({ViolationKind::SubjectOverlap, "subject " + subject + " spans " +
                                                        std::to_string(fs.size()) + " folds"});
    }
  }
  return out;
}

std::array<FoldStats, 3> protocol_stats(const ProtocolDefinition& p,
                                        const std::vector<SampleRecord>& manifest) {
  const auto idx = index_manifest(manifest);
  std::array<FoldStats, 3> out;
  for (Fold f : dataset::kAllFolds) {
    FoldStats& s = out[static_cast<std::size_t>(f)];
    for (const std::string& id : p.fold(f)) {
      auto it = idx.find(id);
      if (it == idx.end()) throw ProtocolError("sample " + id + " not in manifest");
      const SampleRecord& r = *it->second;
      (r.is_bonafide() ? s.bonafide : s.attacks)++;
      s.by_class[r.class_name()]++;
    }
  }
  return out;
}

nlohmann::ordered_json protocol_to_json(const ProtocolDefinition& p) {
  nlohmann::ordered_json j;
  j["name"] = p.name;
  j["curation"] = {{"exclude_wig", p.curation.exclude_wig},
                   {"exclude_retro_glasses", p.curation.exclude_retro_glasses},
                   {"exclude_makeup_level0", p.curation.exclude_makeup_level0}};
  j["left_out"] = p.left_out ? nlohmann::ordered_json(std::string(
                                   dataset::attack_type_name(*p.left_out)))
                             : nlohmann::ordered_json();
  nlohmann::ordered_json folds;
  for (Fold f : dataset::kAllFolds) folds[std::string(dataset::fold_name(f))] = p.fold(f);
  j["folds"] = folds;
  return j;
}

ProtocolDefinition protocol_from_json(const nlohmann::json& j) {
  ProtocolDefinition p;
  try {
    p.name = j.at("name").get<std::string>();
    const auto& c = j.at("curation");
    p.curation.exclude_wig = c.at("exclude_wig").get<bool>();
    p.curation.exclude_retro_glasses = c.at("exclude_retro_glasses").get<bool>();
    p.curation.exclude_makeup_level0 = c.at("exclude_makeup_level0").get<bool>();
    if (j.contains("left_out") && !j["left_out"].is_null()) {
      p.left_out = dataset::parse_attack_type(j["left_out"].get<std::string>());
      if (!p.left_out) throw SchemaError("$.left_out", "unknown attack type");
    }
    for (Fold f : dataset::kAllFolds) {
      p.fold(f) = j.at("folds").at(std::string(dataset::fold_name(f))).get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("$", std::string("protocol file: ") + e.what());
  }
  return p;
}

void save_protocol(const std::string& path, const ProtocolDefinition& p) {
  binio::write_file(path, protocol_to_json(p).dump(1) + "\n");
}

ProtocolDefinition load_protocol(const std::string& path) {
  try {
    return protocol_from_json(nlohmann::json::parse(binio::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace mcpad::protocols
