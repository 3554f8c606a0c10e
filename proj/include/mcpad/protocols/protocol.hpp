#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcpad/dataset/manifest.hpp"

namespace mcpad::protocols {

using dataset::AttackType;
using dataset::Fold;
using dataset::SampleRecord;

struct CurationRules {
  bool exclude_wig = true;
  bool exclude_retro_glasses = true;
  bool exclude_makeup_level0 = true;
};

struct ProtocolDefinition {
  std::string name;  ///< "grandtest-c", "impersonation-c", "obfuscation-c", "LOO_<Attack>"
  CurationRules curation;
  std::optional<AttackType> left_out;
  std::array<std::vector<std::string>, 3> folds;  ///< sample ids, manifest order

  const std::vector<std::string>& fold(Fold f) const {
    return folds[static_cast<std::size_t>(f)];
  }
  std::vector<std::string>& fold(Fold f) { return folds[static_cast<std::size_t>(f)]; }
};

/// True when curation drops the record.
bool is_borderline(const SampleRecord& r, const CurationRules& rules = {});

/// Attack types admitted by a curated protocol kind; throws ProtocolError for
/// an unknown kind.
std::vector<AttackType> protocol_attack_types(std::string_view kind);

ProtocolDefinition build_protocol(const std::vector<SampleRecord>& manifest, std::string_view kind,
                                  const dataset::FoldAssignment& folds);

/// Leave-one-out split derived from grandtest-c: `attack` is removed from train
/// and dev, and test keeps bonafide plus `attack` only. Print is rejected.
ProtocolDefinition build_loo(const ProtocolDefinition& grandtest,
                             const std::vector<SampleRecord>& manifest, AttackType attack);

/// The eight attack types that have a LOO protocol.
std::vector<AttackType> loo_attack_types();

/// Builds any named protocol: the three curated kinds or "LOO_<Attack>".
ProtocolDefinition build_named_protocol(const std::vector<SampleRecord>& manifest,
                                        const dataset::FoldAssignment& folds,
                                        std::string_view name);

enum class ViolationKind { SubjectOverlap, CurationLeak, EmptyFold, DuplicateSample, UnknownSample, LeftOutLeak };

struct Violation {
  ViolationKind kind;
  std::string detail;
};

std::string_view violation_name(ViolationKind k);

std::vector<Violation> validate_protocol(const ProtocolDefinition& p,
                                         const std::vector<SampleRecord>& manifest);

struct FoldStats {
  int bonafide = 0;
  int attacks = 0;
  std::map<std::string, int> by_class;  ///< class_name() -> count
};

std::array<FoldStats, 3> protocol_stats(const ProtocolDefinition& p,
                                        const std::vector<SampleRecord>& manifest);

nlohmann::ordered_json protocol_to_json(const ProtocolDefinition& p);
ProtocolDefinition protocol_from_json(const nlohmann::json& j);
void save_protocol(const std::string& path, const ProtocolDefinition& p);
ProtocolDefinition load_protocol(const std::string& path);

}  // namespace mcpad::protocols
