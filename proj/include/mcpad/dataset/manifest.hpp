#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcpad/preprocess/landmarks.hpp"

namespace mcpad::dataset {

enum class Label { Bonafide, Attack };

enum class AttackType {
  Flexiblemask,
  Glasses,
  Makeup,
  Mannequin,
  Papermask,
  Print,
  Replay,
  Rigidmask,
  Tattoo,
};

inline constexpr AttackType kAllAttackTypes[] = {
    AttackType::Flexiblemask, AttackType::Glasses,   AttackType::Makeup,
    AttackType::Mannequin,    AttackType::Papermask, AttackType::Print,
    AttackType::Replay,       AttackType::Rigidmask, AttackType::Tattoo,
};

std::string_view label_name(Label l);
std::string_view attack_type_name(AttackType t);
std::optional<AttackType> parse_attack_type(std::string_view name);
std::optional<Label> parse_label(std::string_view name);

struct SampleRecord {
  std::string sample_id;
  std::string subject_id;
  std::string session_id;
  Label label = Label::Bonafide;
  std::optional<AttackType> attack_type;  ///< set iff label == Attack
  std::optional<int> makeup_level;        ///< set iff attack_type == Makeup
  bool wig = false;
  bool retro_glasses = false;
  int frames = 0;
  /// Empty, or one entry per raw frame (reference-raster coordinates).
  std::vector<preprocess::FaceLandmarks> landmarks;

  bool is_bonafide() const { return label == Label::Bonafide; }
  /// "bonafide" or the attack type name; used in score files and reports.
  std::string class_name() const;
};

/// Checks the record-level invariants; throws SchemaError with `path`.
void validate_record(const SampleRecord& r, const std::string& path);

nlohmann::ordered_json record_to_json(const SampleRecord& r);
SampleRecord record_from_json(const nlohmann::json& j, const std::string& path);

std::vector<SampleRecord> manifest_from_json(const nlohmann::json& j);
nlohmann::ordered_json manifest_to_json(const std::vector<SampleRecord>& records);

/// Throws IoError / ParseError / SchemaError (field path in the message).
std::vector<SampleRecord> load_manifest(const std::string& path);
void save_manifest(const std::string& path, const std::vector<SampleRecord>& records);

enum class Fold { Train, Dev, Test };
inline constexpr Fold kAllFolds[] = {Fold::Train, Fold::Dev, Fold::Test};

std::string_view fold_name(Fold f);
std::optional<Fold> parse_fold(std::string_view name);

/// subject_id -> fold.
using FoldAssignment = std::map<std::string, Fold>;

FoldAssignment load_folds(const std::string& path);
void save_folds(const std::string& path, const FoldAssignment& folds);

/// Uniform frame subsampling: round_half_up(i * (N-1) / (n-1)), deduplicated.
std::vector<int> sample_frames(int frame_count, int n = 10);

}  // namespace mcpad::dataset
