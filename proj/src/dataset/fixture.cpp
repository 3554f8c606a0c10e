#include "mcpad/dataset/fixture.hpp"

#include <array>
#include <cstdio>
#include <filesystem>

namespace mcpad::dataset {

namespace {

struct FoldCounts {
  const char* cls;
  std::array<int, 3> per_fold;  // train, dev, test
};

// Curated grandtest composition, by fold.
constexpr FoldCounts kCounts[] = {
    {"bonafide", {228, 145, 182}},   {"Flexiblemask", {90, 86, 48}},
    {"Glasses", {36, 38, 36}},       {"Makeup", {174, 241, 132}},
    {"Mannequin", {20, 38, 77}},     {"Papermask", {28, 24, 49}},
    {"Print", {48, 98, 0}},          {"Replay", {36, 100, 126}},
    {"Rigidmask", {162, 118, 140}},  {"Tattoo", {24, 24, 24}},
};

// Borderline presentations removed by curation.
constexpr std::array<int, 3> kWigs{5, 4, 3};
constexpr std::array<int, 3> kRetroGlasses{4, 4, 4};
constexpr std::array<int, 3> kMakeupLevel0{87, 120, 66};

constexpr std::array<int, 3> kSubjects{25, 20, 20};
constexpr int kFramesPerVideo = 10;

}  // namespace

ProtocolFixture make_protocol_fixture() {
  ProtocolFixture fx;
  std::array<std::vector<std::string>, 3> subjects;
  int next_subject = 1;
  for (int f = 0; f < 3; ++f) {
    for (int s = 0; s < kSubjects[static_cast<std::size_t>(f)]; ++s) {
      char id[32];
      std::snprintf(id, sizeof(id), "subject_%03d", next_subject++);
      subjects[static_cast<std::size_t>(f)].push_back(id);
      fx.folds[id] = kAllFolds[f];
    }
  }

  int serial = 0;
  auto add = [&](int fold, int k, Label label, std::optional<AttackType> type,
                 std::optional<int> level, bool wig, bool retro) {
    SampleRecord r;
    char id[32];
    std::snprintf(id, sizeof(id), "video_%05d", ++serial);
    r.sample_id = id;
    const auto& subj = subjects[static_cast<std::size_t>(fold)];
    r.subject_id = subj[static_cast<std::size_t>(k) % subj.size()];
    r.session_id = "session_" + std::to_string(1 + k % 3);
    r.label = label;
    r.attack_type = type;
    r.makeup_level = level;
    r.wig = wig;
    r.retro_glasses = retro;
    r.frames = kFramesPerVideo;
    fx.records.push_back(std::move(r));
  };

  for (int f = 0; f < 3; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    for (const FoldCounts& c : kCounts) {
      const auto type = parse_attack_type(c.cls);
      const Label label = type ? Label::Attack : Label::Bonafide;
      for (int k = 0; k < c.per_fold[fi]; ++k) {
        std::optional<int> level;
        if (type == AttackType::Makeup) level = 1 + k % 2;
        add(f, k, label, type, level, false, false);
      }
    }
    for (int k = 0; k < kWigs[fi]; ++k) {
      add(f, k, Label::Attack, AttackType::Glasses, std::nullopt, true, false);
    }
    for (int k = 0; k < kRetroGlasses[fi]; ++k) {
      add(f, k + 1, Label::Attack, AttackType::Glasses, std::nullopt, false, true);
    }
    for (int k = 0; k < kMakeupLevel0[fi]; ++k) {
      add(f, k + 2, Label::Attack, AttackType::Makeup, 0, false, false);
    }
  }
  return fx;
}

void write_protocol_fixture(const std::string& dir) {
  const ProtocolFixture fx = make_protocol_fixture();
  const std::filesystem::path root(dir);
  save_manifest((root / "manifest.json").string(), fx.records);
  save_folds((root / "folds.json").string(), fx.folds);
}

}  // namespace mcpad::dataset
