#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "../support/scratch.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/dataset/fixture.hpp"
#include "mcpad/protocols/protocol.hpp"

using namespace mcpad;
using namespace mcpad::protocols;
using dataset::AttackType;
namespace fs = std::filesystem;

namespace {

struct Counts {
  int bonafide, attacks;
};

// Published per-fold bonafide / attack video counts.
const std::map<std::string, std::array<Counts, 3>> kTable = {
    {"grandtest-c", {{{228, 618}, {145, 767}, {182, 632}}}},
    {"impersonation-c", {{{228, 384}, {145, 464}, {182, 440}}}},
    {"obfuscation-c", {{{228, 234}, {145, 303}, {182, 192}}}},
    {"LOO_Flexiblemask", {{{228, 528}, {145, 681}, {182, 48}}}},
    {"LOO_Glasses", {{{228, 582}, {145, 729}, {182, 36}}}},
    {"LOO_Makeup", {{{228, 444}, {145, 526}, {182, 132}}}},
    {"LOO_Mannequin", {{{228, 598}, {145, 729}, {182, 77}}}},
    {"LOO_Papermask", {{{228, 590}, {145, 743}, {182, 49}}}},
    {"LOO_Rigidmask", {{{228, 456}, {145, 649}, {182, 140}}}},
    {"LOO_Tattoo", {{{228, 594}, {145, 743}, {182, 24}}}},
    {"LOO_Replay", {{{228, 582}, {145, 667}, {182, 126}}}},
};

class ProtocolTest : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    const fs::path dir = MCPAD_FIXTURE_DIR;
    manifest_ = new std::vector<dataset::SampleRecord>(
        dataset::load_manifest((dir / "manifest.json").string()));
    folds_ = new dataset::FoldAssignment(dataset::load_folds((dir / "folds.json").string()));
  }
  static void TearDownTestSuite() {
    delete manifest_;
    delete folds_;
  }
  static std::map<std::string, const dataset::SampleRecord*> by_id() {
    std::map<std::string, const dataset::SampleRecord*> m;
    for (const auto& r : *manifest_) m[r.sample_id] = &r;
    return m;
  }
  static std::vector<dataset::SampleRecord>* manifest_;
  static dataset::FoldAssignment* folds_;
};
std::vector<dataset::SampleRecord>* ProtocolTest::manifest_ = nullptr;
dataset::FoldAssignment* ProtocolTest::folds_ = nullptr;

}  // namespace

TEST_F(ProtocolTest, EveryPublishedCountReproduced) {
  for (const auto& [name, expected] : kTable) {
    const ProtocolDefinition p = build_named_protocol(*manifest_, *folds_, name);
    const auto stats = protocol_stats(p, *manifest_);
    for (int f = 0; f < 3; ++f) {
      EXPECT_EQ(stats[f].bonafide, expected[f].bonafide) << name << " fold " << f;
      EXPECT_EQ(stats[f].attacks, expected[f].attacks) << name << " fold " << f;
    }
    EXPECT_TRUE(validate_protocol(p, *manifest_).empty()) << name;
  }
}

TEST_F(ProtocolTest, ImpersonationTestHasNoPrintOrObfuscation) {
  const auto p = build_protocol(*manifest_, "impersonation-c", *folds_);
  const auto stats = protocol_stats(p, *manifest_);
  for (const char* cls : {"Glasses", "Makeup", "Tattoo", "Print"}) {
    EXPECT_EQ(stats[2].by_class.count(cls), 0u) << cls;
  }
  EXPECT_EQ(stats[0].by_class.at("Print"), 48);
}

TEST_F(ProtocolTest, LeaveOneOutExclusionExhaustive) {
  const auto ids = by_id();
  const auto grand = build_protocol(*manifest_, "grandtest-c", *folds_);
  ASSERT_EQ(loo_attack_types().size(), 8u);
  for (AttackType a : loo_attack_types()) {
    const auto p = build_loo(grand, *manifest_, a);
    for (Fold f : {Fold::Train, Fold::Dev}) {
      for (const auto& id : p.fold(f)) ASSERT_NE(ids.at(id)->attack_type, a);
    }
    int attacks = 0;
    for (const auto& id : p.fold(Fold::Test)) {
      const auto* r = ids.at(id);
      if (r->is_bonafide()) continue;
      ASSERT_EQ(r->attack_type, a);
      ++attacks;
    }
    EXPECT_GT(attacks, 0);
  }
  EXPECT_THROW(build_loo(grand, *manifest_, AttackType::Print), ProtocolError);
}

TEST_F(ProtocolTest, GrandtestCoversCuratedManifest) {
  const auto p = build_protocol(*manifest_, "grandtest-c", *folds_);
  std::set<std::string> in_protocol;
  for (const auto& f : p.folds) in_protocol.insert(f.begin(), f.end());
  std::set<std::string> curated;
  for (const auto& r : *manifest_) {
    const bool drop = r.wig || r.retro_glasses || (r.makeup_level && *r.makeup_level == 0);
    if (!drop) curated.insert(r.sample_id);
  }
  EXPECT_EQ(in_protocol, curated);
  EXPECT_EQ(protocol_to_json(p).dump(),
            protocol_to_json(build_protocol(*manifest_, "grandtest-c", *folds_)).dump());
}

TEST_F(ProtocolTest, ValidatorFindsInjectedFaults) {
  const auto ids = by_id();
  auto p = build_protocol(*manifest_, "grandtest-c", *folds_);

  // Move one train sample into test: its subject now spans two folds.
  auto overlap = p;
  overlap.fold(Fold::Test).push_back(overlap.fold(Fold::Train).front());
  overlap.fold(Fold::Train).erase(overlap.fold(Fold::Train).begin());
  auto v = validate_protocol(overlap, *manifest_);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::SubjectOverlap);

  auto leak = p;
  for (const auto& r : *manifest_) {
    if (r.makeup_level && *r.makeup_level == 0 && (*folds_).at(r.subject_id) == Fold::Dev) {
      leak.fold(Fold::Dev).push_back(r.sample_id);
      break;
    }
  }
  v = validate_protocol(leak, *manifest_);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::CurationLeak);

  auto empty = p;
  empty.fold(Fold::Dev).clear();
  v = validate_protocol(empty, *manifest_);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, ViolationKind::EmptyFold);
}

TEST_F(ProtocolTest, UnknownKindRejected) {
  EXPECT_THROW(build_protocol(*manifest_, "grandtest", *folds_), ProtocolError);
  EXPECT_THROW(build_named_protocol(*manifest_, *folds_, "LOO_Print"), ProtocolError);
}

TEST_F(ProtocolTest, JsonRoundTrip) {
  const auto grand = build_protocol(*manifest_, "grandtest-c", *folds_);
  const auto p = build_loo(grand, *manifest_, AttackType::Tattoo);
  const fs::path path = scratch::path("mcpad_protocol.json");
  save_protocol(path.string(), p);
  const auto back = load_protocol(path.string());
  EXPECT_EQ(back.name, "LOO_Tattoo");
  EXPECT_EQ(back.left_out, AttackType::Tattoo);
  EXPECT_EQ(back.folds, p.folds);
  fs::remove(path);
}
