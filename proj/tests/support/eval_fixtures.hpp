#pragma once

// Brute-force metric oracle and seeded score fixtures shared by the unit and
// acceptance tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mcpad/evaluation/scores.hpp"

namespace fixtures {

using mcpad::dataset::AttackType;
using mcpad::dataset::Label;
using mcpad::evaluation::ScoreFile;
using mcpad::evaluation::ScoreRow;

struct Counted {
  int bonafide = 0, attacks = 0, rejected_bonafide = 0, accepted_attacks = 0;
};

// Direct counting with the accept-iff-score>=tau rule.
inline Counted count(const ScoreFile& f, double tau) {
  Counted c;
  for (const auto& r : f.rows) {
    if (r.label == Label::Bonafide) {
      ++c.bonafide;
      if (!(r.score >= tau)) ++c.rejected_bonafide;
    } else {
      ++c.attacks;
      if (r.score >= tau) ++c.accepted_attacks;
    }
  }
  return c;
}

inline ScoreRow row(const std::string& id, bool bonafide, double score,
                    AttackType type = AttackType::Print) {
  ScoreRow r;
  r.sample_id = id;
  r.label = bonafide ? Label::Bonafide : Label::Attack;
  if (!bonafide) r.attack_type = type;
  r.score = score;
  return r;
}

// Random score set; scores drawn from a coarse grid so ties with tau occur.
inline ScoreFile random_scores(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> nb(1, 60), na(1, 60), grid(0, 50), type(0, 8);
  ScoreFile f;
  const int b = nb(gen), a = na(gen);
  for (int i = 0; i < b; ++i) f.rows.push_back(row("b" + std::to_string(i), true, grid(gen) / 50.0));
  for (int i = 0; i < a; ++i) {
    f.rows.push_back(row("a" + std::to_string(i), false, grid(gen) / 50.0,
                         mcpad::dataset::kAllAttackTypes[type(gen)]));
  }
  std::shuffle(f.rows.begin(), f.rows.end(), gen);
  return f;
}

// 100 bonafide scores 0.01 .. 1.00.
inline ScoreFile ramp_fixture() {
  ScoreFile f;
  for (int i = 1; i <= 100; ++i) f.rows.push_back(row("b" + std::to_string(i), true, i / 100.0));
  return f;
}

// Per-system score files: bonafide around 0.9, attacks around 0.1, sd 0.02.
inline std::vector<ScoreFile> separable_systems(int systems, int bonafide, int attacks,
                                                std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<ScoreFile> out(static_cast<std::size_t>(systems));
  for (int i = 0; i < bonafide + attacks; ++i) {
    const bool bona = i < bonafide;
    for (auto& f : out) {
      f.rows.push_back(row("s" + std::to_string(i), bona, (bona ? 0.9 : 0.1) + noise(gen)));
    }
  }
  return out;
}

// The separable fusion fixture: two systems, 99 dev bonafide (so the 1% target
// selects the lowest dev bonafide score) and a smaller test fold.
inline std::vector<ScoreFile> separable_dev() { return separable_systems(2, 99, 100, 11); }
inline std::vector<ScoreFile> separable_test() { return separable_systems(2, 20, 20, 12); }

}  // namespace fixtures
