#include "mcpad/dataset/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mcpad/common/error.hpp"
#include "mcpad/common/rng.hpp"
#include "mcpad/dataset/frames.hpp"
#include "mcpad/preprocess/channels.hpp"

namespace mcpad::dataset {

namespace {

// NIR 735/850/940/1050, SWIR 940/1050/1200/1300/1450/1550/1650
constexpr int kBands = 11;
constexpr std::array<double, kBands> kBaseReflectance{0.50, 0.55, 0.55, 0.53, 0.55, 0.53,
                                                      0.50, 0.48, 0.46, 0.44, 0.43};
// Relative water absorption; 1 at 1450 nm.
constexpr std::array<double, kBands> kWaterAbsorption{0.0,  0.0, 0.08, 0.05, 0.08, 0.05,
                                                      0.25, 0.1, 1.0,  0.7,  0.5};

constexpr double kSpectralLevel = 50000.0;
constexpr double kAmbient = 20000.0;
constexpr double kBodyHeat = 8000.0;
constexpr double kFaceDistanceMm = 600.0;
constexpr double kBackgroundMm = 1200.0;
constexpr double kReliefMm = 80.0;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined key
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E5ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Subject {
  std::array<double, 3> tone;  // skin RGB at full shading
  double width_scale;
  double height_scale;
  std::array<double, 8> texture;  // sinusoid parameters of the albedo pattern
};

Subject make_subject(std::uint64_t seed, int index) {
  Rng r(mix(seed, 0x50B0ULL + static_cast<std::uint64_t>(index)));
  Subject s{};
  const double red = r.uniform(150.0, 225.0);
  s.tone = {red, red * r.uniform(0.68, 0.80), red * r.uniform(0.55, 0.68)};
  s.width_scale = r.uniform(0.92, 1.08);
  s.height_scale = r.uniform(0.92, 1.08);
  for (double& t : s.texture) t = r.uniform(0.0, 1.0);
  return s;
}

// Region of a partial attack in face-local coordinates (u, v in [-1, 1]).
double partial_mask(AttackType type, double u, double v) {
  auto blob = [](double du, double dv, double r) {
    const double d2 = (du * du + dv * dv) / (r * r);
    return d2 < 1.0 ? 1.0 : 0.0;
  };
  switch (type) {
    case AttackType::Glasses:
      return std::max({blob(u + 0.45, v + 0.25, 0.24), blob(u - 0.45, v + 0.25, 0.24),
                       (std::abs(u) < 0.25 && std::abs(v + 0.27) < 0.03) ? 1.0 : 0.0});
    case AttackType::Makeup:
      return std::max({blob(u + 0.45, v + 0.3, 0.2), blob(u - 0.45, v + 0.3, 0.2),
                       blob((u) / 1.8, v - 0.45, 0.1)});
    case AttackType::Tattoo: {
      const double in = blob(u - 0.42, v - 0.15, 0.22);
      return in * (std::sin(40.0 * (u + v)) > 0.0 ? 1.0 : 0.4);
    }
    default: return 0.0;
  }
}

struct Material {
  double skin = 1.0;      // 1 = living skin spectrum, 0 = flat artifact spectrum
  double coldness = 0.0;  // 0 = body temperature, 1 = ambient
  double flat = 0.0;      // planar artifact (Print / Replay)
};

Material material_for(const SampleRecord& rec) {
  if (!rec.attack_type) return {};
  switch (*rec.attack_type) {
    case AttackType::Print: return {0.0, 1.0, 1.0};
    case AttackType::Replay: return {0.0, 0.5, 1.0};
    case AttackType::Mannequin: return {0.0, 1.0, 0.0};
    case AttackType::Rigidmask:
    case AttackType::Papermask: return {0.0, 0.7, 0.0};
    case AttackType::Flexiblemask: return {0.0, 0.6, 0.0};
    case AttackType::Glasses:
    case AttackType::Makeup:
    case AttackType::Tattoo: return {};
  }
  return {};
}

std::array<double, 3> rgb_cue(const SampleRecord& rec, std::array<double, 3> rgb, double region,
                              double u, double v, double strength) {
  if (!rec.attack_type) return rgb;
  const double k = strength;
  const double gray = (rgb[0] + rgb[1] + rgb[2]) / 3.0;
  switch (*rec.attack_type) {
    case AttackType::Print:
    case AttackType::Papermask:
      for (double& c : rgb) c += 0.35 * k * (gray - c);
      break;
    case AttackType::Replay: {
      const double scan = 1.0 + 0.1 * k * std::sin(3.0 * (v * 100.0));
      rgb = {rgb[0] * scan * (1.0 - 0.1 * k), rgb[1] * scan, rgb[2] * scan * (1.0 + 0.15 * k)};
      break;
    }
    case AttackType::Rigidmask:
      rgb = {rgb[0] * (1.0 + 0.05 * k), rgb[1] * (1.0 + 0.1 * k), rgb[2] * (1.0 - 0.1 * k)};
      break;
    case AttackType::Flexiblemask:
      rgb = {rgb[0] * (1.0 + 0.1 * k), rgb[1] * (1.0 - 0.05 * k), rgb[2] * (1.0 - 0.05 * k)};
      break;
    case AttackType::Mannequin:
      for (double& c : rgb) c += 0.3 * k * (200.0 - c);
      break;
    case AttackType::Glasses:
      for (double& c : rgb) c *= 1.0 - 0.6 * k * region;
      break;
    case AttackType::Makeup:
      rgb = {rgb[0] * (1.0 - 0.2 * k * region), rgb[1] * (1.0 - 0.45 * k * region),
             rgb[2] * (1.0 + 0.25 * k * region)};
      break;
    case AttackType::Tattoo:
      for (double& c : rgb) c *= 1.0 - 0.55 * k * region;
      break;
  }
  (void)u;
  return rgb;
}

cv::Mat to_u16(const cv::Mat& f) {
  cv::Mat out(f.size(), CV_16UC1);
  for (int y = 0; y < f.rows; ++y) {
    const double* s = f.ptr<double>(y);
    auto* d = out.ptr<std::uint16_t>(y);
    for (int x = 0; x < f.cols; ++x) {
      d[x] = static_cast<std::uint16_t>(std::clamp(std::floor(s[x] + 0.5), 0.0, 65535.0));
    }
  }
  return out;
}

preprocess::RawFrame render_frame(const SynthConfig& cfg, const SampleRecord& rec,
                                  const Subject& subj, Rng& rng) {
  const int w = cfg.width;
  const int h = cfg.height;
  const SignatureStrengths& st = cfg.strengths;
  const Material mat = material_for(rec);

  const double cx = 0.5 * w + rng.uniform(-0.03, 0.03) * w;
  const double cy = 0.52 * h + rng.uniform(-0.03, 0.03) * h;
  const double scale = rng.uniform(0.92, 1.08);
  const double roll = rng.uniform(-10.0, 10.0) * M_PI / 180.0;
  const double a = 0.27 * w * scale * subj.width_scale;
  const double b = 0.35 * h * scale * subj.height_scale;
  const double cr = std::cos(roll);
  const double sr = std::sin(roll);

  auto to_image = [&](double u, double v) {
    const double lx = u * a;
    const double ly = v * b;
    return preprocess::Point2{cx + cr * lx - sr * ly, cy + sr * lx + cr * ly};
  };

  preprocess::RawFrame frame;
  frame.landmarks.left_eye = to_image(-0.45, -0.25);
  frame.landmarks.right_eye = to_image(0.45, -0.25);
  frame.landmarks.nose = to_image(0.0, 0.1);
  frame.landmarks.mouth_left = to_image(-0.3, 0.45);
  frame.landmarks.mouth_right = to_image(0.3, 0.45);

  std::vector<cv::Mat> bands(kBands);
  for (cv::Mat& m : bands) m.create(h, w, CV_64FC1);
  cv::Mat r(h, w, CV_64FC1), g(h, w, CV_64FC1), bl(h, w, CV_64FC1);
  cv::Mat depth(h, w, CV_64FC1), thermal(h, w, CV_64FC1);

  const double relief_gain = 1.0 - st.depth_flatness * mat.flat;
  const double cold = st.thermal_contrast * mat.coldness;
  const auto& tx = subj.texture;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      const double u = (cr * dx + sr * dy) / a;
      const double v = (-sr * dx + cr * dy) / b;
      const double rho2 = u * u + v * v;
      const bool face = rho2 < 1.0;

      double z = kBackgroundMm - 0.05 * (y - 0.5 * h);
      double heat = kAmbient;
      double shading = 0.5;
      double albedo = 1.0;
      std::array<double, kBands> refl{};
      std::array<double, 3> rgb{90.0, 92.0, 96.0};

      if (face) {
        const double bulge = std::sqrt(1.0 - rho2);
        const double nose = std::exp(-(u * u + (v - 0.1) * (v - 0.1)) / 0.02);
        const double relief = kReliefMm * bulge + 20.0 * nose;
        z = kFaceDistanceMm - relief_gain * relief;
        const double normal_z = relief_gain * bulge + (1.0 - relief_gain);
        shading = 0.55 + 0.45 * normal_z;
        albedo = 1.0 + 0.05 * std::sin(12.0 * u * (1.0 + tx[0]) + 6.28 * tx[1]) *
                           std::sin(10.0 * v * (1.0 + tx[2]) + 6.28 * tx[3]) +
                 0.03 * std::sin(25.0 * (u * tx[4] + v * tx[5]) + 6.28 * tx[6]);

        const double profile = 1.0 - 0.3 * rho2;
        heat = kAmbient + kBodyHeat * profile * (1.0 - cold);

        double region = 0.0;
        double skin = mat.skin;
        if (rec.attack_type) {
          region = partial_mask(*rec.attack_type, u, v) * st.partial_region;
          if (*rec.attack_type == AttackType::Makeup) region *= 0.8;
          if (*rec.attack_type == AttackType::Glasses) {
            heat -= kBodyHeat * profile * 0.8 * region * st.thermal_contrast;
          }
          skin *= 1.0 - region;
        }
        for (int k = 0; k < kBands; ++k) {
          const double flat_spectrum = kBaseReflectance[k];
          const double skin_spectrum =
              kBaseReflectance[k] * (1.0 - st.swir_absorption * kWaterAbsorption[k]);
          refl[k] = skin * skin_spectrum + (1.0 - skin) * flat_spectrum;
        }
        // Printed and replayed faces carry the face's own shading in the visible range.
        const double visible_shading = 0.55 + 0.45 * bulge;
        for (int c = 0; c < 3; ++c) rgb[c] = subj.tone[c] * visible_shading * albedo;
        rgb = rgb_cue(rec, rgb, region, u, v, st.rgb_cue);
      } else {
        for (int k = 0; k < kBands; ++k) refl[k] = 0.3 * kBaseReflectance[k];
      }

      for (int k = 0; k < kBands; ++k) {
        const double s = kSpectralLevel * shading * albedo * refl[k];
        bands[k].at<double>(y, x) = s * (1.0 + cfg.noise * rng.normal());
      }
      r.at<double>(y, x) = rgb[0] + 255.0 * cfg.noise * rng.normal();
      g.at<double>(y, x) = rgb[1] + 255.0 * cfg.noise * rng.normal();
      bl.at<double>(y, x) = rgb[2] + 255.0 * cfg.noise * rng.normal();
      depth.at<double>(y, x) = z + 0.5 * rng.normal();
      thermal.at<double>(y, x) = heat + 50.0 * rng.normal();
    }
  }

  auto clamp8 = [](const cv::Mat& m) { return cv::min(cv::max(m, 0.0), 255.0); };
  frame.planes["R"] = to_u16(clamp8(r));
  frame.planes["G"] = to_u16(clamp8(g));
  frame.planes["B"] = to_u16(clamp8(bl));
  frame.planes["D"] = to_u16(depth);
  frame.planes["T"] = to_u16(thermal);
  int k = 0;
  for (int idx = 5; idx < preprocess::kNumChannels; ++idx, ++k) {
    frame.planes[std::string(preprocess::channel(idx).name)] = to_u16(bands[k]);
  }
  return frame;
}

}  // namespace

SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.counts["bonafide"] = 30;
  for (AttackType t : kAllAttackTypes) cfg.counts[std::string(attack_type_name(t))] = 10;
  return cfg;
}

geometry::CameraRig synth_rig(int width, int height) {
  geometry::CameraRig rig;
  rig.reference_id = "nir_left";
  rig.baseline_m = 0.1;
  geometry::Camera cam;
  cam.intrinsics.fx = cam.intrinsics.fy = 1.2 * width;
  cam.intrinsics.cx = 0.5 * width;
  cam.intrinsics.cy = 0.5 * height;
  cam.intrinsics.width = width;
  cam.intrinsics.height = height;
  for (const char* id : {"rgb", "thermal", "nir_left", "swir"}) rig.cameras[id] = cam;
  cam.extrinsics.translation = geometry::Vec3(-rig.baseline_m, 0.0, 0.0);
  rig.cameras["nir_right"] = cam;
  return rig;
}

SynthDataset synth_generate(const SynthConfig& cfg, const std::string& out_dir) {
  if (cfg.subjects < 4) throw Error("synthetic data needs at least 4 subjects");
  if (cfg.width < 64 || cfg.height < 64) throw Error("synthetic frames must be >= 64 px");
  if (cfg.frames < 1) throw Error("synthetic videos need at least one frame");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  SynthDataset ds;
  ds.rig = synth_rig(cfg.width, cfg.height);
  std::vector<Subject> subjects;
  for (int s = 0; s < cfg.subjects; ++s) {
    char id[16];
    std::snprintf(id, sizeof(id), "subj%03d", s);
    const Fold f = s < cfg.subjects / 2 ? Fold::Train
                   : s < (3 * cfg.subjects) / 4 ? Fold::Dev
                                                : Fold::Test;
    ds.folds[id] = f;
    subjects.push_back(make_subject(cfg.seed, s));
  }

  // Classes in a fixed order; "bonafide" first.
  std::vector<std::string> classes{"bonafide"};
  for (AttackType t : kAllAttackTypes) classes.emplace_back(attack_type_name(t));
  for (const auto& [name, n] : cfg.counts) {
    if (n < 0) throw Error("negative count for " + name);
    if (name != "bonafide" && !parse_attack_type(name)) throw Error("unknown class " + name);
  }

  int offset = 0;
  for (const std::string& cls : classes) {
    auto it = cfg.counts.find(cls);
    const int n = it == cfg.counts.end() ? 0 : it->second;
    for (int k = 0; k < n; ++k) {
      const int s = (k + offset) % cfg.subjects;
      SampleRecord rec;
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%03d", cls.c_str(), k);
      rec.sample_id = id;
      std::snprintf(id, sizeof(id), "subj%03d", s);
      rec.subject_id = id;
      rec.session_id = "session" + std::to_string(k % 2);
      if (cls != "bonafide") {
        rec.label = Label::Attack;
        rec.attack_type = parse_attack_type(cls);
        if (rec.attack_type == AttackType::Makeup) rec.makeup_level = 1 + k % 2;
      }
      rec.frames = cfg.frames;
      Rng rng(mix(cfg.seed, static_cast<std::uint64_t>(ds.records.size()) + 1));
      for (int f = 0; f < cfg.frames; ++f) {
        const preprocess::RawFrame frame =
            render_frame(cfg, rec, subjects[static_cast<std::size_t>(s)], rng);
        write_raw_frame(out_dir, rec.sample_id, f, frame);
        rec.landmarks.push_back(frame.landmarks);
      }
      ds.records.push_back(std::move(rec));
    }
    offset += 5;
  }

  const std::filesystem::path root(out_dir);
  save_manifest((root / "manifest.json").string(), ds.records);
  save_folds((root / "folds.json").string(), ds.folds);
  geometry::save_rig((root / "calibration.json").string(), ds.rig);
  return ds;
}

}  // namespace mcpad::dataset
