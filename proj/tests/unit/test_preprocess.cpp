#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "../support/scratch.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/dataset/frames.hpp"
#include "mcpad/dataset/synth.hpp"
#include "mcpad/preprocess/align.hpp"
#include "mcpad/preprocess/channels.hpp"
#include "mcpad/preprocess/cube.hpp"
#include "mcpad/preprocess/normalize.hpp"
#include "mcpad/preprocess/pipeline.hpp"

using namespace mcpad;
using namespace mcpad::preprocess;
namespace fs = std::filesystem;

namespace {

cv::Mat random_u16(int w, int h, std::mt19937& gen, int lo = 0, int hi = 4000) {
  std::uniform_int_distribution<int> d(lo, hi);
  cv::Mat m(h, w, CV_16UC1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(d(gen));
  }
  return m;
}

double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Straight transcription of the normalization formula with a sort-based median.
cv::Mat mad_oracle(const cv::Mat& raw) {
  std::vector<double> v;
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) v.push_back(raw.at<std::uint16_t>(y, x));
  }
  const double med = sorted_median(v);
  std::vector<double> dev;
  for (double a : v) dev.push_back(std::abs(a - med));
  const double mad = sorted_median(dev);
  cv::Mat out(raw.size(), CV_8UC1);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) {
      if (mad == 0) {
        out.at<std::uint8_t>(y, x) = 128;
        continue;
      }
      const double z = (raw.at<std::uint16_t>(y, x) - med) / mad;
      const double s = 127.5 + 127.5 * z / (4.0 * 1.4826);
      out.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(std::clamp(std::floor(s + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace

TEST(MadNormalize, ConstantImageIsMidGray) {
  const cv::Mat c(16, 16, CV_16UC1, cv::Scalar(1234));
  const cv::Mat out = mad_normalize(c);
  EXPECT_EQ(out.type(), CV_8UC1);
  EXPECT_EQ(cv::countNonZero(out != 128), 0);
}

TEST(MadNormalize, MedianMapsTo128) {
  // Values 0..100: median 50, MAD 25.
  cv::Mat m(1, 101, CV_16UC1);
  for (int i = 0; i <= 100; ++i) m.at<std::uint16_t>(0, i) = static_cast<std::uint16_t>(i);
  const cv::Mat out = mad_normalize(m);
  EXPECT_EQ(out.at<std::uint8_t>(0, 50), 128);
  const double sigma = 1.4826 * 25.0;
  const double top = 127.5 + 127.5 * 50.0 / (4.0 * sigma);
  EXPECT_EQ(out.at<std::uint8_t>(0, 100), static_cast<int>(std::min(255.0, std::floor(top + 0.5))));
}

TEST(MadNormalize, MatchesSortOracle) {
  std::mt19937 gen(21);
  for (int t = 0; t < 20; ++t) {
    const cv::Mat img = random_u16(17 + t, 9 + t, gen);
    EXPECT_EQ(cv::norm(mad_normalize(img), mad_oracle(img), cv::NORM_INF), 0.0);
  }
}

TEST(MadNormalize, PlusFourSigmaSaturates) {
  // Half of the pixels at 1000, the rest spread so the MAD is known; a pixel at
  // median + 4 sigma must reach 255.
  std::vector<std::uint16_t> vals;
  for (int i = 0; i < 50; ++i) vals.push_back(1000);
  for (int i = 0; i < 25; ++i) vals.push_back(1100);
  for (int i = 0; i < 24; ++i) vals.push_back(900);
  const double sigma = 1.4826 * 100.0;  // median 1000, MAD 100
  vals.push_back(static_cast<std::uint16_t>(std::ceil(1000 + 4 * sigma)));
  cv::Mat m(1, static_cast<int>(vals.size()), CV_16UC1);
  for (std::size_t i = 0; i < vals.size(); ++i) m.at<std::uint16_t>(0, static_cast<int>(i)) = vals[i];
  const cv::Mat out = mad_normalize(m);
  EXPECT_EQ(out.at<std::uint8_t>(0, 0), 128);
  EXPECT_EQ(out.at<std::uint8_t>(0, m.cols - 1), 255);
}

TEST(MadNormalize, AffineInvariantBitExact) {
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> a_dist(1, 12), b_dist(0, 5000);
  for (int t = 0; t < 100; ++t) {
    const cv::Mat img = random_u16(24, 20, gen, 0, 4000);
    const int a = a_dist(gen), b = b_dist(gen);
    cv::Mat moved(img.size(), CV_16UC1);
    for (int y = 0; y < img.rows; ++y) {
      for (int x = 0; x < img.cols; ++x) {
        moved.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(a * img.at<std::uint16_t>(y, x) + b);
      }
    }
    ASSERT_EQ(cv::norm(mad_normalize(img), mad_normalize(moved), cv::NORM_INF), 0.0) << t;
  }
}

TEST(SpectralNormalize, HandCases) {
  std::vector<cv::Mat> nir;
  for (float v : {3.0f, 4.0f, 0.0f, 0.0f}) nir.emplace_back(1, 2, CV_32FC1, cv::Scalar(v));
  nir[0].at<float>(0, 1) = nir[1].at<float>(0, 1) = 0.0f;
  const auto n = unit_spectral_normalize(nir);
  EXPECT_FLOAT_EQ(n.planes[0].at<float>(0, 0), 0.6f);
  EXPECT_FLOAT_EQ(n.planes[1].at<float>(0, 0), 0.8f);
  EXPECT_EQ(n.planes[2].at<float>(0, 0), 0.0f);
  EXPECT_EQ(n.zero_count, 1);
  EXPECT_EQ(n.zero_mask.at<std::uint8_t>(0, 1), 1);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(n.planes[k].at<float>(0, 1), 0.0f);

  std::vector<cv::Mat> swir(7, cv::Mat(1, 1, CV_32FC1, cv::Scalar(1.0f)));
  const auto s = unit_spectral_normalize(swir);
  for (const auto& p : s.planes) EXPECT_NEAR(p.at<float>(0, 0), 1.0 / std::sqrt(7.0), 1e-7);
}

TEST(SpectralNormalize, RandomNormsWithinTolerance) {
  std::mt19937 gen(9);
  std::vector<cv::Mat> planes;
  for (int k = 0; k < 7; ++k) {
    cv::Mat p = random_u16(64, 48, gen, 0, 65535);
    cv::Mat f;
    p.convertTo(f, CV_32F);
    planes.push_back(f);
  }
  for (int k = 0; k < 7; ++k) planes[k].at<float>(3, 3) = 0.0f;
  const auto out = unit_spectral_normalize(planes);
  EXPECT_EQ(out.zero_count, 1);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (out.zero_mask.at<std::uint8_t>(y, x)) continue;
      double sq = 0;
      for (const auto& p : out.planes) sq += static_cast<double>(p.at<float>(y, x)) * p.at<float>(y, x);
      ASSERT_NEAR(std::sqrt(sq), 1.0, 1e-6);
    }
  }
}

TEST(SpectralNormalize, WrongChannelCountThrows) {
  std::vector<cv::Mat> three(3, cv::Mat(2, 2, CV_32FC1, cv::Scalar(1)));
  EXPECT_THROW(unit_spectral_normalize(three), Error);
}

TEST(Channels, RegistryLayout) {
  const auto reg = channel_registry();
  ASSERT_EQ(reg.size(), 16u);
  EXPECT_EQ(channel_index("T"), 4);
  EXPECT_EQ(channel_index("SWIR_1450nm"), 13);
  EXPECT_EQ(channel_index("bogus"), -1);
  EXPECT_EQ(modality_channels(Modality::SWIR), (std::vector<int>{9, 10, 11, 12, 13, 14, 15}));
  EXPECT_EQ(modality_channels(Modality::NIR), (std::vector<int>{5, 6, 7, 8}));
}

TEST(Channels, ComboParsing) {
  EXPECT_EQ(parse_combo("RGB").indices, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(parse_combo("RGB-SWIR").indices,
            (std::vector<int>{0, 1, 2, 9, 10, 11, 12, 13, 14, 15}));
  EXPECT_EQ(parse_combo("RGB-SWIR_1450nm").indices, (std::vector<int>{0, 1, 2, 13}));
  EXPECT_EQ(parse_combo("SWIR-RGB").indices, parse_combo("RGB-SWIR").indices);
  EXPECT_EQ(parse_combo("D-NIR").size(), 5);
  EXPECT_THROW(parse_combo("RGB-UV"), ParseError);
  EXPECT_THROW(parse_combo("SWIR_1451nm"), ParseError);
  EXPECT_THROW(parse_combo(""), ParseError);
}

namespace {

std::map<std::string, cv::Mat> constant_planes() {
  std::map<std::string, cv::Mat> planes;
  for (const auto& d : channel_registry()) {
    planes[std::string(d.name)] = cv::Mat(kCropSize, kCropSize, CV_32FC1, cv::Scalar(d.index / 16.0));
  }
  return planes;
}

}  // namespace

TEST(Stacking, RegistryOrder) {
  const ChannelCube cube = stack_channels(constant_planes());
  ASSERT_EQ(cube.depth(), 16);
  for (int c = 0; c < 16; ++c) {
    EXPECT_EQ(cube.channels[c], c);
    EXPECT_FLOAT_EQ(cube.at(100, 7, c), c / 16.0f);
  }
  for (int c = 9; c < 16; ++c) EXPECT_EQ(channel(cube.channels[c]).modality, Modality::SWIR);
}

TEST(Stacking, MissingThermalNamed) {
  auto planes = constant_planes();
  planes.erase("T");
  try {
    stack_channels(planes);
    FAIL();
  } catch (const StackingError& e) {
    EXPECT_NE(std::string(e.what()).find("missing channel T "), std::string::npos) << e.what();
  }
}

TEST(Selection, SubCubesOrderedAndIdempotent) {
  const ChannelCube cube = stack_channels(constant_planes());
  const ChannelCube sub = select_channels(cube, "RGB-SWIR");
  ASSERT_EQ(sub.depth(), 10);
  EXPECT_FLOAT_EQ(sub.at(0, 0, 3), 9 / 16.0f);
  const ChannelCube again = select_channels(sub, "RGB-SWIR");
  EXPECT_EQ(again.channels, sub.channels);
  EXPECT_EQ(again.data, sub.data);
  const ChannelCube one = select_channels(cube, "RGB-SWIR_1450nm");
  EXPECT_EQ(one.channels, (std::vector<int>{0, 1, 2, 13}));
  EXPECT_FLOAT_EQ(one.at(5, 5, 3), 13 / 16.0f);
  EXPECT_THROW(select_channels(sub, "T"), Error);
}

TEST(CubeFile, RoundTrip) {
  ChannelCube cube = stack_channels(constant_planes());
  cube.at(1, 2, 3) = 0.123f;
  cube.provenance = {"s001", 4, 0.25, "abc"};
  cube.zero_pixels["SWIR"] = {5, 9};
  const std::string path = scratch::path("mcpad_cube.mccb").string();
  write_cube(path, cube);
  EXPECT_EQ(fs::file_size(path), 16u + 16u * kCropSize * kCropSize * 4u);
  const ChannelCube back = read_cube(path);
  EXPECT_EQ(back.data, cube.data);
  EXPECT_EQ(back.channels, cube.channels);
  EXPECT_EQ(back.provenance.sample_id, "s001");
  EXPECT_EQ(back.provenance.frame_index, 4);
  EXPECT_EQ(back.provenance.rig_hash, "abc");
  EXPECT_EQ(back.zero_pixels.at("SWIR"), (std::vector<int>{5, 9}));
  fs::remove(path);
  fs::remove(path + ".json");
}

TEST(Alignment, IdentityWhenEyesOnTarget) {
  std::mt19937 gen(2);
  cv::Mat img;
  random_u16(kCropSize, kCropSize, gen).convertTo(img, CV_32F);
  FaceLandmarks lm{{63, 87}, {160, 87}, {}, {}, {}};
  const cv::Mat out = align_face(img, lm);
  ASSERT_EQ(out.size(), cv::Size(kCropSize, kCropSize));
  EXPECT_LE(cv::norm(out, img, cv::NORM_INF), 1e-6);
}

TEST(Alignment, RotatedFaceLandsOnTargets) {
  // Render two bright dots as eyes, rotate the pair by 30 degrees about a centre
  // and check the aligned crop puts the dots back on the targets.
  const double ang = 30.0 * M_PI / 180.0, cx = 200, cy = 180, half = 60;
  const Point2 le{cx - half * std::cos(ang), cy - half * std::sin(ang)};
  const Point2 re{cx + half * std::cos(ang), cy + half * std::sin(ang)};
  cv::Mat img(400, 400, CV_32FC1, cv::Scalar(0));
  auto splat = [&](Point2 p) {
    for (int y = 0; y < 400; ++y) {
      for (int x = 0; x < 400; ++x) {
        const double d2 = (x - p.x) * (x - p.x) + (y - p.y) * (y - p.y);
        img.at<float>(y, x) += static_cast<float>(std::exp(-d2 / 18.0));
      }
    }
  };
  splat(le);
  splat(re);
  const cv::Mat out = align_face(img, {le, re, {}, {}, {}});
  auto centroid = [&](int x0, int x1) {
    double sx = 0, sy = 0, sw = 0;
    for (int y = 0; y < out.rows; ++y) {
      for (int x = x0; x < x1; ++x) {
        const double w = out.at<float>(y, x);
        sx += w * x;
        sy += w * y;
        sw += w;
      }
    }
    return Point2{sx / sw, sy / sw};
  };
  const Point2 l = centroid(0, 112), r = centroid(112, 224);
  EXPECT_NEAR(l.x, 63, 0.5);
  EXPECT_NEAR(l.y, 87, 0.5);
  EXPECT_NEAR(r.x, 160, 0.5);
  EXPECT_NEAR(r.y, 87, 0.5);

  // The transform maps target eyes exactly onto the input landmarks.
  const auto t = alignment_transform({le, re, {}, {}, {}});
  const Point2 a = t.apply({63, 87}), b = t.apply({160, 87});
  EXPECT_NEAR(a.x, le.x, 1e-9);
  EXPECT_NEAR(b.y, re.y, 1e-9);
  const Point2 back = t.inverse().apply(a);
  EXPECT_NEAR(back.x, 63, 1e-9);
}

TEST(Alignment, DegenerateLandmarksRejected) {
  const cv::Mat img(100, 100, CV_32FC1, cv::Scalar(0));
  EXPECT_THROW(align_face(img, {{50, 50}, {50, 50}, {}, {}, {}}), AlignmentError);
  EXPECT_THROW(validate_landmarks({{60, 50}, {40, 50}, {}, {}, {}}, img.size()), AlignmentError);
  EXPECT_THROW(validate_landmarks({{10, 50}, {140, 50}, {}, {}, {}}, img.size()), AlignmentError);
}

TEST(Resolution, ScaledSizes) {
  const cv::Mat frame(1200, 1920, CV_16UC1, cv::Scalar(7));
  const cv::Mat half = emulate_resolution(frame, 0.5);
  EXPECT_EQ(half.cols, 960);
  EXPECT_EQ(half.rows, 600);
  EXPECT_EQ(cv::norm(emulate_resolution(frame, 1.0), frame, cv::NORM_INF), 0.0);
  EXPECT_THROW(emulate_resolution(frame, 0.0), Error);
  EXPECT_THROW(emulate_resolution(frame, 1.5), Error);
  EXPECT_THROW(emulate_resolution(cv::Mat(100, 100, CV_16UC1), 0.05), Error);
}

TEST(Resolution, LandmarkRescaleFollowsPixelCentres) {
  const FaceLandmarks lm{{99.5, 49.5}, {199.5, 49.5}, {}, {}, {}};
  const auto r = rescale_landmarks(lm, {400, 200}, {200, 100});
  EXPECT_DOUBLE_EQ(r.left_eye.x, 49.5);
  EXPECT_DOUBLE_EQ(r.left_eye.y, 24.5);
}

class PipelineTest : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    root_ = scratch::path("mcpad_pipeline_ds").string();
    fs::remove_all(root_);
    dataset::SynthConfig cfg = dataset::default_synth_config();
    cfg.counts = {{"bonafide", 1}, {"Print", 1}};
    cfg.subjects = 4;
    cfg.frames = 1;
    ds_ = new dataset::SynthDataset(dataset::synth_generate(cfg, root_));
  }
  static void TearDownTestSuite() {
    delete ds_;
    fs::remove_all(root_);
  }
  static std::string root_;
  static dataset::SynthDataset* ds_;
};
std::string PipelineTest::root_;
dataset::SynthDataset* PipelineTest::ds_ = nullptr;

TEST_F(PipelineTest, DeterministicAndUnitScaleIsDefault) {
  const auto raw = dataset::read_raw_frame(root_, ds_->records[0], 0);
  const ChannelCube a = preprocess_frame(raw, ds_->rig);
  const ChannelCube b = preprocess_frame(raw, ds_->rig, {1.0, {}});
  EXPECT_EQ(a.data, b.data);
  ASSERT_EQ(a.depth(), 16);
  for (float v : a.data) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f + 1e-6f);
  }
  const ChannelCube low = preprocess_frame(raw, ds_->rig, {0.25, {}});
  EXPECT_EQ(low.width, kCropSize);
  EXPECT_NE(low.data, a.data);
}

TEST_F(PipelineTest, SpectraAreUnitOrFlagged) {
  const auto raw = dataset::read_raw_frame(root_, ds_->records[1], 0);
  const ChannelCube cube = preprocess_frame(raw, ds_->rig);
  for (auto group : {Modality::NIR, Modality::SWIR}) {
    const auto idx = modality_channels(group);
    for (int y = 0; y < cube.height; ++y) {
      for (int x = 0; x < cube.width; ++x) {
        double sq = 0;
        for (int c : idx) sq += static_cast<double>(cube.at(y, x, c)) * cube.at(y, x, c);
        if (sq == 0.0) continue;
        ASSERT_NEAR(std::sqrt(sq), 1.0, 1e-6);
      }
    }
  }
}

TEST_F(PipelineTest, ColocatedSensorsPassThrough) {
  const auto raw = dataset::read_raw_frame(root_, ds_->records[0], 0);
  const auto reg = register_frame(raw, ds_->rig);
  cv::Mat expected;
  raw.planes.at("SWIR_1450nm").convertTo(expected, CV_32F);
  EXPECT_EQ(cv::norm(reg.at("SWIR_1450nm"), expected, cv::NORM_INF), 0.0);
  EXPECT_EQ(sensor_for_channel("NIR_850nm"), ds_->rig.reference_id);
}
