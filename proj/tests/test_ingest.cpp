#include <doctest.h>

#include <cmath>
#include <functional>

#include "rppg/ingest.hpp"
#include "test_util.hpp"

using namespace rppg;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Usage;
}

std::string landmark_line(int frame, int points) {
  std::string s = "{\"frame\":" + std::to_string(frame) + ",\"points\":[";
  for (int i = 0; i < points; ++i) s += (i ? "," : "") + std::string("[1.5,2.5]");
  return s + "]}\n";
}

PpgTrace ramp(std::size_t n, double fs) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  return PpgTrace(v, fs);
}

}  // namespace

TEST_CASE("png round trip and frame loading") {
  const auto dir = testing::temp_dir("ingest_png");
  SplitMix64 rng(1);
  const Clip clip = testing::random_clip(rng, 5, 64, 64);
  write_frames(dir / "vid" / "frames", clip);
  const Clip back = load_frames(dir / "vid" / "frames", 30.0);
  CHECK(back.frames == clip.frames);
  CHECK(back.fps == 30.0);
  CHECK(back.source_id == "vid");
  CHECK(fs::exists(dir / "vid" / "frames" / "000004.png"));
}

TEST_CASE("frames load in filename order") {
  const auto dir = testing::temp_dir("ingest_order");
  for (int v : {3, 1, 2}) {
    write_png(dir / ("f" + std::to_string(v) + ".png"),
              testing::constant_clip(1, 4, 4, static_cast<std::uint8_t>(v), 0, 0).frames[0]);
  }
  const Clip c = load_frames(dir, 25.0);
  REQUIRE(c.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(c.frames[i].at(0, 0, 0) == i + 1);
}

TEST_CASE("frame loading errors") {
  const auto dir = testing::temp_dir("ingest_errors");
  CHECK(code_of([&] { load_frames(dir / "nope", 30); }) == ErrorCode::MissingDir);
  fs::create_directories(dir / "empty");
  CHECK(code_of([&] { load_frames(dir / "empty", 30); }) == ErrorCode::EmptyClip);

  SplitMix64 rng(2);
  write_frames(dir / "bad", testing::random_clip(rng, 3, 8, 8));
  testing::write_file(dir / "bad" / "000001.png", "not a png");
  try {
    load_frames(dir / "bad", 30);
    FAIL("expected decode failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DecodeFailure);
    CHECK(std::string(e.what()).find("000001.png") != std::string::npos);
  }

  write_frames(dir / "mixed", testing::random_clip(rng, 2, 8, 8));
  write_png(dir / "mixed" / "000002.png", testing::random_frame(rng, 8, 9));
  CHECK(code_of([&] { load_frames(dir / "mixed", 30); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("landmark files") {
  const auto dir = testing::temp_dir("ingest_landmarks");
  std::string text;
  for (int i = 127; i >= 0; --i) text += landmark_line(i, 68);
  testing::write_file(dir / "ok.jsonl", text);
  const auto lm = load_landmarks(dir / "ok.jsonl", 128);
  REQUIRE(lm.size() == 128);
  for (int i = 0; i < 128; ++i) CHECK(lm[i].frame_index() == i);
  CHECK(lm[5][67] == Point2{1.5, 2.5});

  CHECK(code_of([&] { load_landmarks(dir / "ok.jsonl", 129); }) == ErrorCode::FrameCountMismatch);

  testing::write_file(dir / "short.jsonl", landmark_line(0, 68) + landmark_line(1, 67));
  CHECK(code_of([&] { load_landmarks(dir / "short.jsonl"); }) == ErrorCode::WrongPointCount);

  testing::write_file(dir / "gap.jsonl", landmark_line(0, 68) + landmark_line(2, 68));
  CHECK(code_of([&] { load_landmarks(dir / "gap.jsonl"); }) == ErrorCode::FrameCountMismatch);

  testing::write_file(dir / "junk.jsonl", "{oops\n");
  CHECK(code_of([&] { load_landmarks(dir / "junk.jsonl"); }) == ErrorCode::DecodeFailure);

  write_landmarks(dir / "rt.jsonl", lm);
  CHECK(load_landmarks(dir / "rt.jsonl").size() == 128);
}

TEST_CASE("ppg csv round trip") {
  const auto dir = testing::temp_dir("ingest_ppg");
  const PpgTrace t({0.25, -1.5, 3.125, 1e-7}, 60.0, 0.5);
  write_ppg_csv(dir / "ppg.csv", t);
  const PpgTrace back = load_ppg_csv(dir / "ppg.csv");
  CHECK(back.values() == t.values());
  CHECK(back.fs() == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(back.t0() == 0.5);

  testing::write_file(dir / "bad.csv", "time,value\n0,1\n");
  CHECK(code_of([&] { load_ppg_csv(dir / "bad.csv"); }) == ErrorCode::DecodeFailure);
}

TEST_CASE("align_ppg") {
  const auto a = align_ppg(ramp(600, 60.0), 30.0, 3);
  CHECK(a.values() == std::vector<double>{0, 2, 4});
  CHECK(a.fs() == 30.0);

  const PpgTrace same({5, 6, 7, 8, 9}, 30.0);
  CHECK(align_ppg(same, 30.0, 3).values() == std::vector<double>{5, 6, 7});

  // integer rate ratio picks every (fs/fps)-th sample exactly
  const auto every4 = align_ppg(ramp(1000, 120.0), 30.0, 200);
  for (std::size_t i = 0; i < 200; ++i) CHECK(every4.values()[i] == 4.0 * i);

  // halfway interpolation
  const auto up = align_ppg(ramp(31, 30.0), 60.0, 5);
  CHECK(up.values() == std::vector<double>{0, 0.5, 1, 1.5, 2});

  // 4.0 s of PPG, 4.5 s of video
  CHECK(code_of([&] { align_ppg(ramp(241, 60.0), 30.0, 136); }) == ErrorCode::InsufficientCoverage);
  CHECK_NOTHROW(align_ppg(ramp(241, 60.0), 30.0, 121));
}

TEST_CASE("window defaults") {
  CHECK(kWindowFrames == 128);
  CHECK(kWindowStride == 8);
}

TEST_CASE("window examples") {
  auto make = [](std::size_t t) {
    Clip c = testing::constant_clip(t, 2, 2, 1, 1, 1);
    return std::pair{c, ramp(t, 30.0)};
  };
  {
    auto [c, g] = make(128);
    CHECK(window_clips(c, g).size() == 1);
  }
  {
    auto [c, g] = make(136);
    const auto w = window_clips(c, g);
    REQUIRE(w.size() == 2);
    CHECK(w[0].start == 0);
    CHECK(w[1].start == 8);
    CHECK(w[1].gt.values().front() == 8.0);
  }
  {
    auto [c, g] = make(127);
    CHECK(code_of([&] { window_clips(c, g); }) == ErrorCode::ClipTooShort);
  }
  {
    auto [c, g] = make(130);
    CHECK(code_of([&] { window_clips(c, ramp(129, 30.0)); }) == ErrorCode::LengthMismatch);
  }
}

TEST_CASE("window count property over random lengths and strides") {
  SplitMix64 rng(128);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t window = 128;
    const std::size_t t = testing::uniform(rng, window, 600);
    const std::size_t stride = testing::uniform(rng, 1, 80);
    std::size_t expected = 0;
    for (std::size_t s = 0; s + window <= t; s += stride) ++expected;
    CHECK(window_count(t, window, stride) == expected);
    CHECK(window_count(t, window, stride) == (t - window) / stride + 1);
  }
  // materialized windows cover frames s..s+T-1 with overlap T - stride
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t t = testing::uniform(rng, 128, 260);
    const std::size_t stride = testing::uniform(rng, 1, 40);
    Clip c;
    c.fps = 30;
    for (std::size_t i = 0; i < t; ++i) {
      c.frames.push_back(Frame(1, 1, std::vector<std::uint8_t>{static_cast<std::uint8_t>(i % 256), 0, 0}));
    }
    const auto w = window_clips(c, ramp(t, 30.0), 128, stride);
    REQUIRE(w.size() == (t - 128) / stride + 1);
    for (std::size_t k = 0; k < w.size(); ++k) {
      CHECK(w[k].start == k * stride);
      CHECK(w[k].clip.size() == 128);
      CHECK(w[k].clip.frames.front().at(0, 0, 0) == (k * stride) % 256);
      CHECK(w[k].gt.values().back() == static_cast<double>(k * stride + 127));
    }
    CHECK(w.back().start + 128 <= t);
    CHECK(w.back().start + stride + 128 > t);
  }
}

TEST_CASE("dataset discovery") {
  const auto root = testing::temp_dir("ingest_discover");
  SplitMix64 rng(3);
  for (const char* id : {"b", "a"}) {
    write_frames(root / id / "frames", testing::random_clip(rng, 2, 4, 4));
    write_manifest(root / id, 25.0);
  }
  fs::create_directories(root / "not_a_video");
  const auto v = discover_videos(root);
  REQUIRE(v.size() == 2);
  CHECK(v[0].video_id == "a");
  CHECK(v[1].video_id == "b");
  CHECK(v[0].fps == 25.0);
  CHECK_FALSE(v[0].ppg.has_value());

  const auto single = discover_videos(root / "a");
  REQUIRE(single.size() == 1);
  CHECK(single[0].video_id == "a");

  write_frames(root / "c" / "frames", testing::random_clip(rng, 2, 4, 4));
  CHECK(code_of([&] { discover_videos(root); }) == ErrorCode::Usage);
  CHECK(discover_videos(root, 30.0).size() == 3);
}
