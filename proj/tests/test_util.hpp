#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rppg/core.hpp"
#include "rppg/rng.hpp"

namespace rppg::testing {

inline Frame random_frame(SplitMix64& rng, int h, int w) {
  std::vector<std::uint8_t> d(static_cast<std::size_t>(h) * w * kChannels);
  for (auto& v : d) v = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
  return Frame(h, w, std::move(d));
}

inline Clip random_clip(SplitMix64& rng, std::size_t t, int h, int w, double fps = 30.0) {
  Clip c;
  c.fps = fps;
  for (std::size_t i = 0; i < t; ++i) c.frames.push_back(random_frame(rng, h, w));
  return c;
}

inline Clip constant_clip(std::size_t t, int h, int w, std::uint8_t r, std::uint8_t g,
                          std::uint8_t b, double fps = 30.0) {
  Clip c;
  c.fps = fps;
  Frame f(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f.at(y, x, 0) = r;
      f.at(y, x, 1) = g;
      f.at(y, x, 2) = b;
    }
  }
  c.frames.assign(t, f);
  return c;
}

inline std::uint64_t uniform(SplitMix64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng.next_u64() % (hi - lo + 1);
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("rppg_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::vector<std::uint32_t> read_golden(const std::string& name) {
  std::ifstream in(std::string(RPPG_TEST_DATA) + "/" + name);
  std::vector<std::uint32_t> v;
  std::uint32_t x;
  while (in >> x) v.push_back(x);
  return v;
}

}  // namespace rppg::testing
