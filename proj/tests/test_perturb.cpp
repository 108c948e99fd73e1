#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "rppg/perturb.hpp"
#include "test_util.hpp"

using namespace rppg;
using rppg::testing::random_frame;

namespace {

std::array<std::uint64_t, 3> channel_sums(const Frame& f) {
  std::array<std::uint64_t, 3> s{};
  const auto d = f.data();
  for (std::size_t i = 0; i < d.size(); ++i) s[i % 3] += d[i];
  return s;
}

std::vector<std::array<std::uint8_t, 3>> sorted_pixels(const Frame& f) {
  std::vector<std::array<std::uint8_t, 3>> px;
  const auto d = f.data();
  for (std::size_t i = 0; i < d.size(); i += 3) px.push_back({d[i], d[i + 1], d[i + 2]});
  std::sort(px.begin(), px.end());
  return px;
}

// Direct 2-D convolution with the outer-product kernel and edge clamping.
double blur_oracle(const Frame& f, int k, int y, int x, int c) {
  const double sigma = (k - 1) / 4.0;
  const int r = k / 2;
  std::vector<double> w;
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    w.push_back(std::exp(-(i * i) / (2 * sigma * sigma)));
    sum += w.back();
  }
  double acc = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const int yy = std::clamp(y + dy, 0, f.height() - 1);
      const int xx = std::clamp(x + dx, 0, f.width() - 1);
      acc += (w[dy + r] / sum) * (w[dx + r] / sum) * f.at(yy, xx, c);
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("keygen matches the golden permutations") {
  const auto golden = testing::read_golden("keygen_seed0_n4096.txt");
  REQUIRE(golden.size() == 4096);
  const auto k = keygen(0, 4096);
  CHECK(std::equal(golden.begin(), golden.end(), k.perm().begin()));

  const auto small = testing::read_golden("keygen_seed12345_n64.txt");
  const auto k64 = keygen(12345, 64);
  CHECK(std::equal(small.begin(), small.end(), k64.perm().begin()));
}

TEST_CASE("keygen basics") {
  CHECK(keygen(99, 1).perm()[0] == 0);
  CHECK(keygen(7, 4096) == keygen(7, 4096));
  CHECK_FALSE(keygen(7, 4096).same_mapping(keygen(8, 4096)));
  const auto k = keygen(7, 10);
  const auto& prov = std::get<SeededProvenance>(k.provenance());
  CHECK(prov.seed == 7);
  CHECK(prov.algorithm_id == "splitmix64-fisheryates-v1");
  CHECK_THROWS_AS(keygen(0, 0), Error);
}

TEST_CASE("splitmix64 reference outputs") {
  // first outputs of the reference generator for seeds 0 and 42
  CHECK(splitmix64_hash(0) == 16294208416658607535ULL);
  CHECK(splitmix64_hash(42) == 13679457532755275413ULL);
}

TEST_CASE("key policies") {
  const KeyPolicy fixed{KeyMode::Fixed, 5, 1};
  CHECK(derive_sample_key(fixed, 0, 4096) == derive_sample_key(fixed, 31337, 4096));

  const KeyPolicy pool{KeyMode::Pool, 1000, 10};
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 10000; ++i) seeds.insert(sample_key_seed(pool, i));
  CHECK(seeds.size() <= 10);
  CHECK(seeds.size() > 1);
  for (auto s : seeds) CHECK((s >= 1000 && s < 1010));

  const KeyPolicy unbounded{KeyMode::Unbounded, 42, 1};
  CHECK_FALSE(derive_sample_key(unbounded, 0, 4096).same_mapping(derive_sample_key(unbounded, 1, 4096)));
  CHECK(sample_key_seed(unbounded, 3) == splitmix64_hash(42 ^ 3));
  CHECK(sample_key_seed(pool, 3) == 1000 + splitmix64_hash(3) % 10);
}

TEST_CASE("pixel shuffle on a 2x2 frame") {
  Frame f(2, 2, std::vector<std::uint8_t>{0, 1, 2, 10, 11, 12, 20, 21, 22, 30, 31, 32});
  const auto out = shuffle_pixels(f, PermutationKey({3, 2, 1, 0}));
  CHECK(out == Frame(2, 2, std::vector<std::uint8_t>{30, 31, 32, 20, 21, 22, 10, 11, 12, 0, 1, 2}));
  CHECK(shuffle_pixels(f, PermutationKey::identity(4)) == f);
  CHECK_THROWS_AS(shuffle_pixels(f, PermutationKey::identity(5)), Error);
}

TEST_CASE("shuffle properties over random frames and keys") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const Frame f = random_frame(rng, 64, 64);
    const auto key = keygen(rng.next_u64(), 4096);
    const Frame s = shuffle_pixels(f, key);
    CHECK(unshuffle_pixels(s, key) == f);
    CHECK(shuffle_pixels(unshuffle_pixels(f, key), key) == f);
    CHECK(channel_sums(s) == channel_sums(f));
    CHECK(sorted_pixels(s) == sorted_pixels(f));
  }
}

TEST_CASE("wrong key leaves almost every pixel wrong") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Frame f = random_frame(rng, 64, 64);
    const auto key = keygen(rng.next_u64(), 4096);
    const auto wrong = keygen(rng.next_u64(), 4096);
    const Frame back = unshuffle_pixels(shuffle_pixels(f, key), wrong);
    std::size_t differ = 0;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (back.at(y, x, 0) != f.at(y, x, 0) || back.at(y, x, 1) != f.at(y, x, 1) ||
            back.at(y, x, 2) != f.at(y, x, 2)) {
          ++differ;
        }
      }
    }
    CHECK(differ > 0.99 * 4096);
  }
}

TEST_CASE("patch shuffle") {
  SplitMix64 rng(5);
  const Frame f = random_frame(rng, 64, 64);
  CHECK(shuffle_patches(f, 64, PermutationKey::identity(1)) == f);
  CHECK(shuffle_patches(f, 2, PermutationKey::identity(1024)) == f);
  // P = 1 is pixel shuffling
  const auto k1 = keygen(9, 4096);
  CHECK(shuffle_patches(f, 1, k1) == shuffle_pixels(f, k1));

  for (int p : {2, 4, 8}) {
    const auto key = keygen(rng.next_u64(), shuffle_domain(p));
    const Frame s = shuffle_patches(f, p, key);
    CHECK(channel_sums(s) == channel_sums(f));
    CHECK(unshuffle_patches(s, p, key) == f);
    // block i of the output is block key[i] of the input, untouched
    const int per_row = 64 / p;
    for (std::size_t i = 0; i < key.n(); i += 7) {
      const int dy = static_cast<int>(i / per_row) * p, dx = static_cast<int>(i % per_row) * p;
      const int sy = static_cast<int>(key[i] / per_row) * p, sx = static_cast<int>(key[i] % per_row) * p;
      for (int r = 0; r < p; ++r) {
        for (int c = 0; c < p; ++c) {
          for (int ch = 0; ch < 3; ++ch) CHECK(s.at(dy + r, dx + c, ch) == f.at(sy + r, sx + c, ch));
        }
      }
    }
  }
  try {
    shuffle_patches(f, 5, PermutationKey::identity(144));
    FAIL("expected bad patch size");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadPatchSize);
  }
  CHECK(shuffle_domain(1) == 4096);
  CHECK(shuffle_domain(8) == 64);
}

TEST_CASE("gaussian kernel") {
  const auto w = gaussian_kernel(3);
  REQUIRE(w.size() == 3);
  // sigma = 0.5: e^-2 / (1 + 2 e^-2) and 1 / (1 + 2 e^-2)
  CHECK(w[0] == doctest::Approx(0.10650697891920077).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.78698604216159847).epsilon(1e-12));
  CHECK(w[2] == w[0]);
  for (int k : {5, 7, 9}) {
    const auto v = gaussian_kernel(k);
    double s = 0;
    for (double x : v) s += x;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  try {
    gaussian_kernel(4);
    FAIL("expected bad kernel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadKernel);
  }
  CHECK_THROWS_AS(gaussian_kernel(1), Error);
}

TEST_CASE("blur of a constant frame is the same frame") {
  const Frame f = testing::constant_clip(1, 64, 64, 200, 17, 90).frames[0];
  for (int k : {3, 5, 7}) CHECK(gaussian_blur(f, k) == f);
}

TEST_CASE("blur of a central impulse") {
  Frame f(9, 9);
  for (int c = 0; c < 3; ++c) f.at(4, 4, c) = 255;
  const Frame out = gaussian_blur(f, 3);
  const double w0 = 0.10650697891920077, w1 = 0.78698604216159847;
  const double w[3] = {w0, w1, w0};
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const auto expected = static_cast<int>(std::lround(255.0 * w[dy + 1] * w[dx + 1]));
      CHECK(out.at(4 + dy, 4 + dx, 1) == expected);
    }
  }
  // values: 3 at the corners, 21 on the edges, 158 in the centre
  CHECK(out.at(3, 3, 0) == 3);
  CHECK(out.at(3, 4, 0) == 21);
  CHECK(out.at(4, 4, 0) == 158);
  CHECK(out.at(2, 4, 0) == 0);
}

TEST_CASE("blur agrees with direct 2-D convolution") {
  SplitMix64 rng(77);
  for (int k : {3, 5}) {
    const Frame f = random_frame(rng, 20, 17);
    const Frame out = gaussian_blur(f, k);
    for (int y = 0; y < f.height(); ++y) {
      for (int x = 0; x < f.width(); ++x) {
        for (int c = 0; c < 3; ++c) {
          const double ref = blur_oracle(f, k, y, x, c);
          const double frac = ref - std::floor(ref);
          if (std::abs(frac - 0.5) < 1e-9) continue;  // rounding tie
          CHECK(out.at(y, x, c) == static_cast<int>(std::lround(ref)));
        }
      }
    }
  }
}

TEST_CASE("blur moves channel means by at most one intensity unit") {
  SplitMix64 rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    const Frame f = random_frame(rng, 64, 64);
    const Frame b = gaussian_blur(f, 3);
    const auto s0 = channel_sums(f), s1 = channel_sums(b);
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(static_cast<double>(s1[c]) - static_cast<double>(s0[c])) / 4096.0 <= 1.0);
    }
  }
}

TEST_CASE("perturb_clip") {
  SplitMix64 rng(8);
  const Clip clip = testing::random_clip(rng, 6, 64, 64);
  const auto key = keygen(3, 4096);

  CHECK(perturb_clip(clip, parse_method("roi"), key) == clip);

  const Clip sh = perturb_clip(clip, parse_method("roi+sh"), key);
  for (std::size_t i = 0; i < clip.size(); ++i) {
    CHECK(channel_sums(sh.frames[i]) == channel_sums(clip.frames[i]));
    CHECK(sh.frames[i] == shuffle_pixels(clip.frames[i], key));
  }

  const Clip shb = perturb_clip(clip, parse_method("roi+sh+b"), key);
  CHECK(shb.frames[2] == gaussian_blur(shuffle_pixels(clip.frames[2], key), 3));

  const Clip flat = testing::constant_clip(4, 64, 64, 120, 80, 60);
  CHECK(perturb_clip(flat, parse_method("roi+sh+b"), PermutationKey::identity(4096)) == flat);

  const auto patch = parse_method("patch:4");
  const auto pk = keygen(1, shuffle_domain(4));
  CHECK(perturb_clip(clip, patch, pk).frames[0] ==
        gaussian_blur(shuffle_patches(clip.frames[0], 4, pk), 3));

  CHECK_THROWS_AS(perturb_clip(clip, parse_method("noise"), key), Error);
  CHECK_THROWS_AS(perturb_clip(clip, parse_method("roi+sh"), keygen(3, 100)), Error);
}

TEST_CASE("key space") {
  CHECK(log10_keyspace(1) == 0.0);
  CHECK(log10_keyspace(2) == doctest::Approx(std::log10(2.0)));
  // reference values from lgamma(n + 1) / ln 10
  CHECK(log10_keyspace(4096) == doctest::Approx(13019.56142774419).epsilon(1e-12));
  CHECK(log10_keyspace(1024) == doctest::Approx(2639.733881385711).epsilon(1e-12));
  CHECK(log10_keyspace(256) == doctest::Approx(506.93339504126567).epsilon(1e-12));
  CHECK(log10_keyspace(64) == doctest::Approx(89.10341689733669).epsilon(1e-12));
  double prev = -1.0;
  for (std::size_t n = 1; n < 600; ++n) {
    const double v = log10_keyspace(n);
    if (n > 1) CHECK(v > prev);
    prev = v;
  }
}
