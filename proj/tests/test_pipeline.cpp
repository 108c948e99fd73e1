#include <doctest.h>

#include <algorithm>

#include "rppg/baselines.hpp"
#include "rppg/perturb.hpp"
#include "rppg/pipeline.hpp"
#include "rppg/synth.hpp"
#include "test_util.hpp"

using namespace rppg;

namespace {

ErrorCode key_error(const std::filesystem::path& p) {
  try {
    read_key_file(p);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an invalid key");
  return ErrorCode::Usage;
}

PerturbSpec spec_for(const std::string& method, std::uint64_t master = 5) {
  PerturbSpec s = parse_method(method);
  s.key_policy = {KeyMode::Unbounded, master, 1};
  return s;
}

}  // namespace

TEST_CASE("key files round trip in both forms") {
  const auto dir = testing::temp_dir("keyfiles");
  const auto seeded = keygen(12345, 4096);
  write_key_file(dir / "seeded.json", seeded);
  const auto text = testing::read_file(dir / "seeded.json");
  CHECK(text.find("\"seed\":\"12345\"") != std::string::npos);
  CHECK(text.find("perm") == std::string::npos);
  CHECK(std::ranges::equal(read_key_file(dir / "seeded.json").perm(), seeded.perm()));

  const PermutationKey explicit_key({3, 1, 0, 2});
  write_key_file(dir / "perm.json", explicit_key);
  CHECK(std::ranges::equal(read_key_file(dir / "perm.json").perm(), explicit_key.perm()));

  // 64-bit seeds survive JSON
  const auto big = keygen(0xfedcba9876543210ull, 16);
  write_key_file(dir / "big.json", big);
  CHECK(std::ranges::equal(read_key_file(dir / "big.json").perm(), big.perm()));
}

TEST_CASE("invalid key files") {
  const auto dir = testing::temp_dir("keyfiles_bad");
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"version", R"({"version":2,"n":4,"perm":[0,1,2,3]})"},
      {"dup", R"({"version":1,"n":3,"perm":[0,0,1]})"},
      {"length", R"({"version":1,"n":5,"perm":[0,1,2,3]})"},
      {"algo", R"({"version":1,"n":4,"seed":"1","algorithm":"mt19937"})"},
      {"seed", R"({"version":1,"n":4,"seed":"12x","algorithm":"splitmix64-fisheryates-v1"})"},
      {"neg", R"({"version":1,"n":4,"seed":"-1","algorithm":"splitmix64-fisheryates-v1"})"},
      {"missing", R"({"version":1,"perm":[0,1]})"},
      {"type", R"({"version":1,"n":"four","perm":[0,1]})"},
      {"junk", "not json"},
  };
  for (const auto& [name, body] : cases) {
    CAPTURE(name);
    testing::write_file(dir / (name + ".json"), body);
    CHECK(key_error(dir / (name + ".json")) == ErrorCode::InvalidKey);
  }
  CHECK(key_error(dir / "absent.json") == ErrorCode::Io);
}

TEST_CASE("apply_method") {
  SplitMix64 rng(3);
  const Clip c = testing::random_clip(rng, 3, 64, 64);
  const Clip other = testing::random_clip(rng, 3, 64, 64);

  const auto roi = apply_method(c, spec_for("roi"), 0);
  CHECK(std::get<Clip>(roi.clip) == c);
  CHECK_FALSE(roi.key);

  const auto sh = apply_method(c, spec_for("roi+sh"), 4);
  REQUIRE(sh.key);
  CHECK(sh.key->n() == 4096);
  CHECK(std::ranges::equal(sh.key->perm(),
                           keygen(sample_key_seed(spec_for("roi+sh").key_policy, 4), 4096).perm()));
  CHECK(std::get<Clip>(sh.clip).frames[1] == shuffle_pixels(c.frames[1], *sh.key));
  // different samples get different keys under the unbounded policy
  CHECK_FALSE(std::ranges::equal(apply_method(c, spec_for("roi+sh"), 5).key->perm(), sh.key->perm()));

  const auto fixed = keygen(1, 4096);
  CHECK(std::ranges::equal(apply_method(c, spec_for("roi+sh"), 4, nullptr, fixed).key->perm(),
                           fixed.perm()));

  const auto patch = apply_method(c, spec_for("patch:8"), 0);
  CHECK(patch.key->n() == 64);

  const auto blur = apply_method(c, spec_for("roi+sh+b"), 4);
  CHECK(std::get<Clip>(blur.clip).frames[0] ==
        gaussian_blur(shuffle_pixels(c.frames[0], *sh.key), 3));

  const auto bd = apply_method(c, spec_for("bdct"), 2);
  REQUIRE(bd.key);
  CHECK(bd.key->n() == 64);

  CHECK(std::get<Clip>(apply_method(c, spec_for("le"), 2).clip).frames[0] ==
        le_encrypt(c.frames[0], LeKey::from_seed(sample_key_seed(spec_for("le").key_policy, 2))));

  CHECK_THROWS_AS(apply_method(c, spec_for("instahide"), 0), Error);
  const auto ih = apply_method(c, spec_for("instahide"), 0, &other);
  CHECK(std::holds_alternative<ClipF>(ih.clip));
  CHECK(apply_method(c, spec_for("instahide"), 0, &other).clip == ih.clip);

  CHECK_THROWS_AS(apply_method(testing::random_clip(rng, 2, 60, 64), spec_for("patch:8"), 0), Error);
}

TEST_CASE("estimate_any maps float clips back to intensities") {
  SynthOptions o;
  o.frames = 128;
  const auto sc = synthesize_clip(o);
  const auto a = estimate_any(Estimator::Pos, sc.clip);
  const auto b = estimate_any(Estimator::Pos, to_unit_range(sc.clip));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) < 1e-6);
}

TEST_CASE("corpus comparison is independent of worker count") {
  CorpusOptions o;
  o.hrs = {60, 90, 120};
  o.frames = 256;
  o.methods = {"roi", "roi+sh+b", "le"};
  o.jobs = 1;
  const auto a = run_corpus_comparison(o);
  o.jobs = 3;
  const auto b = run_corpus_comparison(o);
  REQUIRE(a.size() == 6);
  REQUIRE(b.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].method == b[i].method);
    CHECK(a[i].report.mae == b[i].report.mae);
    CHECK(a[i].report.per_video.size() == 3);
  }
  CHECK(a[0].method == "roi");
  CHECK(a[0].report.mae < 2.0);
}
