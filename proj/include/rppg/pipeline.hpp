#pragma once

// Glue between perturbation methods, estimators and HR evaluation.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rppg/core.hpp"
#include "rppg/estimators.hpp"
#include "rppg/eval.hpp"

namespace rppg {

// Key file: {"version":1,"n":N,"seed":"<u64>","algorithm":"splitmix64-fisheryates-v1"}
//       or  {"version":1,"n":N,"perm":[...]}
void write_key_file(const std::filesystem::path& path, const PermutationKey& key);
PermutationKey read_key_file(const std::filesystem::path& path);
std::string key_file_json(const PermutationKey& key);

struct SampleOutput {
  AnyClip clip;
  std::optional<PermutationKey> key;  // permutation used, for keyed shuffles / BDCT
};

/// Applies one method to one sample (an ROI clip). `partner` is the second
/// clip InstaHide mixes with. `key`, when given, overrides the policy for
/// permutation-keyed methods.
SampleOutput apply_method(const Clip& clip, const PerturbSpec& spec, std::uint64_t sample_index,
                          const Clip* partner = nullptr,
                          const std::optional<PermutationKey>& key = std::nullopt);

/// Runs an estimator on either clip type. Real-valued clips are taken to be
/// in [-1, 1] and mapped back to intensities first.
PpgTrace estimate_any(Estimator e, const AnyClip& clip);

struct CorpusOptions {
  std::vector<double> hrs{48, 60, 72, 90, 120, 150, 180};
  double fps = 30.0;
  std::size_t frames = 300;
  double noise_sigma = 1.0;
  std::uint64_t seed = 7;
  std::uint64_t master_seed = 42;
  std::vector<std::string> methods{"roi", "roi+sh", "roi+sh+b", "noise", "bdct", "le", "instahide"};
  std::vector<Estimator> estimators{Estimator::Chrom, Estimator::Pos};
  int blur_k = 3;
  int jobs = 1;
};

struct MethodResult {
  std::string method;
  Estimator estimator = Estimator::Chrom;
  HrReport report;
};

/// Synthesizes one clip per HR, perturbs each with every method (unbounded
/// key policy, sample index = video index) and scores whole-clip HR against
/// the HR of the ground-truth trace.
std::vector<MethodResult> run_corpus_comparison(const CorpusOptions& opts);

}  // namespace rppg
