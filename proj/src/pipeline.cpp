#include "rppg/pipeline.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "rppg/baselines.hpp"
#include "rppg/parallel.hpp"
#include "rppg/perturb.hpp"
#include "rppg/rng.hpp"
#include "rppg/synth.hpp"

namespace rppg {

using nlohmann::json;

std::string key_file_json(const PermutationKey& key) {
  json j;
  j["version"] = 1;
  j["n"] = key.n();
  if (const auto* seeded = std::get_if<SeededProvenance>(&key.provenance())) {
    j["seed"] = std::to_string(seeded->seed);
    j["algorithm"] = seeded->algorithm_id;
  } else {
    j["perm"] = std::vector<std::uint32_t>(key.perm().begin(), key.perm().end());
  }
  return j.dump();
}

void write_key_file(const std::filesystem::path& path, const PermutationKey& key) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << key_file_json(key) << '\n';
}

namespace {

PermutationKey key_from_json(const json& j, const std::filesystem::path& path) {
  if (!j.is_object() || j.value("version", 0) != 1) {
    throw Error(ErrorCode::InvalidKey, "unsupported key file version");
  }
  const auto n = j.at("n").get<std::size_t>();
  if (j.contains("perm")) {
    PermutationKey key(j["perm"].get<std::vector<std::uint32_t>>());
    if (key.n() != n) throw Error(ErrorCode::InvalidKey, "key file n does not match perm length");
    return key;
  }
  if (j.value("algorithm", std::string{}) != kKeyAlgorithm) {
    throw Error(ErrorCode::InvalidKey, "unknown key algorithm in " + path.string());
  }
  const auto seed_text = j.at("seed").get<std::string>();
  std::uint64_t seed = 0;
  try {
    std::size_t used = 0;
    if (seed_text.empty() || seed_text[0] == '-') throw std::invalid_argument(seed_text);
    seed = std::stoull(seed_text, &used);
    if (used != seed_text.size()) throw std::invalid_argument(seed_text);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidKey, "bad seed '" + seed_text + "' in " + path.string());
  }
  return keygen(seed, n);
}

}  // namespace

PermutationKey read_key_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open key file " + path.string());
  try {
    return key_from_json(json::parse(in), path);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidKey, path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidKey) throw;
    throw Error(ErrorCode::InvalidKey, path.string() + ": " + e.what());
  }
}

SampleOutput apply_method(const Clip& clip, const PerturbSpec& spec, std::uint64_t sample_index,
                          const Clip* partner, const std::optional<PermutationKey>& key) {
  validate_clip(clip);
  spec.validate();
  const std::uint64_t seed = sample_key_seed(spec.key_policy, sample_index);
  switch (spec.method) {
    case PerturbMethod::Roi:
      return {clip, std::nullopt};
    case PerturbMethod::RoiShuffle:
    case PerturbMethod::RoiShuffleBlur:
    case PerturbMethod::RoiShufflePatch: {
      const int p = spec.method == PerturbMethod::RoiShufflePatch ? spec.patch_size : 1;
      if (clip.height() % p != 0 || clip.width() % p != 0) {
        throw Error(ErrorCode::BadPatchSize, "patch size does not divide the frame");
      }
      const std::size_t n = static_cast<std::size_t>(clip.height() / p) * (clip.width() / p);
      PermutationKey k = key ? *key : keygen(seed, n);
      auto out = perturb_clip(clip, spec, k);
      return {std::move(out), std::move(k)};
    }
    case PerturbMethod::Noise:
      return {add_gaussian_noise(clip, spec.noise_variance, seed), std::nullopt};
    case PerturbMethod::Bdct: {
      PermutationKey k = key ? *key : keygen(seed, kDctBlock * kDctBlock);
      auto out = bdct_clip(clip, k);
      return {std::move(out), std::move(k)};
    }
    case PerturbMethod::Le:
      return {le_clip(clip, LeKey::from_seed(seed)), std::nullopt};
    case PerturbMethod::InstaHide: {
      if (partner == nullptr) {
        throw Error(ErrorCode::Usage, "InstaHide needs a second clip to mix with");
      }
      return {instahide_mix(clip, *partner, instahide_weights(seed), splitmix64_hash(seed)),
              std::nullopt};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unhandled method");
}

PpgTrace estimate_any(Estimator e, const AnyClip& clip) {
  if (const auto* c = std::get_if<Clip>(&clip)) return estimate_signal(e, mean_traces(*c));
  return estimate_signal(e, mean_traces(to_intensity_range(std::get<ClipF>(clip))));
}

std::vector<MethodResult> run_corpus_comparison(const CorpusOptions& opts) {
  if (opts.hrs.empty()) throw Error(ErrorCode::InvalidArgument, "corpus needs at least one HR");
  const std::size_t videos = opts.hrs.size();

  std::vector<SynthClip> corpus(videos);
  std::vector<double> gt_hr(videos);
  parallel_for(videos, opts.jobs, [&](std::size_t i) {
    SynthOptions so;
    so.hr_bpm = opts.hrs[i];
    so.fps = opts.fps;
    so.frames = opts.frames;
    so.noise_sigma = opts.noise_sigma;
    so.seed = splitmix64_hash(opts.seed + i);
    corpus[i] = synthesize_clip(so);
    corpus[i].clip.source_id = "hr" + std::to_string(static_cast<int>(opts.hrs[i]));
    gt_hr[i] = estimate_hr(corpus[i].ppg).bpm;
  });

  std::vector<MethodResult> results;
  for (const auto& name : opts.methods) {
    PerturbSpec spec = parse_method(name);
    if (spec.blur_kernel) spec.blur_kernel = opts.blur_k;
    spec.key_policy = {KeyMode::Unbounded, opts.master_seed, 1};
    spec.validate();

    std::vector<std::vector<double>> pred(opts.estimators.size(), std::vector<double>(videos));
    parallel_for(videos, opts.jobs, [&](std::size_t i) {
      const Clip* partner = &corpus[(i + 1) % videos].clip;
      const auto sample = apply_method(corpus[i].clip, spec, i, partner);
      for (std::size_t e = 0; e < opts.estimators.size(); ++e) {
        pred[e][i] = estimate_hr(estimate_any(opts.estimators[e], sample.clip)).bpm;
      }
    });
    for (std::size_t e = 0; e < opts.estimators.size(); ++e) {
      std::vector<VideoHr> rows;
      for (std::size_t i = 0; i < videos; ++i) {
        rows.push_back({corpus[i].clip.source_id, {pred[e][i]}, pred[e][i], gt_hr[i]});
      }
      results.push_back({name, opts.estimators[e], make_report(std::move(rows))});
    }
  }
  return results;
}

}  // namespace rppg
