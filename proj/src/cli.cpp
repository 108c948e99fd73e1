#include "rppg/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>

#include "rppg/clipfile.hpp"
#include "rppg/estimators.hpp"
#include "rppg/eval.hpp"
#include "rppg/ingest.hpp"
#include "rppg/parallel.hpp"
#include "rppg/perturb.hpp"
#include "rppg/pipeline.hpp"
#include "rppg/roi.hpp"
#include "rppg/synth.hpp"

namespace rppg::cli {

using nlohmann::json;

namespace {

constexpr const char* kClipFile = "clip.rppgclip";
constexpr const char* kSidecarFile = "clip.json";
constexpr const char* kSignalFile = "signal.csv";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string abs_path(const fs::path& p) { return fs::absolute(p).lexically_normal().string(); }

// Canonical argument list recorded in run.json: every flag explicit, paths absolute.
class ArgList {
 public:
  explicit ArgList(std::string command) { args_.push_back(std::move(command)); }
  ArgList& add(const std::string& flag, const std::string& value) {
    args_.push_back(flag);
    args_.push_back(value);
    return *this;
  }
  ArgList& add(const std::string& flag, double v) { return add(flag, fmt(v)); }
  ArgList& add(const std::string& flag, std::uint64_t v) { return add(flag, std::to_string(v)); }
  ArgList& add(const std::string& flag, int v) { return add(flag, std::to_string(v)); }
  ArgList& path(const std::string& flag, const fs::path& p) { return add(flag, abs_path(p)); }
  const std::vector<std::string>& args() const { return args_; }

 private:
  std::vector<std::string> args_;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

void write_run_json(const fs::path& path, const ArgList& args, const std::string& output_flag,
                    const json& config) {
  json j;
  j["version"] = 1;
  j["args"] = args.args();
  j["output_flag"] = output_flag;
  j["config"] = config;
  write_text(path, j.dump(1) + "\n");
}

// run.json location for commands whose output is a single file.
fs::path run_json_beside(const fs::path& file) {
  return file.parent_path() / (file.stem().string() + ".run.json");
}

void check_not_input(const fs::path& in, const fs::path& out) {
  if (fs::exists(out) && fs::exists(in) && fs::equivalent(in, out)) {
    throw Error(ErrorCode::Usage, "output must differ from input " + in.string());
  }
}

KeyPolicy parse_key_policy(const std::string& text, std::uint64_t master_seed) {
  KeyPolicy p;
  p.master_seed = master_seed;
  if (text == "fixed") {
    p.mode = KeyMode::Fixed;
  } else if (text == "unbounded") {
    p.mode = KeyMode::Unbounded;
  } else if (text.rfind("pool:", 0) == 0) {
    p.mode = KeyMode::Pool;
    try {
      std::size_t used = 0;
      p.pool_size = std::stoull(text.substr(5), &used);
      if (used != text.size() - 5) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Usage, "bad key policy '" + text + "'");
    }
  } else {
    throw Error(ErrorCode::Usage, "key policy must be fixed, pool:M or unbounded, got '" + text + "'");
  }
  p.validate();
  return p;
}

std::pair<double, double> parse_band(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    const double lo = std::stod(text.substr(0, colon));
    const double hi = std::stod(text.substr(colon + 1));
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (const std::exception&) {
    throw Error(ErrorCode::Usage, "band must be LO:HI in Hz with 0 < LO < HI, got '" + text + "'");
  }
}

json report_json(const HrReport& r) {
  json videos = json::array();
  for (const auto& v : r.per_video) {
    videos.push_back({{"id", v.id},
                      {"per_window_hr", v.per_window_hr},
                      {"pred_hr", v.video_hr},
                      {"gt_hr", v.gt_hr}});
  }
  return {{"mae", r.mae},
          {"rmse", r.rmse},
          {"pearson_r", r.pearson_r ? json(*r.pearson_r) : json(nullptr)},
          {"per_video", videos}};
}

Clip slice(const Clip& clip, std::size_t start, std::size_t len) {
  Clip out;
  out.fps = clip.fps;
  out.source_id = clip.source_id;
  out.frames.assign(clip.frames.begin() + static_cast<std::ptrdiff_t>(start),
                    clip.frames.begin() + static_cast<std::ptrdiff_t>(start + len));
  return out;
}

// ---------------------------------------------------------------- keygen

struct KeygenOpts {
  std::uint64_t seed = 0;
  std::size_t n = 4096;
  fs::path out;
};

void cmd_keygen(const KeygenOpts& o) {
  if (o.n == 0) throw Error(ErrorCode::InvalidArgument, "--n must be positive");
  write_key_file(o.out, keygen(o.seed, o.n));
  ArgList a("keygen");
  a.add("--seed", o.seed).add("--n", static_cast<std::uint64_t>(o.n)).path("--out", o.out);
  write_run_json(run_json_beside(o.out), a, "--out",
                 {{"seed", std::to_string(o.seed)}, {"n", o.n}, {"algorithm", kKeyAlgorithm}});
}

// ---------------------------------------------------------------- synth

struct SynthCmdOpts {
  double hr = 72.0;
  double fps = 30.0;
  std::size_t frames = 300;
  double noise = 0.0;
  std::uint64_t seed = 0;
  int face_size = 0;
  fs::path out;
};

void cmd_synth(const SynthCmdOpts& o) {
  SynthOptions so;
  so.hr_bpm = o.hr;
  so.fps = o.fps;
  so.frames = o.frames;
  so.noise_sigma = o.noise;
  so.seed = o.seed;
  if (o.face_size > 0) {
    auto face = synthesize_face_clip(so, o.face_size);
    write_frames(o.out / "frames", face.clip);
    write_landmarks(o.out / "landmarks.jsonl", face.landmarks);
    write_ppg_csv(o.out / "ppg.csv", face.ppg);
  } else {
    auto sc = synthesize_clip(so);
    write_frames(o.out / "frames", sc.clip);
    write_ppg_csv(o.out / "ppg.csv", sc.ppg);
  }
  write_manifest(o.out, o.fps);
  ArgList a("synth");
  a.add("--hr", o.hr).add("--fps", o.fps).add("--frames", static_cast<std::uint64_t>(o.frames));
  a.add("--noise", o.noise).add("--seed", o.seed).add("--face-size", o.face_size).path("--out", o.out);
  write_run_json(o.out / "run.json", a, "--out",
                 {{"hr", o.hr}, {"fps", o.fps}, {"frames", o.frames}, {"noise_sigma", o.noise},
                  {"seed", std::to_string(o.seed)}, {"face_size", o.face_size}});
}

// ---------------------------------------------------------------- perturb

struct PerturbOpts {
  fs::path in;
  fs::path out;
  std::string landmarks;  // empty: frames are already ROI images; "auto": <video>/landmarks.jsonl
  std::string method = "roi+sh+b";
  std::optional<fs::path> key;
  std::uint64_t master_seed = 0;
  std::string key_policy = "unbounded";
  int blur_k = 3;
  double noise_variance = 0.5;
  std::size_t window = 0;
  std::size_t stride = kWindowStride;
  std::optional<fs::path> mix_with;
  std::optional<double> fps;
  int jobs = 1;
};

bool uses_permutation(PerturbMethod m) {
  return m == PerturbMethod::RoiShuffle || m == PerturbMethod::RoiShuffleBlur ||
         m == PerturbMethod::RoiShufflePatch || m == PerturbMethod::Bdct;
}

std::optional<fs::path> landmarks_for(const DatasetEntry& e, const std::string& mode) {
  if (mode.empty()) return std::nullopt;
  if (mode == "auto") {
    if (!e.landmarks) {
      throw Error(ErrorCode::MissingDir, e.dir.string() + " has no landmarks.jsonl");
    }
    return e.landmarks;
  }
  return fs::path(mode);
}

Clip load_roi_clip(const DatasetEntry& e, const std::optional<fs::path>& landmarks) {
  Clip frames = load_frames(e.frames_dir, e.fps);
  frames.source_id = e.video_id;
  if (!landmarks) return frames;
  const auto lm = load_landmarks(*landmarks, frames.size());
  Clip roi = roi_clip(frames, lm);
  roi.fps = frames.fps;
  roi.source_id = e.video_id;
  return roi;
}

void copy_frames_verbatim(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  for (const auto& f : list_frame_files(from)) {
    fs::copy_file(f, to / f.filename(), fs::copy_options::overwrite_existing);
  }
}

void cmd_perturb(const PerturbOpts& o) {
  PerturbSpec spec = parse_method(o.method);
  if (spec.blur_kernel) spec.blur_kernel = o.blur_k;
  spec.noise_variance = o.noise_variance;
  spec.key_policy = parse_key_policy(o.key_policy, o.master_seed);
  spec.validate();
  if (o.key && !uses_permutation(spec.method)) {
    throw Error(ErrorCode::Usage, "--key only applies to permutation-keyed methods");
  }
  if (o.window > 0 && o.stride == 0) throw Error(ErrorCode::Usage, "--stride must be positive");
  check_not_input(o.in, o.out);

  const auto entries = discover_videos(o.in, o.fps);
  const bool single = entries.size() == 1 && is_video_dir(o.in);
  if (!single && !o.landmarks.empty() && o.landmarks != "auto") {
    throw Error(ErrorCode::Usage, "--landmarks FILE needs a single video; use --landmarks auto");
  }
  for (const auto& e : entries) {
    if (!fs::is_directory(e.frames_dir)) {
      throw Error(ErrorCode::MissingDir, e.dir.string() + " has no frames/ directory");
    }
  }
  std::optional<PermutationKey> explicit_key;
  if (o.key) explicit_key = read_key_file(*o.key);

  std::optional<DatasetEntry> mix_entry;
  if (o.mix_with) mix_entry = discover_videos(*o.mix_with, o.fps).front();
  if (spec.method == PerturbMethod::InstaHide && !mix_entry && entries.size() < 2) {
    throw Error(ErrorCode::Usage, "instahide needs --mix-with DIR or a root with several videos");
  }

  // Sample indices are assigned in (video, window) order before any work starts.
  std::vector<std::size_t> first_sample(entries.size() + 1, 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::size_t t = list_frame_files(entries[i].frames_dir).size();
    std::size_t samples = 1;
    if (o.window > 0) {
      samples = window_count(t, o.window, o.stride);
      if (samples == 0) {
        throw Error(ErrorCode::ClipTooShort, entries[i].video_id + " has " + std::to_string(t) +
                                                 " frames, fewer than the window of " +
                                                 std::to_string(o.window));
      }
    }
    first_sample[i + 1] = first_sample[i] + samples;
  }

  parallel_for(entries.size(), o.jobs, [&](std::size_t vi) {
    const auto& e = entries[vi];
    const auto lm_path = landmarks_for(e, o.landmarks);
    const Clip clip = load_roi_clip(e, lm_path);
    std::optional<Clip> partner;
    if (spec.method == PerturbMethod::InstaHide) {
      const DatasetEntry& pe = mix_entry ? *mix_entry : entries[(vi + 1) % entries.size()];
      std::optional<fs::path> plm;
      if (lm_path) plm = landmarks_for(pe, "auto");
      partner = load_roi_clip(pe, plm);
    }
    std::optional<PpgTrace> gt;
    if (e.ppg) gt = align_ppg(load_ppg_csv(*e.ppg), e.fps, clip.size());

    const fs::path dir = single ? o.out : o.out / e.video_id;
    fs::create_directories(dir);
    write_manifest(dir, e.fps);
    if (e.ppg) fs::copy_file(*e.ppg, dir / "ppg.csv", fs::copy_options::overwrite_existing);

    const std::size_t n_samples = first_sample[vi + 1] - first_sample[vi];
    for (std::size_t w = 0; w < n_samples; ++w) {
      const std::size_t start = w * o.stride;
      const std::size_t len = o.window > 0 ? o.window : clip.size();
      const Clip sample = o.window > 0 ? slice(clip, start, len) : clip;
      std::optional<Clip> psample;
      if (partner) {
        if (partner->size() < start + len) {
          throw Error(ErrorCode::LengthMismatch, "mixing partner of " + e.video_id + " is too short");
        }
        psample = slice(*partner, start, len);
        if (!psample->frames.front().same_shape(sample.frames.front())) {
          throw Error(ErrorCode::ShapeMismatch, "mixing partner of " + e.video_id +
                                                    " has a different frame size");
        }
      }
      const auto result = apply_method(sample, spec, first_sample[vi] + w,
                                       psample ? &*psample : nullptr, explicit_key);

      const std::string stem = o.window > 0 ? "w" + [&] {
        char b[32];
        std::snprintf(b, sizeof b, "%05zu", w);
        return std::string(b);
      }() : std::string("clip");
      const fs::path clip_path =
          o.window > 0 ? dir / "clips" / (stem + ".rppgclip") : dir / kClipFile;
      const fs::path sidecar_path =
          o.window > 0 ? dir / "clips" / (stem + ".json") : dir / kSidecarFile;

      ClipSidecar sc;
      sc.fps = e.fps;
      sc.method = method_name(spec);
      sc.start_frame = start;
      if (o.window > 0) sc.window_index = static_cast<int>(w);
      if (gt) {
        const auto v = gt->samples().subspan(start, len);
        sc.gt_ppg.assign(v.begin(), v.end());
      }
      if (result.key) {
        const std::string rel = "keys/" + (o.window > 0 ? stem : std::string("key")) + ".json";
        write_key_file(dir / rel, *result.key);
        sc.key_file = rel;
      }
      write_clipfile(clip_path, result.clip);
      write_sidecar(sidecar_path, sc);

      if (o.window == 0) {
        if (const auto* u8 = std::get_if<Clip>(&result.clip)) {
          if (spec.method == PerturbMethod::Roi && !lm_path) {
            copy_frames_verbatim(e.frames_dir, dir / "frames");
          } else {
            write_frames(dir / "frames", *u8);
          }
        }
      }
    }
  });

  ArgList a("perturb");
  a.path("--in", o.in).path("--out", o.out).add("--method", o.method);
  if (!o.landmarks.empty()) {
    a.add("--landmarks", o.landmarks == "auto" ? o.landmarks : abs_path(o.landmarks));
  }
  if (o.key) a.path("--key", *o.key);
  a.add("--master-seed", o.master_seed).add("--key-policy", o.key_policy);
  a.add("--blur-k", o.blur_k).add("--noise-var", o.noise_variance);
  a.add("--window", static_cast<std::uint64_t>(o.window));
  a.add("--stride", static_cast<std::uint64_t>(o.stride));
  if (o.mix_with) a.path("--mix-with", *o.mix_with);
  if (o.fps) a.add("--fps", *o.fps);
  a.add("--jobs", o.jobs);
  json videos = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    videos.push_back({{"id", entries[i].video_id},
                      {"fps", entries[i].fps},
                      {"first_sample", first_sample[i]},
                      {"samples", first_sample[i + 1] - first_sample[i]}});
  }
  write_run_json(o.out / "run.json", a, "--out",
                 {{"method", method_name(spec)},
                  {"master_seed", std::to_string(o.master_seed)},
                  {"key_policy", o.key_policy},
                  {"blur_k", spec.blur_kernel ? json(*spec.blur_kernel) : json(nullptr)},
                  {"noise_variance", spec.noise_variance},
                  {"window", o.window},
                  {"stride", o.stride},
                  {"videos", videos}});
}

// ---------------------------------------------------------------- estimate

struct EstimateOpts {
  fs::path in;
  std::string method = "pos";
  fs::path out;
  std::optional<double> fps;
  int jobs = 1;
};

double resolve_fps(const fs::path& dir, const fs::path& sidecar, std::optional<double> flag) {
  if (fs::exists(sidecar)) return read_sidecar(sidecar).fps;
  if (auto m = load_manifest_fps(dir)) return *m;
  if (flag) return *flag;
  throw Error(ErrorCode::Usage, dir.string() + " has no fps information; pass --fps");
}

PpgTrace estimate_video(const fs::path& dir, Estimator est, std::optional<double> fps_flag) {
  if (fs::exists(dir / kClipFile)) {
    const double fps = resolve_fps(dir, dir / kSidecarFile, fps_flag);
    return estimate_any(est, read_clipfile(dir / kClipFile, fps));
  }
  if (fs::is_directory(dir / "clips")) {
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir / "clips")) {
      if (f.path().extension() == ".rppgclip") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorCode::EmptyInput, "no clips in " + (dir / "clips").string());
    std::vector<double> acc;
    double fps = 0.0;
    for (const auto& f : files) {
      const auto sidecar = fs::path(f).replace_extension(".json");
      const double clip_fps = resolve_fps(dir, sidecar, fps_flag);
      const std::size_t start = fs::exists(sidecar) ? read_sidecar(sidecar).start_frame : 0;
      if (fps == 0.0) fps = clip_fps;
      const auto s = estimate_any(est, read_clipfile(f, clip_fps)).values();
      const double m = mean_value(s);
      double var = 0.0;
      for (double v : s) var += (v - m) * (v - m);
      const double sd = std::sqrt(var / static_cast<double>(s.size()));
      if (acc.size() < start + s.size()) acc.resize(start + s.size(), 0.0);
      for (std::size_t i = 0; i < s.size(); ++i) acc[start + i] += sd > 0.0 ? (s[i] - m) / sd : 0.0;
    }
    return PpgTrace(std::move(acc), fps);
  }
  const double fps = resolve_fps(dir, dir / kSidecarFile, fps_flag);
  return estimate_any(est, load_frames(dir / "frames", fps));
}

void cmd_estimate(const EstimateOpts& o) {
  const Estimator est = parse_estimator(o.method);
  if (!fs::is_directory(o.in)) {
    throw Error(ErrorCode::MissingDir, "directory " + o.in.string() + " does not exist");
  }
  json videos = json::array();
  if (is_video_dir(o.in)) {
    write_ppg_csv(o.out, estimate_video(o.in, est, o.fps));
  } else {
    const auto entries = discover_videos(o.in, o.fps);
    parallel_for(entries.size(), o.jobs, [&](std::size_t i) {
      write_ppg_csv(o.out / entries[i].video_id / kSignalFile,
                    estimate_video(entries[i].dir, est, o.fps));
    });
    for (const auto& e : entries) videos.push_back(e.video_id);
  }
  ArgList a("estimate");
  a.path("--in", o.in).add("--method", o.method).path("--out", o.out);
  if (o.fps) a.add("--fps", *o.fps);
  a.add("--jobs", o.jobs);
  const fs::path rj = is_video_dir(o.in) ? run_json_beside(o.out) : o.out / "run.json";
  write_run_json(rj, a, "--out", {{"estimator", o.method}, {"videos", videos}});
}

// ---------------------------------------------------------------- hr

void cmd_hr(const fs::path& signal, std::optional<double> fs_hz, const std::string& band,
            std::ostream& out, std::ostream& err) {
  const auto [lo, hi] = parse_band(band);
  PpgTrace s = load_ppg_csv(signal);
  if (fs_hz) s = PpgTrace(s.values(), *fs_hz, s.t0());
  const auto est = estimate_hr(s, lo, hi);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", est.bpm);
  out << buf << '\n';
  if (est.low_confidence) err << "warning: low-confidence spectral peak\n";
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
  fs::path pred_root;
  fs::path gt_root;
  fs::path report;
  std::size_t window = kWindowFrames;
  std::size_t stride = kWindowStride;
  std::string band = "0.7:4.0";
};

void cmd_evaluate(const EvaluateOpts& o) {
  const auto [lo, hi] = parse_band(o.band);
  if (o.stride == 0) throw Error(ErrorCode::Usage, "--stride must be positive");
  std::vector<std::pair<std::string, fs::path>> preds;  // id, signal file
  if (fs::exists(o.pred_root / kSignalFile)) {
    preds.emplace_back(fs::absolute(o.pred_root).lexically_normal().filename().string(),
                       o.pred_root / kSignalFile);
  } else {
    if (!fs::is_directory(o.pred_root)) {
      throw Error(ErrorCode::MissingDir, "directory " + o.pred_root.string() + " does not exist");
    }
    for (const auto& d : fs::directory_iterator(o.pred_root)) {
      if (d.is_directory() && fs::exists(d.path() / kSignalFile)) {
        preds.emplace_back(d.path().filename().string(), d.path() / kSignalFile);
      }
    }
    std::sort(preds.begin(), preds.end());
  }
  if (preds.empty()) throw Error(ErrorCode::EmptyInput, "no signal.csv under " + o.pred_root.string());

  std::vector<VideoHr> rows;
  for (const auto& [id, file] : preds) {
    fs::path gt_file = o.gt_root / id / "ppg.csv";
    if (!fs::exists(gt_file) && preds.size() == 1) gt_file = o.gt_root / "ppg.csv";
    if (!fs::exists(gt_file)) throw Error(ErrorCode::MissingDir, "no ground truth for " + id);
    const PpgTrace pred = load_ppg_csv(file);
    const PpgTrace gt = align_ppg(load_ppg_csv(gt_file), pred.fs(), pred.size());
    VideoHr v;
    v.id = id;
    v.per_window_hr = windowed_hr(pred, o.window, o.stride, lo, hi);
    v.video_hr = mean_value(v.per_window_hr);
    v.gt_hr = mean_value(windowed_hr(gt, o.window, o.stride, lo, hi));
    rows.push_back(std::move(v));
  }
  const HrReport report = make_report(std::move(rows));
  json j = report_json(report);
  j["config"] = {{"window", o.window}, {"stride", o.stride}, {"band_hz", {lo, hi}}};
  write_text(o.report, j.dump(1) + "\n");

  ArgList a("evaluate");
  a.path("--pred-root", o.pred_root).path("--gt-root", o.gt_root).path("--report", o.report);
  a.add("--window", static_cast<std::uint64_t>(o.window));
  a.add("--stride", static_cast<std::uint64_t>(o.stride)).add("--band", o.band);
  write_run_json(run_json_beside(o.report), a, "--report", j["config"]);
}

// ---------------------------------------------------------------- compare

struct CompareOpts {
  CorpusOptions corpus;
  std::vector<std::string> estimators{"chrom", "pos"};
  fs::path report;
};

void cmd_compare(const CompareOpts& o, std::ostream& out) {
  CorpusOptions c = o.corpus;
  c.estimators.clear();
  for (const auto& e : o.estimators) c.estimators.push_back(parse_estimator(e));
  const auto results = run_corpus_comparison(c);

  json rows = json::array();
  std::map<std::string, std::map<std::string, double>> mae;  // estimator -> method -> mae
  char line[128];
  for (const auto& r : results) {
    json row = report_json(r.report);
    row["method"] = r.method;
    row["estimator"] = std::string(estimator_name(r.estimator));
    rows.push_back(row);
    mae[std::string(estimator_name(r.estimator))][r.method] = r.report.mae;
    std::snprintf(line, sizeof line, "%-10s %-6s mae=%8.3f rmse=%8.3f\n", r.method.c_str(),
                  std::string(estimator_name(r.estimator)).c_str(), r.report.mae, r.report.rmse);
    out << line;
  }
  json ordering = json::object();
  const std::vector<std::string> rivals{"noise", "bdct", "le", "instahide"};
  for (const auto& [est, by_method] : mae) {
    const auto ours = by_method.find("roi+sh+b");
    if (ours == by_method.end()) continue;
    json o_est = {{"roi+sh+b", ours->second}};
    bool holds = true;
    bool complete = true;
    for (const auto& m : rivals) {
      const auto it = by_method.find(m);
      if (it == by_method.end()) {
        complete = false;
        continue;
      }
      o_est[m] = it->second;
      holds = holds && ours->second < it->second;
    }
    o_est["holds"] = complete && holds;
    ordering[est] = o_est;
  }
  json corpus = {{"hrs", c.hrs},
                 {"fps", c.fps},
                 {"frames", c.frames},
                 {"noise_sigma", c.noise_sigma},
                 {"seed", std::to_string(c.seed)},
                 {"master_seed", std::to_string(c.master_seed)},
                 {"key_policy", "unbounded"},
                 {"blur_k", c.blur_k},
                 {"methods", c.methods},
                 {"estimators", o.estimators}};
  json report = {{"corpus", corpus},
                 {"results", rows},
                 {"ordering", ordering},
                 {"notes",
                  {"whole-clip HR per video; ground truth is the HR of the synthetic PPG trace",
                   "instahide output is real-valued and mapped back to intensities before "
                   "estimation",
                   "instahide partner of video i is video i+1 (cyclic)"}}};
  write_text(o.report, report.dump(1) + "\n");

  ArgList a("compare");
  std::string hrs;
  for (double h : c.hrs) hrs += (hrs.empty() ? "" : ",") + fmt(h);
  std::string methods;
  for (const auto& m : c.methods) methods += (methods.empty() ? "" : ",") + m;
  std::string ests;
  for (const auto& e : o.estimators) ests += (ests.empty() ? "" : ",") + e;
  a.add("--hrs", hrs).add("--fps", c.fps).add("--frames", static_cast<std::uint64_t>(c.frames));
  a.add("--noise", c.noise_sigma).add("--seed", c.seed).add("--master-seed", c.master_seed);
  a.add("--methods", methods).add("--estimators", ests).add("--blur-k", c.blur_k);
  a.add("--jobs", c.jobs).path("--report", o.report);
  write_run_json(run_json_beside(o.report), a, "--report", corpus);
}

// ---------------------------------------------------------------- keyspace

void cmd_keyspace(std::optional<std::size_t> n, std::optional<int> patch, std::ostream& out) {
  if (n.has_value() == patch.has_value()) {
    throw Error(ErrorCode::Usage, "keyspace needs exactly one of --n or --patch");
  }
  const std::size_t count = n ? *n : shuffle_domain(*patch);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", log10_keyspace(count));
  out << buf << '\n';
}

// ---------------------------------------------------------------- replay

std::vector<std::string> replay_args(const fs::path& run_file, const std::optional<fs::path>& out,
                                     std::optional<int> jobs) {
  std::ifstream in(run_file);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + run_file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeFailure, run_file.string() + ": " + e.what());
  }
  if (j.value("version", 0) != 1 || !j.contains("args")) {
    throw Error(ErrorCode::DecodeFailure, run_file.string() + " is not a run record");
  }
  auto args = j["args"].get<std::vector<std::string>>();
  if (args.empty() || args.front() == "replay") {
    throw Error(ErrorCode::DecodeFailure, run_file.string() + " has no replayable command");
  }
  auto set_flag = [&](const std::string& flag, const std::string& value) {
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
      if (args[i] == flag) {
        args[i + 1] = value;
        return true;
      }
    }
    return false;
  };
  if (out) {
    const auto flag = j.value("output_flag", std::string("--out"));
    if (!set_flag(flag, abs_path(*out))) {
      throw Error(ErrorCode::DecodeFailure, "run record has no " + flag + " argument");
    }
  }
  if (jobs && !set_flag("--jobs", std::to_string(*jobs))) {
    throw Error(ErrorCode::Usage, "command '" + args.front() + "' does not take --jobs");
  }
  return args;
}

int report_error(std::ostream& err, const std::string& code, int status, const std::string& msg) {
  err << json{{"error", code}, {"exit_code", status}, {"message", msg}}.dump() << '\n';
  return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Privacy-preserving rPPG toolkit"};
  app.require_subcommand(1);

  KeygenOpts kg;
  auto* keygen_cmd = app.add_subcommand("keygen", "Generate a permutation key file");
  keygen_cmd->add_option("--seed", kg.seed, "64-bit key seed")->required();
  keygen_cmd->add_option("--n", kg.n, "Permutation length")->required();
  keygen_cmd->add_option("--out", kg.out, "Output key file")->required();

  SynthCmdOpts sy;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic video directory");
  synth_cmd->add_option("--hr", sy.hr, "Heart rate in bpm")->required();
  synth_cmd->add_option("--fps", sy.fps, "Frame rate")->required();
  synth_cmd->add_option("--frames", sy.frames, "Frame count")->required();
  synth_cmd->add_option("--noise", sy.noise, "Noise sigma in intensity units");
  synth_cmd->add_option("--seed", sy.seed, "Noise seed");
  synth_cmd->add_option("--face-size", sy.face_size,
                        "Render a face of this size with landmarks (0: 64x64 ROI clip)");
  synth_cmd->add_option("--out", sy.out, "Output video directory")->required();

  PerturbOpts pt;
  std::optional<std::string> key_path, mix_with;
  auto* perturb_cmd = app.add_subcommand("perturb", "Apply a privacy perturbation");
  perturb_cmd->add_option("--in", pt.in, "Video directory or dataset root")->required();
  perturb_cmd->add_option("--landmarks", pt.landmarks,
                          "Landmark JSONL for a single video, or 'auto'");
  perturb_cmd->add_option("--method", pt.method,
                          "roi|roi+sh|roi+sh+b|patch:P|noise|bdct|le|instahide")->required();
  auto* key_opt = perturb_cmd->add_option("--key", key_path, "Key file used for every sample");
  auto* seed_opt = perturb_cmd->add_option("--master-seed", pt.master_seed, "Master seed");
  key_opt->excludes(seed_opt);
  perturb_cmd->add_option("--key-policy", pt.key_policy, "fixed|pool:M|unbounded");
  perturb_cmd->add_option("--blur-k", pt.blur_k, "Gaussian kernel size (odd)");
  perturb_cmd->add_option("--noise-var", pt.noise_variance, "Noise variance in [0,1] units");
  perturb_cmd->add_option("--window", pt.window, "Window length in frames (0: whole video)");
  perturb_cmd->add_option("--stride", pt.stride, "Window stride in frames");
  perturb_cmd->add_option("--mix-with", mix_with, "Video mixed in by instahide");
  perturb_cmd->add_option("--fps", pt.fps, "Frame rate when manifest.json is absent");
  perturb_cmd->add_option("--jobs", pt.jobs, "Parallel videos")->check(CLI::PositiveNumber);
  perturb_cmd->add_option("--out", pt.out, "Output directory")->required();

  EstimateOpts es;
  auto* estimate_cmd = app.add_subcommand("estimate", "Extract a pulse signal");
  estimate_cmd->add_option("--in", es.in, "Video directory or root")->required();
  estimate_cmd->add_option("--method", es.method, "chrom|pos")->required();
  estimate_cmd->add_option("--out", es.out, "signal.csv, or a directory for a root")->required();
  estimate_cmd->add_option("--fps", es.fps, "Frame rate when not recorded");
  estimate_cmd->add_option("--jobs", es.jobs, "Parallel videos")->check(CLI::PositiveNumber);

  std::string hr_signal, hr_band = "0.7:4.0";
  std::optional<double> hr_fs;
  auto* hr_cmd = app.add_subcommand("hr", "Heart rate of a signal CSV");
  hr_cmd->add_option("--signal", hr_signal, "Signal CSV (t_s,value)")->required();
  hr_cmd->add_option("--fs", hr_fs, "Sampling rate (default: from timestamps)");
  hr_cmd->add_option("--band", hr_band, "Search band LO:HI in Hz");

  EvaluateOpts ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predicted signals against PPG");
  evaluate_cmd->add_option("--pred-root", ev.pred_root, "Root of <video>/signal.csv")->required();
  evaluate_cmd->add_option("--gt-root", ev.gt_root, "Root of <video>/ppg.csv")->required();
  evaluate_cmd->add_option("--report", ev.report, "Report JSON")->required();
  evaluate_cmd->add_option("--window", ev.window, "HR window in samples (0: whole signal)");
  evaluate_cmd->add_option("--stride", ev.stride, "HR window stride");
  evaluate_cmd->add_option("--band", ev.band, "Search band LO:HI in Hz");

  CompareOpts cp;
  auto* compare_cmd = app.add_subcommand("compare", "Benchmark every method on a synthetic corpus");
  compare_cmd->add_option("--hrs", cp.corpus.hrs, "Corpus heart rates")->delimiter(',');
  compare_cmd->add_option("--fps", cp.corpus.fps, "Frame rate");
  compare_cmd->add_option("--frames", cp.corpus.frames, "Frames per clip");
  compare_cmd->add_option("--noise", cp.corpus.noise_sigma, "Noise sigma in intensity units");
  compare_cmd->add_option("--seed", cp.corpus.seed, "Corpus seed");
  compare_cmd->add_option("--master-seed", cp.corpus.master_seed, "Key master seed");
  compare_cmd->add_option("--methods", cp.corpus.methods, "Methods to run")->delimiter(',');
  compare_cmd->add_option("--estimators", cp.estimators, "chrom,pos")->delimiter(',');
  compare_cmd->add_option("--blur-k", cp.corpus.blur_k, "Gaussian kernel size");
  compare_cmd->add_option("--jobs", cp.corpus.jobs, "Parallel clips")->check(CLI::PositiveNumber);
  compare_cmd->add_option("--report", cp.report, "Report JSON")->required();

  std::optional<std::size_t> ks_n;
  std::optional<int> ks_patch;
  auto* keyspace_cmd = app.add_subcommand("keyspace", "Print log10 of the key-space size");
  keyspace_cmd->add_option("--n", ks_n, "Number of shuffled units");
  keyspace_cmd->add_option("--patch", ks_patch, "Patch size on a 64x64 ROI");

  std::string rp_run;
  std::optional<std::string> rp_out;
  std::optional<int> rp_jobs;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded run.json");
  replay_cmd->add_option("--run", rp_run, "run.json")->required();
  replay_cmd->add_option("--out", rp_out, "Redirect the output");
  replay_cmd->add_option("--jobs", rp_jobs, "Override the worker count")
      ->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", 2, e.what());
  }

  try {
    if (*keygen_cmd) {
      cmd_keygen(kg);
    } else if (*synth_cmd) {
      cmd_synth(sy);
    } else if (*perturb_cmd) {
      if (key_path) pt.key = *key_path;
      if (mix_with) pt.mix_with = *mix_with;
      cmd_perturb(pt);
    } else if (*estimate_cmd) {
      cmd_estimate(es);
    } else if (*hr_cmd) {
      cmd_hr(hr_signal, hr_fs, hr_band, out, err);
    } else if (*evaluate_cmd) {
      cmd_evaluate(ev);
    } else if (*compare_cmd) {
      cmd_compare(cp, out);
    } else if (*keyspace_cmd) {
      cmd_keyspace(ks_n, ks_patch, out);
    } else if (*replay_cmd) {
      std::optional<fs::path> o;
      if (rp_out) o = *rp_out;
      return run(replay_args(rp_run, o, rp_jobs), out, err);
    }
  } catch (const Error& e) {
    return report_error(err, std::string(error_code_name(e.code())), exit_status(e.code()),
                        e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(err, std::string(error_code_name(ErrorCode::Io)), 3, e.what());
  } catch (const std::exception& e) {
    return report_error(err, "internal", 1, e.what());
  }
  return 0;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace rppg::cli
