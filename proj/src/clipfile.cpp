#include "rppg/clipfile.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

namespace rppg {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little,
              "RPPGCLIP encoding assumes a little-endian host");

constexpr std::size_t kHeaderSize = 8 + 2 + 1 + 4 * 4;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> in, std::size_t& off) {
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

template <typename T>
std::vector<std::uint8_t> encode_typed(const BasicClip<T>& clip, ClipDtype dtype) {
  validate_clip(clip);
  std::vector<std::uint8_t> out(kClipMagic, kClipMagic + 8);
  put(out, kClipVersion);
  put(out, static_cast<std::uint8_t>(dtype));
  put(out, static_cast<std::uint32_t>(clip.size()));
  put(out, static_cast<std::uint32_t>(clip.height()));
  put(out, static_cast<std::uint32_t>(clip.width()));
  put(out, static_cast<std::uint32_t>(kChannels));
  for (const auto& f : clip.frames) {
    const auto d = f.data();
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(d.data());
    out.insert(out.end(), bytes, bytes + d.size_bytes());
  }
  return out;
}

template <typename T>
BasicClip<T> decode_typed(std::span<const std::uint8_t> in, std::size_t off, std::uint32_t t,
                          std::uint32_t h, std::uint32_t w, double fps) {
  BasicClip<T> clip;
  clip.fps = fps;
  const std::size_t per_frame = static_cast<std::size_t>(h) * w * kChannels;
  for (std::uint32_t i = 0; i < t; ++i) {
    std::vector<T> data(per_frame);
    std::memcpy(data.data(), in.data() + off, per_frame * sizeof(T));
    off += per_frame * sizeof(T);
    clip.frames.emplace_back(static_cast<int>(h), static_cast<int>(w), std::move(data));
  }
  return clip;
}

}  // namespace

std::vector<std::uint8_t> encode_clip(const AnyClip& clip) {
  return std::visit(
      [](const auto& c) {
        using T = typename std::decay_t<decltype(c)>::value_type;
        return encode_typed(c, std::is_same_v<T, float> ? ClipDtype::F32 : ClipDtype::U8);
      },
      clip);
}

AnyClip decode_clip(std::span<const std::uint8_t> in, double fps) {
  if (in.size() < kHeaderSize || std::memcmp(in.data(), kClipMagic, 8) != 0) {
    throw Error(ErrorCode::DecodeFailure, "not an RPPGCLIP stream");
  }
  std::size_t off = 8;
  const auto version = get<std::uint16_t>(in, off);
  if (version != kClipVersion) {
    throw Error(ErrorCode::DecodeFailure,
                "unsupported RPPGCLIP version " + std::to_string(version));
  }
  const auto dtype = get<std::uint8_t>(in, off);
  const auto t = get<std::uint32_t>(in, off);
  const auto h = get<std::uint32_t>(in, off);
  const auto w = get<std::uint32_t>(in, off);
  const auto c = get<std::uint32_t>(in, off);
  if (c != kChannels) throw Error(ErrorCode::DecodeFailure, "RPPGCLIP must have 3 channels");
  if (dtype > 1) throw Error(ErrorCode::DecodeFailure, "unknown RPPGCLIP dtype");
  const std::size_t elem = dtype == 0 ? 1 : 4;
  const std::size_t expected =
      kHeaderSize + static_cast<std::size_t>(t) * h * w * c * elem;
  if (in.size() != expected) {
    throw Error(ErrorCode::DecodeFailure, "RPPGCLIP payload is " + std::to_string(in.size()) +
                                              " bytes, expected " + std::to_string(expected));
  }
  if (dtype == 0) return decode_typed<std::uint8_t>(in, off, t, h, w, fps);
  return decode_typed<float>(in, off, t, h, w, fps);
}

void write_clipfile(const std::filesystem::path& path, const AnyClip& clip) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto bytes = encode_clip(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

AnyClip read_clipfile(const std::filesystem::path& path, double fps) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return decode_clip(bytes, fps);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_sidecar(const std::filesystem::path& path, const ClipSidecar& s) {
  json j;
  j["fps"] = s.fps;
  j["key_file"] = s.key_file ? json(*s.key_file) : json(nullptr);
  j["gt_ppg"] = s.gt_ppg;
  j["window_index"] = s.window_index ? json(*s.window_index) : json(nullptr);
  j["start_frame"] = s.start_frame;
  j["method"] = s.method;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(1) << '\n';
}

ClipSidecar read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    const auto j = json::parse(in);
    ClipSidecar s;
    s.fps = j.at("fps").get<double>();
    if (j.contains("key_file") && !j["key_file"].is_null()) s.key_file = j["key_file"].get<std::string>();
    if (j.contains("gt_ppg") && j["gt_ppg"].is_array()) s.gt_ppg = j["gt_ppg"].get<std::vector<double>>();
    if (j.contains("window_index") && !j["window_index"].is_null()) {
      s.window_index = j["window_index"].get<int>();
    }
    s.start_frame = j.value("start_frame", std::size_t{0});
    s.method = j.value("method", std::string{});
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeFailure, path.string() + ": " + e.what());
  }
}

}  // namespace rppg
