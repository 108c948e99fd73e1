#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>

#include "rppg/clipfile.hpp"
#include "rppg/estimators.hpp"
#include "rppg/eval.hpp"
#include "rppg/perturb.hpp"
#include "rppg/pipeline.hpp"
#include "rppg/synth.hpp"

namespace py = pybind11;
using namespace rppg;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U32Array = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;

py::handle g_error_type;

template <typename T>
BasicFrame<T> frame_from(const py::array_t<T, py::array::c_style | py::array::forcecast>& a,
                         const T* base = nullptr) {
  if (!base && (a.ndim() != 3 || a.shape(2) != 3)) {
    throw Error(ErrorCode::ShapeMismatch, "expected an (H, W, 3) array");
  }
  const auto h = static_cast<int>(a.shape(a.ndim() - 3));
  const auto w = static_cast<int>(a.shape(a.ndim() - 2));
  const T* p = base ? base : a.data();
  return BasicFrame<T>(h, w, std::vector<T>(p, p + std::size_t(h) * w * 3));
}

template <typename T>
BasicClip<T> clip_from(const py::array_t<T, py::array::c_style | py::array::forcecast>& a,
                       double fps) {
  if (a.ndim() != 4 || a.shape(3) != 3) {
    throw Error(ErrorCode::ShapeMismatch, "expected a (T, H, W, 3) array");
  }
  BasicClip<T> c;
  c.fps = fps;
  const std::size_t stride = std::size_t(a.shape(1)) * a.shape(2) * 3;
  for (py::ssize_t t = 0; t < a.shape(0); ++t) {
    c.frames.push_back(frame_from<T>(a, a.data() + t * stride));
  }
  return c;
}

template <typename T>
py::array_t<T> to_array(const BasicFrame<T>& f) {
  py::array_t<T> out({f.height(), f.width(), 3});
  std::memcpy(out.mutable_data(), f.data().data(), f.data().size() * sizeof(T));
  return out;
}

template <typename T>
py::array_t<T> to_array(const BasicClip<T>& c) {
  py::array_t<T> out({py::ssize_t(c.size()), py::ssize_t(c.height()), py::ssize_t(c.width()),
                      py::ssize_t(3)});
  T* dst = out.mutable_data();
  for (const auto& f : c.frames) {
    std::memcpy(dst, f.data().data(), f.data().size() * sizeof(T));
    dst += f.data().size();
  }
  return out;
}

py::object to_array(const AnyClip& c) {
  return std::visit([](const auto& clip) -> py::object { return to_array(clip); }, c);
}

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(py::ssize_t(v.size()), v.data());
}

std::span<const double> view(const F64Array& a) {
  return {a.data(), std::size_t(a.size())};
}

PermutationKey key_from(const U32Array& perm) {
  return PermutationKey(std::vector<std::uint32_t>(perm.data(), perm.data() + perm.size()));
}

py::array_t<std::uint32_t> perm_array(const PermutationKey& k) {
  return py::array_t<std::uint32_t>(py::ssize_t(k.n()), k.perm().data());
}

AnyClip any_from(const py::array& a, double fps) {
  if (a.dtype().is(py::dtype::of<std::uint8_t>())) return clip_from<std::uint8_t>(U8Array::ensure(a), fps);
  return clip_from<float>(F32Array::ensure(a), fps);
}

Estimator estimator_from(const std::string& name) { return parse_estimator(name); }

py::dict hr_dict(const HrEstimate& e) {
  py::dict d;
  d["bpm"] = e.bpm;
  d["peak_hz"] = e.peak_hz;
  d["low_confidence"] = e.low_confidence;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rppg, m) {
  m.doc() = "Privacy-preserving rPPG: keyed shuffle, blur, CHROM/POS and HR evaluation";

  static py::exception<Error> error_type(m, "RppgError", PyExc_RuntimeError);
  g_error_type = error_type;
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(g_error_type)(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      exc.attr("exit_status") = exit_status(e.code());
      PyErr_SetObject(g_error_type.ptr(), exc.ptr());
    }
  });

  m.def("keygen", [](std::uint64_t seed, std::size_t n) { return perm_array(keygen(seed, n)); },
        py::arg("seed"), py::arg("n") = std::size_t(kRoiSize * kRoiSize));
  m.def("inverse_key", [](const U32Array& perm) { return perm_array(key_from(perm).inverse()); });
  m.def("shuffle_domain", &shuffle_domain, py::arg("patch") = 1);
  m.def("log10_keyspace", &log10_keyspace);

  m.def("shuffle_pixels", [](const U8Array& f, const U32Array& perm) {
    return to_array(shuffle_pixels(frame_from<std::uint8_t>(f), key_from(perm)));
  });
  m.def("unshuffle_pixels", [](const U8Array& f, const U32Array& perm) {
    return to_array(unshuffle_pixels(frame_from<std::uint8_t>(f), key_from(perm)));
  });
  m.def("shuffle_patches", [](const U8Array& f, int patch, const U32Array& perm) {
    return to_array(shuffle_patches(frame_from<std::uint8_t>(f), patch, key_from(perm)));
  });
  m.def("unshuffle_patches", [](const U8Array& f, int patch, const U32Array& perm) {
    return to_array(unshuffle_patches(frame_from<std::uint8_t>(f), patch, key_from(perm)));
  });
  m.def("gaussian_kernel", [](int k) { return to_array(gaussian_kernel(k)); });
  m.def("gaussian_blur", [](const U8Array& f, int k) {
    return to_array(gaussian_blur(frame_from<std::uint8_t>(f), k));
  }, py::arg("frame"), py::arg("k") = 3);

  m.def(
      "perturb",
      [](const U8Array& clip, const std::string& method, double fps, std::uint64_t sample_index,
         std::uint64_t master_seed, std::optional<U32Array> key, std::optional<U8Array> partner) {
        const auto spec_clip = clip_from<std::uint8_t>(clip, fps);
        auto spec = parse_method(method);
        spec.key_policy.master_seed = master_seed;
        std::optional<Clip> other;
        if (partner) other = clip_from<std::uint8_t>(*partner, fps);
        std::optional<PermutationKey> k;
        if (key) k = key_from(*key);
        const auto out = apply_method(spec_clip, spec, sample_index, other ? &*other : nullptr, k);
        return to_array(out.clip);
      },
      py::arg("clip"), py::arg("method") = "roi+sh+b", py::arg("fps") = 30.0,
      py::arg("sample_index") = 0, py::arg("master_seed") = 0, py::arg("key") = py::none(),
      py::arg("partner") = py::none());

  m.def("mean_traces", [](const py::array& clip, double fps) {
    const auto t = std::visit([](const auto& c) { return mean_traces(c); }, any_from(clip, fps));
    return py::make_tuple(to_array(t.r), to_array(t.g), to_array(t.b));
  }, py::arg("clip"), py::arg("fps") = 30.0);
  m.def("estimate_signal", [](const py::array& clip, const std::string& estimator, double fps) {
    return to_array(estimate_any(estimator_from(estimator), any_from(clip, fps)).values());
  }, py::arg("clip"), py::arg("estimator") = "pos", py::arg("fps") = 30.0);
  m.def("chrom", [](const py::array& clip, double fps) {
    return to_array(estimate_any(Estimator::Chrom, any_from(clip, fps)).values());
  }, py::arg("clip"), py::arg("fps") = 30.0);
  m.def("pos", [](const py::array& clip, double fps) {
    return to_array(estimate_any(Estimator::Pos, any_from(clip, fps)).values());
  }, py::arg("clip"), py::arg("fps") = 30.0);
  m.def("bandpass", [](const F64Array& x, double fs, double lo, double hi) {
    return to_array(bandpass(PpgTrace({x.data(), x.data() + x.size()}, fs), lo, hi).values());
  }, py::arg("signal"), py::arg("fs"), py::arg("lo_hz") = kBandLoHz, py::arg("hi_hz") = kBandHiHz);

  m.def("welch_psd", [](const F64Array& x, double fs) {
    const auto s = welch_psd(PpgTrace({x.data(), x.data() + x.size()}, fs));
    return py::make_tuple(to_array(s.freqs), to_array(s.power));
  }, py::arg("signal"), py::arg("fs"));
  m.def("estimate_hr", [](const F64Array& x, double fs, double lo, double hi) {
    return hr_dict(estimate_hr(PpgTrace({x.data(), x.data() + x.size()}, fs), lo, hi));
  }, py::arg("signal"), py::arg("fs"), py::arg("lo_hz") = 0.7, py::arg("hi_hz") = 4.0);
  m.def("hr_metrics", [](const F64Array& pred, const F64Array& gt) {
    const auto r = hr_metrics(view(pred), view(gt));
    py::dict d;
    d["mae"] = r.mae;
    d["rmse"] = r.rmse;
    d["pearson_r"] = r.pearson_r ? py::object(py::float_(*r.pearson_r)) : py::object(py::none());
    return d;
  });
  m.def("smooth_l1", [](const F64Array& p, const F64Array& g, double beta) {
    return smooth_l1(view(p), view(g), beta);
  }, py::arg("pred"), py::arg("gt"), py::arg("beta") = kSmoothL1Beta);
  m.def("smooth_l1_grad", [](const F64Array& p, const F64Array& g, double beta) {
    return to_array(smooth_l1_grad(view(p), view(g), beta));
  }, py::arg("pred"), py::arg("gt"), py::arg("beta") = kSmoothL1Beta);

  m.def(
      "synthesize_clip",
      [](double hr, double fps, std::size_t frames, double noise_sigma, std::uint64_t seed,
         int size) {
        SynthOptions o;
        o.hr_bpm = hr;
        o.fps = fps;
        o.frames = frames;
        o.noise_sigma = noise_sigma;
        o.seed = seed;
        o.size = size;
        const auto sc = synthesize_clip(o);
        return py::make_tuple(to_array(sc.clip), to_array(sc.ppg.values()));
      },
      py::arg("hr_bpm") = 72.0, py::arg("fps") = 30.0, py::arg("frames") = 300,
      py::arg("noise_sigma") = 0.0, py::arg("seed") = 0, py::arg("size") = kRoiSize);

  m.def("write_clipfile", [](const std::string& path, const py::array& clip) {
    write_clipfile(path, any_from(clip, 1.0));
  });
  m.def("read_clipfile", [](const std::string& path) {
    return to_array(read_clipfile(path, 1.0));
  });
}
