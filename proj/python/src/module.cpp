// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splatpack/cloud_io.hpp"
#include "splatpack/codec.hpp"
#include "splatpack/context_model.hpp"
#include "splatpack/error.hpp"
#include "splatpack/fitting.hpp"
#include "splatpack/metrics.hpp"
#include "splatpack/naap.hpp"
#include "splatpack/parallel.hpp"
#include "splatpack/profile.hpp"
#include "splatpack/selftest.hpp"
#include "splatpack/synth.hpp"

namespace py = pybind11;
using namespace splatpack;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const uint8_t> byte_view(const py::bytes& b) {
  const std::string_view s = b;
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

py::bytes to_bytes(const std::vector<uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

Array positions_of(const AnchorCloud& cloud) {
  Array out({cloud.size(), size_t{3}});
  auto r = out.mutable_unchecked<2>();
  for (size_t i = 0; i < cloud.size(); ++i)
    for (int a = 0; a < 3; ++a) r(i, a) = cloud.anchors[i].position[a];
  return out;
}

Array features_of(const AnchorCloud& cloud) {
  Array out({cloud.size(), size_t{cloud.channel_count}});
  auto r = out.mutable_unchecked<2>();
  for (size_t i = 0; i < cloud.size(); ++i)
    for (size_t c = 0; c < cloud.channel_count; ++c) r(i, c) = cloud.anchors[i].feature[c];
  return out;
}

Array scalings_of(const AnchorCloud& cloud) {
  Array out({cloud.size(), size_t{3}});
  auto r = out.mutable_unchecked<2>();
  for (size_t i = 0; i < cloud.size(); ++i)
    for (int a = 0; a < 3; ++a) r(i, a) = cloud.anchors[i].scaling[a];
  return out;
}

Array offsets_of(const AnchorCloud& cloud) {
  Array out({cloud.size(), size_t{cloud.offsets_count}, size_t{3}});
  auto r = out.mutable_unchecked<3>();
  for (size_t i = 0; i < cloud.size(); ++i)
    for (size_t k = 0; k < cloud.offsets_count; ++k)
      for (int a = 0; a < 3; ++a) r(i, k, a) = cloud.anchors[i].offsets[3 * k + a];
  return out;
}

Array opacity_of(const AnchorCloud& cloud) {
  Array out(cloud.size());
  auto r = out.mutable_unchecked<1>();
  for (size_t i = 0; i < cloud.size(); ++i) r(i) = cloud.anchors[i].mean_opacity;
  return out;
}

void require_shape(const Array& a, std::vector<py::ssize_t> shape, const char* name) {
  bool ok = a.ndim() == static_cast<py::ssize_t>(shape.size());
  for (size_t d = 0; ok && d < shape.size(); ++d) ok = shape[d] < 0 || a.shape(d) == shape[d];
  require(ok, ErrorKind::kDimensionMismatch, std::string(name) + " has the wrong shape");
}

AnchorCloud from_arrays(const Array& positions, const Array& features, const Array& scalings, const Array& offsets,
                        const Array& opacity, double base_voxel_size) {
  require_shape(positions, {-1, 3}, "positions");
  const py::ssize_t n = positions.shape(0);
  require_shape(features, {n, -1}, "features");
  require_shape(scalings, {n, 3}, "scalings");
  require_shape(offsets, {n, -1, 3}, "offsets");
  require_shape(opacity, {n}, "opacity");
  AnchorCloud cloud;
  cloud.base_voxel_size = base_voxel_size;
  cloud.channel_count = static_cast<uint32_t>(features.shape(1));
  cloud.offsets_count = static_cast<uint32_t>(offsets.shape(1));
  auto p = positions.unchecked<2>();
  auto f = features.unchecked<2>();
  auto s = scalings.unchecked<2>();
  auto o = offsets.unchecked<3>();
  auto a = opacity.unchecked<1>();
  cloud.anchors.resize(static_cast<size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) {
    Anchor& anchor = cloud.anchors[i];
    for (int d = 0; d < 3; ++d) {
      anchor.position[d] = p(i, d);
      anchor.scaling[d] = s(i, d);
    }
    for (py::ssize_t c = 0; c < f.shape(1); ++c) anchor.feature.push_back(f(i, c));
    for (py::ssize_t k = 0; k < o.shape(1); ++k)
      for (int d = 0; d < 3; ++d) anchor.offsets.push_back(o(i, k, d));
    anchor.mean_opacity = a(i);
  }
  cloud = round_to_storage_precision(std::move(cloud));
  cloud.validate();
  return cloud;
}

ContextModelParams params_for(const AnchorCloud& cloud, const CodecProfile& profile,
                              const std::optional<ContextModelParams>& params, bool fit, uint64_t seed) {
  if (params) return *params;
  ContextModelParams init = initial_params(cloud, profile, seed);
  if (!fit) return init;
  return fit_context_model(cloud, profile, init, FitOptions{profile.fit_iterations, profile.learning_rate}).params;
}

py::dict distortion_dict(const KindDistortion& d) {
  py::dict out;
  out["mse"] = d.mse;
  out["max_abs"] = d.max_abs;
  return out;
}

}  // namespace

PYBIND11_MODULE(_splatpack, m) {
  m.doc() = "Compression codec for anchor-based 3D Gaussian splat scenes";

  static py::exception<Error> error_type(m, "SplatpackError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      inst.attr("kind") = std::string(error_kind_name(e.kind()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<AnchorCloud>(m, "AnchorCloud")
      .def(py::init(&from_arrays), py::arg("positions"), py::arg("features"), py::arg("scalings"),
           py::arg("offsets"), py::arg("opacity"), py::arg("base_voxel_size") = 0.01)
      .def_readonly("base_voxel_size", &AnchorCloud::base_voxel_size)
      .def_readonly("channel_count", &AnchorCloud::channel_count)
      .def_readonly("offsets_count", &AnchorCloud::offsets_count)
      .def_property_readonly("positions", &positions_of)
      .def_property_readonly("features", &features_of)
      .def_property_readonly("scalings", &scalings_of)
      .def_property_readonly("offsets", &offsets_of)
      .def_property_readonly("opacity", &opacity_of)
      .def("__len__", &AnchorCloud::size)
      .def("__eq__", [](const AnchorCloud& a, const AnchorCloud& b) { return a == b; })
      .def("__repr__", [](const AnchorCloud& c) {
        return "<AnchorCloud anchors=" + std::to_string(c.size()) + " channels=" + std::to_string(c.channel_count) +
               " offsets=" + std::to_string(c.offsets_count) + ">";
      });

  py::class_<CodecProfile>(m, "CodecProfile")
      .def(py::init<>())
      .def_static("parse", &CodecProfile::parse, py::arg("json_text"))
      .def_static("load", &CodecProfile::load, py::arg("path"))
      .def("to_json", &CodecProfile::to_json)
      .def("validate", &CodecProfile::validate)
      .def_readwrite("tau", &CodecProfile::tau)
      .def_readwrite("lambda_blend", &CodecProfile::lambda_blend)
      .def_readwrite("gamma", &CodecProfile::gamma)
      .def_readwrite("k", &CodecProfile::k)
      .def_readwrite("radius", &CodecProfile::radius)
      .def_readwrite("voxel_scale", &CodecProfile::voxel_scale)
      .def_readwrite("fit_iterations", &CodecProfile::fit_iterations)
      .def_readwrite("learning_rate", &CodecProfile::learning_rate);

  py::class_<ContextModelParams>(m, "ContextModelParams")
      .def_static("load", &load_params, py::arg("path"))
      .def("save", [](const ContextModelParams& p, const std::string& path) { save_params(p, path); },
           py::arg("path"))
      .def("parameter_count", &ContextModelParams::parameter_count)
      .def("to_bytes", [](const ContextModelParams& p) { return to_bytes(p.serialize()); })
      .def("flatten", &ContextModelParams::flatten);

  py::class_<EncodeResult>(m, "EncodeResult")
      .def_property_readonly("data", [](const EncodeResult& r) { return to_bytes(r.bytes); })
      .def_readonly("reconstruction", &EncodeResult::reconstruction)
      .def_readonly("order", &EncodeResult::order)
      .def_property_readonly("report_json", [](const EncodeResult& r) { return r.report.to_json(); })
      .def_property_readonly("report_text", [](const EncodeResult& r) { return r.report.to_text(); });

  m.def("set_threads", &set_thread_count, py::arg("count"), "Worker threads; 0 selects the hardware count.");

  m.def(
      "generate",
      [](uint32_t count, const std::string& model, uint64_t seed, std::array<double, 3> bbox_min,
         std::array<double, 3> bbox_max, uint32_t channel_count, uint32_t offsets_count,
         std::optional<double> base_voxel_size) {
        SynthSpec spec;
        spec.count = count;
        spec.model = parse_feature_model(model);
        spec.seed = seed;
        spec.bbox_min = bbox_min;
        spec.bbox_max = bbox_max;
        spec.channel_count = channel_count;
        spec.offsets_count = offsets_count;
        spec.base_voxel_size = base_voxel_size;
        return generate(spec);
      },
      py::arg("count"), py::arg("model") = "smooth-field", py::arg("seed") = 0,
      py::arg("bbox_min") = std::array<double, 3>{0.0, 0.0, 0.0},
      py::arg("bbox_max") = std::array<double, 3>{1.0, 1.0, 1.0}, py::arg("channel_count") = kDefaultChannelCount,
      py::arg("offsets_count") = kDefaultOffsetsCount, py::arg("base_voxel_size") = py::none());

  m.def(
      "load_cloud",
      [](const std::string& path) { return load_cloud(path, format_from_extension(path)); }, py::arg("path"));
  m.def(
      "save_cloud",
      [](const AnchorCloud& cloud, const std::string& path) {
        if (format_from_extension(path) == CloudFormat::kCsv) {
          save_cloud_csv(cloud, path);
        } else {
          save_cloud(cloud, path);
        }
      },
      py::arg("cloud"), py::arg("path"));
  m.def(
      "serialize_cloud", [](const AnchorCloud& cloud) { return to_bytes(serialize_cloud(cloud)); }, py::arg("cloud"));
  m.def(
      "parse_cloud", [](const py::bytes& data) { return parse_cloud(byte_view(data)); }, py::arg("data"));

  m.def(
      "prune",
      [](const AnchorCloud& cloud, const CodecProfile& profile) {
        auto [pruned, report] = prune_and_merge(cloud, profile.prune_config());
        py::dict info;
        info["importance"] = report.importance;
        info["smoothed_opacity"] = report.smoothed_opacity;
        info["prune_mask"] = report.prune_mask;
        std::vector<int64_t> target;
        for (uint32_t t : report.merge_target) target.push_back(t == kRemoved ? -1 : int64_t{t});
        info["merge_target"] = target;
        return py::make_tuple(pruned, info);
      },
      py::arg("cloud"), py::arg("profile") = CodecProfile{});

  m.def("initial_params", &initial_params, py::arg("cloud"), py::arg("profile") = CodecProfile{},
        py::arg("seed") = 0);
  m.def(
      "fit",
      [](const AnchorCloud& cloud, const CodecProfile& profile, std::optional<ContextModelParams> init,
         std::optional<uint32_t> iterations, std::optional<double> learning_rate, uint64_t seed) {
        const ContextModelParams start = init ? *init : initial_params(cloud, profile, seed);
        const FitOptions options{iterations.value_or(profile.fit_iterations),
                                 learning_rate.value_or(profile.learning_rate)};
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit_context_model(cloud, profile, start, options);
        }
        return py::make_tuple(r.params, r.trace, r.best_iteration);
      },
      py::arg("cloud"), py::arg("profile") = CodecProfile{}, py::arg("init") = py::none(),
      py::arg("iterations") = py::none(), py::arg("learning_rate") = py::none(), py::arg("seed") = 0);

  m.def(
      "encode",
      [](const AnchorCloud& cloud, const CodecProfile& profile, std::optional<ContextModelParams> params, bool fit,
         uint64_t seed) {
        py::gil_scoped_release release;
        return encode(cloud, params_for(cloud, profile, params, fit, seed), profile);
      },
      py::arg("cloud"), py::arg("profile") = CodecProfile{}, py::arg("params") = py::none(), py::arg("fit") = false,
      py::arg("seed") = 0);
  m.def(
      "decode", [](const py::bytes& data) { return decode(byte_view(data)); }, py::arg("data"));
  m.def(
      "rate_report", [](const py::bytes& data) { return rate_report(byte_view(data)).to_json(); }, py::arg("data"));

  m.def(
      "distortion",
      [](const AnchorCloud& original, const AnchorCloud& decoded) {
        const Distortion d = attribute_distortion(original, decoded);
        py::dict out;
        out["position"] = distortion_dict(d.position);
        out["feature"] = distortion_dict(d.feature);
        out["scaling"] = distortion_dict(d.scaling);
        out["offsets"] = distortion_dict(d.offsets);
        return out;
      },
      py::arg("original"), py::arg("decoded"));
  m.def("neighbor_feature_correlation", &neighbor_feature_correlation, py::arg("cloud"), py::arg("k") = 8);

  m.def(
      "selftest",
      [](uint64_t seed) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& r : run_selftest(seed)) out.emplace_back(r.name, r.passed, r.detail);
        return out;
      },
      py::arg("seed") = 0);
}
