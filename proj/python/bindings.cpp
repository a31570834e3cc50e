#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rfsynth/bench/bench.hpp"
#include "rfsynth/bench/overlap.hpp"
#include "rfsynth/caption/caption.hpp"
#include "rfsynth/core/error.hpp"
#include "rfsynth/impair/impair.hpp"
#include "rfsynth/model/model.hpp"
#include "rfsynth/pipeline/pipeline.hpp"
#include "rfsynth/scene/sampler.hpp"
#include "rfsynth/scene/synth.hpp"
#include "rfsynth/spectro/spectro.hpp"

namespace py = pybind11;
using namespace rfsynth;
using cplx = std::complex<double>;
using json = nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python wrapper parses it.
std::vector<cplx> to_vector(const py::array_t<cplx, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw InputError("expected a 1-D complex array");
  return {a.data(), a.data() + a.size()};
}

py::array_t<cplx> to_array(const std::vector<cplx>& v) { return py::array_t<cplx>(static_cast<py::ssize_t>(v.size()), v.data()); }

template <typename T>
py::array_t<T> matrix_array(const spectro::Matrix<T>& m) {
  py::array_t<T> out({static_cast<py::ssize_t>(m.rows), static_cast<py::ssize_t>(m.cols)});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

spectro::StftConfig stft_config(int fft_size, int win_len, int hop, const std::string& window, bool fft_shift) {
  spectro::StftConfig c;
  c.fft_size = fft_size;
  c.win_len = win_len;
  c.hop = hop;
  c.window = spectro::window_from_string(window);
  c.fft_shift = fft_shift;
  spectro::validate(c);
  return c;
}

pipeline::RunConfig run_config(const std::string& config_json) {
  return pipeline::config_from_json(json::parse(config_json.empty() ? "{}" : config_json));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<RegistryError>(m, "RegistryError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<StageError>(m, "StageError", base.ptr());
  py::register_exception<RejectionError>(m, "RejectionError", base.ptr());

  m.def("sample_scene_json", [](std::uint64_t seed, const std::string& task) {
    return scene::to_json_string(scene::sample_scene_config(seed, scene::spec_for_task(task)));
  }, py::arg("seed"), py::arg("task"));
  m.def("compose_scene", [](const std::string& scene_json, std::uint64_t seed) {
    return to_array(scene::compose_scene(scene::scene_from_json_string(scene_json), seed));
  }, py::arg("scene_json"), py::arg("seed"));

  m.def("stft", [](py::array_t<cplx, py::array::c_style | py::array::forcecast> iq, int fft_size, int win_len, int hop,
                   const std::string& window, bool fft_shift) {
    const auto x = to_vector(iq);
    return matrix_array(spectro::stft(x, stft_config(fft_size, win_len, hop, window, fft_shift)));
  }, py::arg("iq"), py::arg("fft_size") = 512, py::arg("win_len") = 512, py::arg("hop") = 512,
     py::arg("window") = "blackman", py::arg("fft_shift") = true);
  m.def("spectrogram_db", [](py::array_t<cplx, py::array::c_style | py::array::forcecast> iq, double fs) {
    const auto x = to_vector(iq);
    return matrix_array(spectro::spectrogram(x, fs).values);
  }, py::arg("iq"), py::arg("fs") = 61.44e6);
  m.def("render_image", [](py::array_t<double, py::array::c_style | py::array::forcecast> db, int height, int width,
                           int channels, double dynamic_range_db) {
    if (db.ndim() != 2) throw InputError("expected a 2-D dB grid");
    spectro::Matrix<double> g{static_cast<std::size_t>(db.shape(0)), static_cast<std::size_t>(db.shape(1)),
                              std::vector<double>(db.data(), db.data() + db.size())};
    spectro::RenderConfig cfg;
    cfg.height = height;
    cfg.width = width;
    cfg.channels = channels;
    cfg.dynamic_range_db = dynamic_range_db;
    if (channels == 3) cfg.colormap = spectro::Colormap::viridis;
    const auto img = spectro::render_image(g, cfg);
    py::array_t<std::uint8_t> out({img.height, img.width, img.channels});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
  }, py::arg("db"), py::arg("height") = 518, py::arg("width") = 518, py::arg("channels") = 1,
     py::arg("dynamic_range_db") = 80.0);

  m.def("impair", [](py::array_t<cplx, py::array::c_style | py::array::forcecast> iq, const std::string& kind,
                     double lam, std::uint64_t seed, double fs) {
    const auto x = to_vector(iq);
    return to_array(impair::impair(x, fs, {impair::kind_from_string(kind), lam, seed, {}}));
  }, py::arg("iq"), py::arg("kind"), py::arg("lam"), py::arg("seed") = 0, py::arg("fs") = 61.44e6);
  m.def("impairment_params", [](const std::string& kind, double lam) {
    return impair::with_echoed_params({impair::kind_from_string(kind), lam, 0, {}}).params;
  }, py::arg("kind"), py::arg("lam"));

  m.def("wnuc_bucket", &bench::wnuc_bucket, py::arg("users"), py::arg("bucket"));
  m.def("wnuc_hard_target", [](int u) { return bench::wnuc_hard_target(u); }, py::arg("users"));
  m.def("quantize_ratio", [](double r) { return std::string(bench::to_string(bench::quantize_ratio(r))); }, py::arg("r"));
  m.def("score_wbmc", [](const std::vector<std::string>& truth, const std::vector<std::string>& pred) {
    return bench::score_wbmc(truth, pred);
  }, py::arg("truth"), py::arg("pred"));
  m.def("overlap_label", [](const std::string& scene_json) {
    return std::string(bench::to_string(bench::global_overlap_label(scene::scene_from_json_string(scene_json))));
  }, py::arg("scene_json"));

  m.def("caption_json", [](const std::string& scene_json, std::uint64_t seed) {
    const auto rec = scene::scene_from_json_string(scene_json);
    json j;
    caption::to_json(j, caption::build_caption(rec, caption::derive_visual_attrs(rec), caption::LevelSet::all(), seed));
    return j.dump();
  }, py::arg("scene_json"), py::arg("seed") = 0);

  m.def("num_patches", [](int h, int w, int p) {
    model::ModelDims d;
    d.image_h = h;
    d.image_w = w;
    d.patch = p;
    return d.num_patches();
  }, py::arg("height"), py::arg("width"), py::arg("patch"));
  m.def("run_property_suite", [](std::uint64_t seed, int trials) {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (const auto& r : model::run_property_suite(seed, trials)) out.emplace_back(r.name, r.passed, r.detail);
    return out;
  }, py::arg("seed") = 1, py::arg("trials") = 100);

  m.def("run_stage", [](const std::string& stage, const std::string& config_json) {
    const auto c = run_config(config_json);
    py::gil_scoped_release release;
    pipeline::StageResult r;
    if (stage == "generate") r = pipeline::generate(c);
    else if (stage == "caption") r = pipeline::caption(c);
    else if (stage == "instruct") r = pipeline::instruct(c);
    else if (stage == "bench") r = pipeline::bench(c, true);
    else if (stage == "report") r = pipeline::report(c);
    else throw ConfigError("unknown stage '" + stage + "'");
    return std::make_pair(r.ok, r.summary.dump());
  }, py::arg("stage"), py::arg("config_json"));
  m.def("config_hash", [](const std::string& config_json) { return pipeline::config_hash(run_config(config_json)); },
        py::arg("config_json"));
}
