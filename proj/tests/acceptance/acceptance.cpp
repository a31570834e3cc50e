// One line per criterion; exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rfsynth/bench/bench.hpp"
#include "rfsynth/bench/overlap.hpp"
#include "rfsynth/core/hash.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/impair/impair.hpp"
#include "rfsynth/model/model.hpp"
#include "rfsynth/pipeline/pipeline.hpp"
#include "rfsynth/scene/sampler.hpp"
#include "rfsynth/scene/synth.hpp"
#include "rfsynth/spectro/spectro.hpp"

using namespace rfsynth;
using cplx = std::complex<double>;
namespace fs = std::filesystem;

namespace {

constexpr double kFs = 61.44e6;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---- AC1

Outcome ac1() {
  Outcome o;
  if (bench::wnuc_bucket(17, 15) != std::pair<int, int>{16, 30}) o.fail("(17,15) bucket");
  if (bench::wnuc_bucket(17, 10) != std::pair<int, int>{11, 20}) o.fail("(17,10) bucket");
  for (int u = 1; u < 10; ++u)
    if (bench::wnuc_hard_target(u) != u) o.fail("passthrough below 10 at U=" + std::to_string(u));
  if (o.pass) o.detail = "[16,30], [11,20], U<10 passthrough";
  return o;
}

// ---- AC2

Outcome ac2() {
  using L = bench::OverlapLevel;
  const std::pair<double, L> cases[] = {{0.009, L::none},         {0.01, L::slightly},      {0.299, L::slightly},
                                        {0.3, L::considerably},   {0.599, L::considerably}, {0.6, L::almost_fully}};
  Outcome o;
  for (const auto& [r, want] : cases)
    if (bench::quantize_ratio(r) != want)
      o.fail(fmt("r=%g gave ", r) + std::string(bench::to_string(bench::quantize_ratio(r))));
  if (o.pass) o.detail = "6 boundary points";
  return o;
}

// ---- AC3

bench::OverlapType cascade_oracle(const std::vector<int>& counts) {
  // counts indexed neither, time_only, frequency_only, both.
  if (counts[3] > 0) return bench::OverlapType::both;
  if (counts[1] > 0 && counts[2] > 0) return bench::OverlapType::both;
  if (counts[1] > 0) return bench::OverlapType::time_only;
  if (counts[2] > 0) return bench::OverlapType::frequency_only;
  return bench::OverlapType::neither;
}

bench::OverlapType type_of_index(int i) {
  static const bench::OverlapType t[] = {bench::OverlapType::neither, bench::OverlapType::time_only,
                                         bench::OverlapType::frequency_only, bench::OverlapType::both};
  return t[i];
}

Outcome ac3() {
  Outcome o;
  std::size_t checked = 0;
  // n signals have n(n-1)/2 pairs: 1, 3, 6 for n = 2..4.
  for (int pairs : {1, 3, 6}) {
    std::function<void(int, int, std::vector<int>&)> rec = [&](int pos, int min_type, std::vector<int>& counts) {
      if (pos == pairs) {
        std::vector<bench::OverlapType> seq;
        for (int t = 0; t < 4; ++t)
          for (int k = 0; k < counts[t]; ++k) seq.push_back(type_of_index(t));
        // Every ordering of the multiset must agree.
        do {
          ++checked;
          if (bench::global_overlap_label(seq) != cascade_oracle(counts)) o.fail("multiset mismatch");
        } while (std::next_permutation(seq.begin(), seq.end()));
        return;
      }
      for (int t = min_type; t < 4; ++t) {
        ++counts[t];
        rec(pos + 1, t, counts);
        --counts[t];
      }
    };
    std::vector<int> counts(4, 0);
    rec(0, 0, counts);
  }
  // Scene-level check with an independent interval oracle.
  Rng rng(303);
  auto interval = [&] {
    const auto a = rng.uniform_int(0, 6), b = rng.uniform_int(0, 6);
    return a == b ? scene::Interval{double(a), a + 1.0} : scene::Interval{double(std::min(a, b)), double(std::max(a, b))};
  };
  for (int trial = 0; trial < 20000; ++trial) {
    scene::SceneRecord rec;
    const int n = static_cast<int>(rng.uniform_int(2, 4));
    for (int i = 0; i < n; ++i) {
      scene::SignalRecord s;
      s.id = i;
      s.t_interval = interval();
      s.f_interval = interval();
      rec.signals.push_back(s);
    }
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const auto& a = rec.signals[i];
        const auto& b = rec.signals[j];
        const bool t = std::min(a.t_interval.hi, b.t_interval.hi) - std::max(a.t_interval.lo, b.t_interval.lo) > 0;
        const bool f = std::min(a.f_interval.hi, b.f_interval.hi) - std::max(a.f_interval.lo, b.f_interval.lo) > 0;
        ++counts[t && f ? 3 : t ? 1 : f ? 2 : 0];
      }
    ++checked;
    if (bench::global_overlap_label(rec) != cascade_oracle(counts)) o.fail("scene mismatch");
  }
  if (o.pass) o.detail = std::to_string(checked) + " orderings and scenes";
  return o;
}

// ---- AC4

Outcome ac4() {
  Outcome o;
  Rng rng(404);
  const std::vector<std::string> classes = {"bpsk", "qpsk", "8psk", "16qam", "64qam", "2fsk", "ofdm64", "am", "fm"};
  auto draw = [&](int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back(classes[rng.uniform_int(0, 8)]);
    return v;
  };
  int mismatched_lengths = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int nt = static_cast<int>(rng.uniform_int(1, 5));
    const int np = rng.bernoulli(0.8) ? nt : static_cast<int>(rng.uniform_int(0, 6));
    const auto truth = draw(nt);
    auto pred = rng.bernoulli(0.5) ? truth : draw(np);
    if (pred.size() == truth.size())
      for (auto& p : pred)
        if (rng.bernoulli(0.3)) p = classes[rng.uniform_int(0, 8)];
    double want = 0.0;
    if (pred.size() == truth.size()) {
      int hits = 0;
      for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == pred[i];
      want = static_cast<double>(hits) / static_cast<double>(truth.size());
    } else {
      ++mismatched_lengths;
    }
    if (bench::score_wbmc(truth, pred) != want) o.fail("trial " + std::to_string(trial));
  }
  if (mismatched_lengths == 0) o.fail("no length-mismatch cases drawn");
  if (o.pass) o.detail = "10000 pairs, " + std::to_string(mismatched_lengths) + " length mismatches";
  return o;
}

// ---- AC5

Outcome ac5() {
  Outcome o;
  Rng rng(505);
  spectro::StftConfig cfg;
  const int F = cfg.fft_size;
  std::vector<cplx> x(static_cast<std::size_t>(cfg.win_len) * 2);
  int worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double f = rng.uniform(-kFs / 2, kFs / 2);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::polar(1.0, 2 * kPi * f * static_cast<double>(n) / kFs);
    const auto grid = spectro::spectrogram(x, kFs, cfg);
    std::size_t best = 0;
    for (std::size_t r = 1; r < grid.values.rows; ++r)
      if (grid.values(r, 0) > grid.values(best, 0)) best = r;
    const long k = std::lround(f / kFs * F);
    const auto expect = static_cast<long>(spectro::shifted_row(static_cast<std::size_t>(((k % F) + F) % F), F));
    long d = std::labs(static_cast<long>(best) - expect);
    d = std::min(d, F - d);
    worst = std::max(worst, static_cast<int>(d));
    if (d > 1) o.fail(fmt("tone %.1f Hz off by %g bins", f, static_cast<double>(d)));
  }
  double worst_rel = 0.0;
  for (int F2 : {4, 8, 16, 32, 64}) {
    for (auto w : {spectro::Window::rect, spectro::Window::hann, spectro::Window::blackman}) {
      spectro::StftConfig c{F2, F2, F2 / 2, w, false, false, 1e-12};
      std::vector<cplx> y(static_cast<std::size_t>(F2) * 6);
      for (auto& v : y) v = {rng.normal(), rng.normal()};
      const auto s = spectro::stft(y, c);
      const auto win = spectro::make_window(w, F2);
      for (std::size_t t = 0; t < s.cols; ++t) {
        double frame_energy = 0.0, spectrum_energy = 0.0;
        for (int k = 0; k < F2; ++k) {
          cplx naive = 0.0;
          for (int n = 0; n < F2; ++n) {
            const std::size_t abs_n = t * static_cast<std::size_t>(c.hop) + static_cast<std::size_t>(n);
            naive += win[n] * y[abs_n] * std::polar(1.0, -2 * kPi * k * static_cast<double>(abs_n) / F2);
          }
          const auto got = s(static_cast<std::size_t>(k), t);
          worst_rel = std::max(worst_rel, std::abs(got - naive) / std::max(1e-300, std::abs(naive)));
          spectrum_energy += std::norm(got);
        }
        for (int n = 0; n < F2; ++n) frame_energy += std::norm(win[n] * y[t * static_cast<std::size_t>(c.hop) + n]);
        const double rel = std::abs(spectrum_energy / F2 - frame_energy) / frame_energy;
        if (rel > 1e-6) o.fail(fmt("Parseval F=%g rel %g", F2, rel));
      }
    }
  }
  if (worst_rel > 1e-6) o.fail(fmt("naive DFT mismatch %g", worst_rel));
  if (o.pass) o.detail = fmt("1000 tones worst %g bin; naive DFT rel err %.1e", worst, worst_rel);
  return o;
}

// ---- AC6

Outcome ac6() {
  Outcome o;
  model::ModelDims d;
  model::ImageTensor img{518, 518, 1, std::vector<double>(518 * 518, 0.0)};
  const auto p = model::patchify(img, 14);
  if (d.num_patches() != 1369 || p.rows() != 1369) o.fail(fmt("got %g tokens", static_cast<double>(p.rows())));
  if (o.pass) o.detail = "1369 tokens";
  return o;
}

// ---- AC7

Outcome ac7() {
  Outcome o;
  const auto results = model::run_property_suite(7, 100);
  for (const auto& r : results)
    if (!r.passed) o.fail(r.name + ": " + r.detail);
  if (results.empty()) o.fail("no checks ran");
  if (o.pass) o.detail = std::to_string(results.size()) + " property checks over 100 trials";
  return o;
}

// ---- AC8

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string tree_digest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && (e.path().extension() == ".jsonl" || e.path().filename() == "manifest.json"))
      files.push_back(fs::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.string() + ":" + digest(read_file(dir / f)) + "\n";
  return all;
}

double label_chance(const std::vector<std::string>& labels) {
  std::map<std::string, double> freq;
  for (const auto& l : labels) freq[l] += 1.0;
  double s = 0.0;
  for (const auto& [k, v] : freq) s += (v / labels.size()) * (v / labels.size());
  return s;
}

Outcome ac8() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> digests;
  for (const char* name : {"ac8_run_a", "ac8_run_b"}) {
    auto c = pipeline::default_config(pipeline::Scale::desk);
    c.out = (fs::temp_directory_path() / name).string();
    fs::remove_all(c.out);
    pipeline::set_total_scenes(c, 50);
    pipeline::generate(c);
    pipeline::caption(c);
    const auto ins = pipeline::instruct(c);
    const auto b = pipeline::bench(c, true);
    if (!ins.ok) o.fail("offline instructions do not all self-score 1");
    std::map<std::string, bool> tasks_seen;
    for (const auto& [cell, acc] : b.summary["oracle_accuracy"].items()) {
      tasks_seen[cell.substr(0, cell.find('/'))] = true;
      if (acc.get<double>() != 1.0) o.fail("oracle " + cell + " = " + acc.dump());
    }
    if (tasks_seen.size() != 5) o.fail("oracle covered " + std::to_string(tasks_seen.size()) + " tasks");
    digests.push_back(tree_digest(c.out));
    fs::remove_all(c.out);
  }
  if (digests[0] != digests[1]) o.fail("two runs differ");
  const double pipeline_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  // Shuffled-oracle baseline on metadata-only pools of at least 500 items.
  auto c = pipeline::default_config(pipeline::Scale::desk);
  std::string chance_detail;
  for (auto [tname, diff, count] : {std::tuple{std::string("wbod"), bench::Difficulty::easy, 600},
                                    std::tuple{std::string("wtr"), bench::Difficulty::easy, 800}}) {
    const auto task = bench::task_from_string(tname);
    std::vector<bench::SceneEntry> pool;
    for (int i = 0; i < count; ++i) pool.push_back({pipeline::draw_scene(c, tname, i), ""});
    const auto items = bench::build_benchmark(pool, task, diff, 0, c.seed);
    if (items.size() < 500) o.fail(tname + " pool has only " + std::to_string(items.size()) + " items");
    std::vector<std::string> labels;
    for (const auto& it : items) labels.push_back(it.ground_truth.dump());
    const double chance = label_chance(labels);
    const auto rep = bench::score(items, bench::shuffled_predictions(items, derive_seed(c.seed, "shuffled-oracle")));
    const auto* cell = rep.find(task, diff);
    const double acc = cell ? cell->accuracy() : -1.0;
    if (std::abs(acc - chance) > 0.05) o.fail(tname + fmt(" shuffled %.3f vs chance %.3f", acc, chance));
    chance_detail += " " + tname + fmt(" %.3f/%.3f (n=%g)", acc, chance, static_cast<double>(items.size()));
  }
  const double total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (total_s > 300) o.fail(fmt("took %.0f s", total_s));
  if (o.pass) o.detail = fmt("2 x 50-scene runs identical, oracle 100%%, %.1f s;", pipeline_s) + chance_detail;
  return o;
}

// ---- AC9

Outcome ac9() {
  Outcome o;
  const std::size_t n = 12800;
  const double f0 = 4.8e6;  // exactly 1000 cycles over n samples
  std::vector<cplx> tone(n);
  for (std::size_t i = 0; i < n; ++i) tone[i] = std::polar(1.0, 2 * kPi * f0 * static_cast<double>(i) / kFs);

  const auto cfo = impair::with_echoed_params({impair::Kind::CFO, 1.0, 1, {}});
  if (cfo.params.at("cfo_hz") != 1200.0) o.fail("echoed cfo_hz " + std::to_string(cfo.params.at("cfo_hz")));
  const auto shifted = impair::impair(tone, kFs, cfo);
  double max_err = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double dphi = std::arg(shifted[i] * std::conj(shifted[i - 1]) * std::conj(tone[i] * std::conj(tone[i - 1])));
    max_err = std::max(max_err, std::abs(dphi * kFs / (2 * kPi) - 1200.0));
  }
  if (max_err > 1e-3) o.fail(fmt("CFO off by %g Hz", max_err));

  const auto iq = impair::with_echoed_params({impair::Kind::IQ, 1.0, 1, {}});
  const double g_db = iq.params.at("gain_db"), ph = iq.params.at("phase_deg");
  if (g_db != 8.0 || ph != 15.0) o.fail(fmt("echoed IQ %g dB %g deg", g_db, ph));
  const auto y = impair::impair(tone, kFs, iq);
  // Branch model: the Q branch is scaled by g and rotated by phi.
  const cplx q_gain = std::polar(std::pow(10.0, 8.0 / 20.0), 15.0 * kPi / 180.0);
  double branch_err = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    branch_err = std::max(branch_err, std::abs(y[i] - (tone[i].real() + cplx(0, 1) * q_gain * tone[i].imag())));
  if (branch_err > 1e-12) o.fail(fmt("branch model error %g", branch_err));
  auto bin_power = [&](double f) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += y[i] * std::polar(1.0, -2 * kPi * f * static_cast<double>(i) / kFs);
    return std::norm(acc);
  };
  const double image_ratio = bin_power(-f0) / bin_power(f0);
  const double oracle_ratio = std::norm((1.0 - q_gain) / (1.0 + q_gain));
  if (std::abs(image_ratio - oracle_ratio) > 1e-9 * oracle_ratio) o.fail(fmt("image ratio %g vs %g", image_ratio, oracle_ratio));

  Rng rng(909);
  std::vector<cplx> noise(n);
  for (auto& v : noise) v = {rng.normal(), rng.normal()};
  for (auto k : {impair::Kind::IQ, impair::Kind::PA, impair::Kind::CFO, impair::Kind::TDL}) {
    const auto out = impair::impair(noise, kFs, {k, 0.0, 5, {}});
    if (out.size() != n || std::memcmp(out.data(), noise.data(), n * sizeof(cplx)) != 0)
      o.fail(std::string(impair::to_string(k)) + " not identity at lambda 0");
  }
  if (o.pass) o.detail = fmt("CFO err %.1e Hz; image ratio %.6f (oracle %.6f); lambda 0 identity x4", max_err, image_ratio, oracle_ratio);
  return o;
}

// ---- AC10

Outcome ac10() {
  Outcome o;
  auto spec = scene::wbmc_spec();
  spec.min_signals = spec.max_signals = 1;
  spec.snr_min_db = 0.0;
  spec.snr_max_db = 50.0;
  // Wide, long bursts with a noise-only remainder keep the estimator variance small.
  spec.bw_min_frac = 0.08;
  spec.bw_max_frac = 0.12;
  spec.dur_min_frac = 0.4;
  spec.dur_max_frac = 0.6;
  double worst = 0.0, lo = 1e9, hi = -1e9;
  for (int trial = 0; trial < 200; ++trial) {
    const auto rec = scene::sample_scene_config(derive_seed(1010, "snr", trial), spec);
    const auto& s = rec.signals.at(0);
    const auto x = scene::compose_scene(rec, derive_seed(rec.seed, "compose"));
    const auto b0 = static_cast<std::size_t>(std::llround(s.t_interval.lo * rec.fs));
    const auto b1 = std::min(x.size(), static_cast<std::size_t>(std::llround(s.t_interval.hi * rec.fs)));
    // Noise-only region: the longer side outside the burst.
    const bool before = b0 > x.size() - b1;
    const std::span<const cplx> burst(x.data() + b0, b1 - b0);
    const std::span<const cplx> quiet = before ? std::span<const cplx>(x.data(), b0) : std::span<const cplx>(x.data() + b1, x.size() - b1);
    const double pb = scene::inband_power(burst, rec.fs, s.f_interval.lo, s.f_interval.hi);
    const double pn = scene::inband_power(quiet, rec.fs, s.f_interval.lo, s.f_interval.hi);
    const double est = 10 * std::log10(std::max(1e-12, pb - pn) / pn);
    const double err = std::abs(est - s.snr_db);
    worst = std::max(worst, err);
    lo = std::min(lo, s.snr_db);
    hi = std::max(hi, s.snr_db);
    if (err > 1.0) o.fail(fmt("declared %.2f dB measured %.2f dB (%s)", s.snr_db, est) + s.mod_class);
  }
  if (hi - lo < 40.0) o.fail(fmt("SNR range only %.1f..%.1f dB", lo, hi));
  if (o.pass) o.detail = fmt("200 bursts %.1f..%.1f dB, worst error %.3f dB", lo, hi, worst);
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"WNUC bucket and hard-target examples", ac1},
      {"WBOD quantizer boundary points", ac2},
      {"WBOD global label vs exhaustive cascade oracle", ac3},
      {"WBMC scorer vs positionwise oracle", ac4},
      {"STFT tone localization and Parseval vs naive DFT", ac5},
      {"518x518 image at P=14 gives 1369 tokens", ac6},
      {"model-ref properties at toy dims", ac7},
      {"end-to-end 50-scene desk run", ac8},
      {"impairment endpoints and lambda-0 identity", ac9},
      {"SNR calibration over 200 bursts", ac10},
  };
  int failures = 0, idx = 0;
  for (const auto& [name, fn] : criteria) {
    ++idx;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome res;
    try {
      res = fn();
    } catch (const std::exception& e) {
      res.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !res.pass;
    std::printf("[%s] AC%d %s: %s (%.2f s)\n", res.pass ? "PASS" : "FAIL", idx, name, res.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures;
}
