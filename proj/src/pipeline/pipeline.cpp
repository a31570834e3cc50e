#include "rfsynth/pipeline/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "rfsynth/caption/caption.hpp"
#include "rfsynth/core/error.hpp"
#include "rfsynth/core/hash.hpp"
#include "rfsynth/core/parallel.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/scene/iq_file.hpp"
#include "rfsynth/scene/sampler.hpp"
#include "rfsynth/scene/synth.hpp"

namespace rfsynth::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kVersion = "0.1.0";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << body;
  if (!out) throw IoError("cannot write '" + p.string() + "'");
}

void update_manifest(const RunConfig& c, const std::string& stage, const json& entry) {
  const auto path = fs::path(c.out) / "manifest.json";
  json m = fs::exists(path) ? json::parse(read_file(path)) : json::object();
  m["tool"] = "rfsynth";
  m["version"] = kVersion;
  m["seed"] = c.seed;
  m["config_hash"] = config_hash(c);
  m["stages"][stage] = entry;
  write_file(path, m.dump(2) + "\n");
}

void require_stage(const RunConfig& c, const std::string& stage, const std::string& by) {
  const auto m = read_manifest(c.out);
  if (!m.contains("stages") || !m["stages"].contains(stage))
    throw StageError("stage '" + by + "' needs the '" + stage + "' stage to have run in '" + c.out + "'");
}

json stft_json(const spectro::StftConfig& s) {
  return {{"fft_size", s.fft_size}, {"win_len", s.win_len}, {"hop", s.hop},
          {"window", spectro::to_string(s.window)}, {"centered", s.centered}, {"fft_shift", s.fft_shift},
          {"epsilon", s.epsilon}};
}

json render_json(const spectro::RenderConfig& r) {
  return {{"height", r.height}, {"width", r.width}, {"channels", r.channels},
          {"dynamic_range_db", r.dynamic_range_db}, {"colormap", spectro::to_string(r.colormap)}};
}

std::pair<std::size_t, bool> cell_quota(const RunConfig& c, bench::Task t) {
  if (c.bench.all_available) return {0, false};
  switch (t) {
    case bench::Task::WBMC: return {c.bench.wbmc, false};
    case bench::Task::WBOD: return {c.bench.wbod, false};
    case bench::Task::WTR: return {c.bench.wtr_per_class, true};
    case bench::Task::WNUC: return {c.bench.wnuc_per_standard, true};
    case bench::Task::NRIE: return {c.bench.nrie_per_link, true};
  }
  return {0, false};
}

}  // namespace

std::string_view to_string(Scale s) { return s == Scale::paper ? "paper" : "desk"; }

Scale scale_from_string(std::string_view s) {
  if (s == "desk") return Scale::desk;
  if (s == "paper") return Scale::paper;
  throw ConfigError("scale must be desk or paper, got '" + std::string(s) + "'");
}

RunConfig default_config(Scale scale) {
  RunConfig c;
  c.scale = scale;
  if (scale == Scale::paper) {
    c.scenes = {{"wbmc", 2000}, {"wbod", 2000}, {"wtr", 8000}, {"wnuc", 2000}, {"nrie", 2000}};
    c.bench = {2000, 2000, 1000, 1000, 1000, false};
  } else {
    c.scenes = {{"wbmc", 100}, {"wbod", 100}, {"wtr", 400}, {"wnuc", 100}, {"nrie", 100}};
    c.bench = {100, 100, 50, 50, 50, false};
  }
  return c;
}

void to_json(json& j, const RunConfig& c) {
  json kinds = json::array();
  for (auto k : c.impairments.kinds) kinds.push_back(impair::to_string(k));
  j = {{"seed", c.seed},
       {"scale", to_string(c.scale)},
       {"out", c.out},
       {"scenes", c.scenes},
       {"stft", stft_json(c.stft)},
       {"render", render_json(c.render)},
       {"impairments", {{"prob", c.impairments.prob}, {"lambda_max", c.impairments.lambda_max}, {"kinds", kinds}}},
       {"client", {{"base_url", c.client.base_url}, {"model", c.client.model}, {"timeout_s", c.client.timeout_s},
                   {"retries", c.client.retries}, {"max_in_flight", c.client.max_in_flight}}},
       {"offline", c.offline},
       {"instructions_per_scene", c.instructions_per_scene},
       {"bench", {{"wbmc", c.bench.wbmc}, {"wbod", c.bench.wbod}, {"wtr_per_class", c.bench.wtr_per_class},
                  {"wnuc_per_standard", c.bench.wnuc_per_standard}, {"nrie_per_link", c.bench.nrie_per_link},
                  {"all_available", c.bench.all_available}}},
       {"bench_options", {{"wbmc_easy", c.bench_options.wbmc_easy == bench::WbmcEasyMode::set ? "set" : "ordered"},
                          {"wnuc_tie", c.bench_options.wnuc_tie == bench::TieRule::half_to_even ? "half_to_even" : "half_away_from_zero"},
                          {"distractors_per_class", c.bench_options.distractors_per_class}}},
       {"jobs", c.jobs},
       {"tasks", c.tasks}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c = default_config(scale_from_string(j.value("scale", "desk")));
  c.seed = j.value("seed", c.seed);
  c.out = j.value("out", c.out);
  if (j.contains("scenes")) c.scenes = j["scenes"].get<std::map<std::string, int>>();
  if (j.contains("stft")) {
    const auto& s = j["stft"];
    c.stft.fft_size = s.value("fft_size", c.stft.fft_size);
    c.stft.win_len = s.value("win_len", c.stft.win_len);
    c.stft.hop = s.value("hop", c.stft.hop);
    if (s.contains("window")) c.stft.window = spectro::window_from_string(s["window"].get<std::string>());
    c.stft.centered = s.value("centered", c.stft.centered);
    c.stft.fft_shift = s.value("fft_shift", c.stft.fft_shift);
    c.stft.epsilon = s.value("epsilon", c.stft.epsilon);
  }
  spectro::validate(c.stft);
  if (j.contains("render")) {
    const auto& r = j["render"];
    c.render.height = r.value("height", c.render.height);
    c.render.width = r.value("width", c.render.width);
    c.render.channels = r.value("channels", c.render.channels);
    c.render.dynamic_range_db = r.value("dynamic_range_db", c.render.dynamic_range_db);
    if (r.contains("colormap")) c.render.colormap = spectro::colormap_from_string(r["colormap"].get<std::string>());
  }
  if (j.contains("impairments")) {
    const auto& i = j["impairments"];
    c.impairments.prob = i.value("prob", c.impairments.prob);
    c.impairments.lambda_max = i.value("lambda_max", c.impairments.lambda_max);
    if (i.contains("kinds")) {
      c.impairments.kinds.clear();
      for (const auto& k : i["kinds"]) c.impairments.kinds.push_back(impair::kind_from_string(k.get<std::string>()));
    }
    if (c.impairments.prob < 0 || c.impairments.prob > 1 || c.impairments.lambda_max < 0 || c.impairments.lambda_max > 1)
      throw ConfigError("impairment prob and lambda_max must lie in [0, 1]");
  }
  if (j.contains("client")) {
    const auto& k = j["client"];
    c.client.base_url = k.value("base_url", c.client.base_url);
    c.client.model = k.value("model", c.client.model);
    c.client.timeout_s = k.value("timeout_s", c.client.timeout_s);
    c.client.retries = k.value("retries", c.client.retries);
    c.client.max_in_flight = k.value("max_in_flight", c.client.max_in_flight);
  }
  c.offline = j.value("offline", c.offline);
  c.instructions_per_scene = j.value("instructions_per_scene", c.instructions_per_scene);
  if (j.contains("bench")) {
    const auto& b = j["bench"];
    c.bench.wbmc = b.value("wbmc", c.bench.wbmc);
    c.bench.wbod = b.value("wbod", c.bench.wbod);
    c.bench.wtr_per_class = b.value("wtr_per_class", c.bench.wtr_per_class);
    c.bench.wnuc_per_standard = b.value("wnuc_per_standard", c.bench.wnuc_per_standard);
    c.bench.nrie_per_link = b.value("nrie_per_link", c.bench.nrie_per_link);
    c.bench.all_available = b.value("all_available", c.bench.all_available);
  }
  if (j.contains("bench_options")) {
    const auto& b = j["bench_options"];
    const auto mode = b.value("wbmc_easy", std::string("ordered"));
    if (mode != "ordered" && mode != "set") throw ConfigError("wbmc_easy must be ordered or set");
    c.bench_options.wbmc_easy = mode == "set" ? bench::WbmcEasyMode::set : bench::WbmcEasyMode::ordered;
    const auto tie = b.value("wnuc_tie", std::string("half_away_from_zero"));
    if (tie != "half_away_from_zero" && tie != "half_to_even") throw ConfigError("wnuc_tie must be half_away_from_zero or half_to_even");
    c.bench_options.wnuc_tie = tie == "half_to_even" ? bench::TieRule::half_to_even : bench::TieRule::half_away_from_zero;
    c.bench_options.distractors_per_class = b.value("distractors_per_class", c.bench_options.distractors_per_class);
  }
  c.jobs = j.value("jobs", c.jobs);
  if (j.contains("tasks")) c.tasks = j["tasks"].get<std::vector<std::string>>();
  for (const auto& t : c.tasks)
    if (std::find(kTaskNames.begin(), kTaskNames.end(), t) == kTaskNames.end())
      throw ConfigError("unknown task '" + t + "'");
  return c;
}

RunConfig load_config(const std::string& path) {
  auto text = read_file(path);
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config '" + path + "' is not a JSON object");
  return config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
  json j = c;
  j.erase("out");
  j.erase("jobs");
  j["client"].erase("timeout_s");
  j["client"].erase("max_in_flight");
  return digest(j.dump());
}

void set_total_scenes(RunConfig& c, int total) {
  if (total < 0) throw ConfigError("scene count must be non-negative");
  c.scenes.clear();
  const int n = static_cast<int>(c.tasks.size());
  for (int i = 0; i < n; ++i) c.scenes[c.tasks[static_cast<std::size_t>(i)]] = total / n + (i < total % n ? 1 : 0);
  c.bench.all_available = true;
}

scene::SceneRecord draw_scene(const RunConfig& c, const std::string& task, int index) {
  const auto seed = derive_seed(c.seed, "scene-" + task, static_cast<std::uint64_t>(index));
  auto spec = scene::spec_for_task(task);
  Rng rng(derive_seed(seed, "impairment-schedule"));
  if (!c.impairments.kinds.empty() && rng.bernoulli(c.impairments.prob)) {
    impair::ImpairmentSpec imp;
    imp.kind = c.impairments.kinds[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(c.impairments.kinds.size()) - 1))];
    imp.lambda = rng.uniform(0.0, c.impairments.lambda_max);
    imp.seed = derive_seed(seed, "impairment");
    spec.impairments.push_back(imp);
  }
  return scene::sample_scene_config(seed, spec);
}

std::vector<LoadedScene> load_scenes(const std::string& out) {
  const auto index = fs::path(out) / "scenes" / "index.json";
  if (!fs::exists(index)) throw StageError("no generated scenes in '" + out + "'; run generate first");
  const auto j = json::parse(read_file(index));
  std::vector<LoadedScene> scenes;
  for (const auto& e : j.at("scenes"))
    scenes.push_back({scene::load_scene((fs::path(out) / e.at("meta").get<std::string>()).string()),
                      e.at("image").get<std::string>()});
  return scenes;
}

json read_manifest(const std::string& out) {
  const auto path = fs::path(out) / "manifest.json";
  if (!fs::exists(path)) return json::object();
  return json::parse(read_file(path));
}

std::string manifest_hash(const std::string& out) { return digest(read_file(fs::path(out) / "manifest.json")); }

StageResult generate(const RunConfig& c) {
  spectro::validate(c.stft);
  struct Job {
    std::string task;
    int index;
  };
  std::vector<Job> jobs;
  for (const auto& t : c.tasks) {
    auto it = c.scenes.find(t);
    for (int i = 0; it != c.scenes.end() && i < it->second; ++i) jobs.push_back({t, i});
  }
  const fs::path root(c.out);
  for (auto sub : {"scenes", "iq", "images"}) fs::create_directories(root / sub);
  std::vector<json> entries(jobs.size());
  std::vector<std::string> hashes(jobs.size());
  std::vector<int> rejections(jobs.size());
  parallel_for(jobs.size(), c.jobs, [&](std::size_t k) {
    const auto& job = jobs[k];
    scene::SceneRecord rec;
    try {
      rec = draw_scene(c, job.task, job.index);
    } catch (const Error& e) {
      throw StageError("generate: " + job.task + " scene " + std::to_string(job.index) + ": " + e.what());
    }
    const std::string iq_rel = "iq/" + rec.scene_id + ".rfiq";
    const std::string png_rel = "images/" + rec.scene_id + ".png";
    const std::string meta_rel = "scenes/" + rec.scene_id + ".json";
    auto full = rec;
    full.iq_path = (root / iq_rel).string();
    const auto iq = scene::compose_scene(full, derive_seed(rec.seed, "compose"));
    rec.iq_path = iq_rel;
    const auto grid = spectro::spectrogram(iq, rec.fs, c.stft);
    spectro::write_png(spectro::render_image(grid.values, c.render), (root / png_rel).string());
    scene::save_scene(rec, (root / meta_rel).string());
    entries[k] = {{"scene_id", rec.scene_id}, {"task", job.task}, {"meta", meta_rel}, {"image", png_rel}, {"iq", iq_rel},
                  {"train_eligible", impair::train_eligible(rec.impairments)}};
    hashes[k] = digest(read_file(root / meta_rel)) + digest(read_file(root / png_rel)) + digest(read_file(root / iq_rel));
    rejections[k] = rec.rejections;
  });
  write_file(root / "scenes" / "index.json", json{{"scenes", entries}}.dump(1) + "\n");
  std::string all;
  for (const auto& h : hashes) all += h;
  std::map<std::string, int> per_task;
  for (const auto& j : jobs) ++per_task[j.task];
  double mean_rej = 0.0;
  for (int r : rejections) mean_rej += r;
  if (!jobs.empty()) mean_rej /= static_cast<double>(jobs.size());
  json entry = {{"scenes", jobs.size()},          {"per_task", per_task},
                {"content_hash", digest(all)},    {"mean_rejections", mean_rej},
                {"stft_hash", spectro::config_hash(c.stft)}, {"config_hash", config_hash(c)}};
  update_manifest(c, "generate", entry);
  return {"generate", entry, true};
}

StageResult caption(const RunConfig& c) {
  require_stage(c, "generate", "caption");
  const auto scenes = load_scenes(c.out);
  std::vector<caption::CaptionRecord> caps(scenes.size());
  const auto seed = derive_seed(c.seed, "caption");
  parallel_for(scenes.size(), c.jobs, [&](std::size_t i) {
    const auto& rec = scenes[i].rec;
    caps[i] = caption::build_caption(rec, caption::derive_visual_attrs(rec), caption::LevelSet::all(), seed);
  });
  const auto dir = (fs::path(c.out) / "captions").string();
  fs::create_directories(dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind("captions-", 0) == 0) fs::remove(e.path());
  const auto shards = caption::write_captions(caps, dir);
  std::string all;
  for (const auto& s : shards) all += read_file(s);
  json entry = {{"captions", caps.size()}, {"shards", shards.size()}, {"content_hash", digest(all)},
                {"config_hash", config_hash(c)}};
  update_manifest(c, "caption", entry);
  return {"caption", entry, true};
}

StageResult instruct(const RunConfig& c) {
  require_stage(c, "caption", "instruct");
  const auto scenes = load_scenes(c.out);
  const auto caps = caption::read_captions((fs::path(c.out) / "captions").string());
  std::map<std::string, const caption::CaptionRecord*> by_id;
  for (const auto& cap : caps) by_id[cap.scene_id] = &cap;

  std::unique_ptr<instruct::TextGenClient> client;
  auto client_cfg = instruct::client_from_env(c.client);
  if (!c.offline) {
    if (client_cfg.base_url.empty()) throw ConfigError("remote generation needs RFSYNTH_LLM_BASE_URL or client.base_url");
    client = std::make_unique<instruct::HttpTextGenClient>(client_cfg);
  }
  instruct::SynthConfig scfg;
  scfg.per_scene = c.instructions_per_scene;
  scfg.seed = derive_seed(c.seed, "instruct");
  std::vector<instruct::SynthOutcome> outcomes(scenes.size());
  const int threads = c.offline ? c.jobs : std::max(1, std::min(c.jobs, client_cfg.max_in_flight));
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    auto it = by_id.find(scenes[i].rec.scene_id);
    if (it == by_id.end()) throw StageError("instruct: no caption for scene " + scenes[i].rec.scene_id + "; rerun caption");
    outcomes[i] = instruct::synthesize_scene(scenes[i].rec, *it->second, scenes[i].image_path, scfg,
                                             instruct::default_library(), client.get(), client_cfg.retries);
  });
  std::vector<instruct::InstructionExample> examples;
  json failures = json::array(), skipped = json::array();
  for (auto& o : outcomes) {
    for (auto& f : o.failures) failures.push_back(f);
    for (auto& s : o.skipped) skipped.push_back(s);
    examples.insert(examples.end(), std::make_move_iterator(o.examples.begin()), std::make_move_iterator(o.examples.end()));
  }
  std::size_t grounded = 0, fallback = 0;
  for (const auto& e : examples) {
    grounded += instruct::score_against(e.grounding, e.answer, c.bench_options) == 1.0;
    fallback += e.source == "fallback";
  }
  const auto dir = (fs::path(c.out) / "instructions").string();
  const auto m = instruct::write_dataset(examples, dir, c.seed, config_hash(c));
  std::string fail_body;
  for (const auto& f : failures) fail_body += json{{"failure", f}}.dump() + "\n";
  write_file(fs::path(dir) / "failures.jsonl", fail_body);
  const double self_score = examples.empty() ? 1.0 : static_cast<double>(grounded) / static_cast<double>(examples.size());
  json entry = {{"K", m.K},
                {"scenes", scenes.size()},
                {"per_scene", scenes.empty() ? 0.0 : static_cast<double>(m.K) / static_cast<double>(scenes.size())},
                {"content_hash", m.content_hash},
                {"self_score", self_score},
                {"fallbacks", fallback},
                {"failures", failures.size()},
                {"skipped", skipped.size()},
                {"mode", c.offline ? "offline" : "remote"},
                {"config_hash", config_hash(c)}};
  update_manifest(c, "instruct", entry);
  return {"instruct", entry, !c.offline ? true : self_score == 1.0};
}

StageResult bench(const RunConfig& c, bool emit_predictions) {
  require_stage(c, "generate", "bench");
  const auto scenes = load_scenes(c.out);
  std::vector<bench::BenchmarkItem> items;
  json cells = json::object();
  for (const auto& tname : c.tasks) {
    const auto task = bench::task_from_string(tname);
    std::vector<bench::SceneEntry> pool;
    for (const auto& s : scenes)
      if (s.rec.task == tname) pool.push_back({s.rec, s.image_path});
    const auto [n, per_group] = cell_quota(c, task);
    for (auto d : bench::difficulties_for(task)) {
      auto cell = bench::build_benchmark(pool, task, d, n, c.seed, per_group, c.bench_options);
      cells[std::string(bench::to_string(task)) + "/" + std::string(bench::to_string(d))] = cell.size();
      items.insert(items.end(), std::make_move_iterator(cell.begin()), std::make_move_iterator(cell.end()));
    }
  }
  const auto dir = fs::path(c.out) / "bench";
  fs::create_directories(dir);
  bench::write_items(items, (dir / "items.jsonl").string());
  json entry = {{"items", items.size()}, {"cells", cells}, {"content_hash", digest(read_file(dir / "items.jsonl"))},
                {"config_hash", config_hash(c)}};
  bool ok = true;
  if (emit_predictions) {
    const auto oracle = bench::oracle_predictions(items);
    const auto shuffled = bench::shuffled_predictions(items, derive_seed(c.seed, "shuffled-oracle"));
    bench::write_predictions(oracle, (dir / "predictions-oracle.jsonl").string());
    bench::write_predictions(shuffled, (dir / "predictions-shuffled.jsonl").string());
    const auto rep = bench::score(items, oracle, c.bench_options);
    json acc = json::object();
    for (const auto& cell : rep.cells) {
      acc[std::string(bench::to_string(cell.task)) + "/" + std::string(bench::to_string(cell.difficulty))] = cell.accuracy();
      ok = ok && cell.accuracy() == 1.0;
    }
    entry["oracle_accuracy"] = acc;
  }
  update_manifest(c, "bench", entry);
  return {"bench", entry, ok};
}

StageResult score(const RunConfig& c, const std::string& predictions_path, const std::string& name) {
  require_stage(c, "bench", "score");
  const auto items = bench::read_items((fs::path(c.out) / "bench" / "items.jsonl").string());
  const auto preds = bench::read_predictions(predictions_path);
  const auto rep = bench::score(items, preds, c.bench_options);
  const std::string stem = name.empty() ? fs::path(predictions_path).stem().string() : name;
  const auto dir = fs::path(c.out) / "reports";
  write_file(dir / ("score-" + stem + ".json"), rep.to_json().dump(2) + "\n");
  const auto csv = rep.confusion_csv();
  if (!csv.empty()) write_file(dir / ("confusion-" + stem + ".csv"), csv);
  json acc = json::object();
  for (const auto& cell : rep.cells)
    acc[std::string(bench::to_string(cell.task)) + "/" + std::string(bench::to_string(cell.difficulty))] = cell.accuracy();
  json entry = {{"predictions", fs::path(predictions_path).filename().string()}, {"accuracy", acc}, {"warnings", rep.warnings.size()}};
  update_manifest(c, "score-" + stem, entry);
  entry["report"] = rep.to_json();
  return {"score", entry, true};
}

StageResult report(const RunConfig& c) {
  const auto m = read_manifest(c.out);
  if (!m.contains("stages")) throw StageError("nothing to report in '" + c.out + "'");
  json summary = {{"out", c.out}, {"config_hash", m.value("config_hash", "")}, {"stages", m["stages"]}};
  if (m.value("config_hash", "") != config_hash(c)) summary["warning"] = "manifest was written under a different config";
  write_file(fs::path(c.out) / "reports" / "summary.json", summary.dump(2) + "\n");
  return {"report", summary, true};
}

}  // namespace rfsynth::pipeline
