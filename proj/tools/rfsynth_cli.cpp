// Batch driver: rfsynth <generate|caption|instruct|bench|score|model-check|report|run> [options]

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rfsynth/core/error.hpp"
#include "rfsynth/model/model.hpp"
#include "rfsynth/pipeline/pipeline.hpp"

namespace {

using nlohmann::json;
using namespace rfsynth;

struct Common {
  std::string config;
  std::string out;
  std::string scale;
  std::string tasks;
  long long seed = -1;
  int jobs = 0;
  int scenes = -1;
  bool offline = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run config");
  app->add_option("--out", c.out, "output root");
  app->add_option("--seed", c.seed, "root seed");
  app->add_option("--scale", c.scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--tasks", c.tasks, "comma-separated subset of wbmc,wbod,wtr,wnuc,nrie");
  app->add_option("--scenes", c.scenes, "total scene count, split over tasks; benchmarks use every item");
  app->add_flag("--offline", c.offline, "answer instructions from metadata without a text-generation endpoint");
}

pipeline::RunConfig resolve(const Common& c) {
  json j = json::object();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw IoError("cannot open config '" + c.config + "'");
    j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config '" + c.config + "' is not a JSON object");
  }
  if (!c.scale.empty()) {
    j["scale"] = c.scale;
    if (c.config.empty()) j.erase("scenes");
  }
  auto cfg = pipeline::config_from_json(j);
  if (!c.out.empty()) cfg.out = c.out;
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  if (c.jobs > 0) cfg.jobs = c.jobs;
  if (c.offline) cfg.offline = true;
  if (!c.tasks.empty()) {
    cfg.tasks.clear();
    std::stringstream ss(c.tasks);
    for (std::string t; std::getline(ss, t, ',');)
      if (!t.empty()) cfg.tasks.push_back(t);
    cfg = pipeline::config_from_json(json(cfg));
  }
  if (c.scenes >= 0) pipeline::set_total_scenes(cfg, c.scenes);
  return cfg;
}

int emit(const pipeline::StageResult& r, double seconds) {
  json line = {{"stage", r.stage}, {"ok", r.ok}, {"seconds", seconds}, {"summary", r.summary}};
  if (r.summary.contains("report")) line["summary"].erase("report");
  std::cout << line.dump() << std::endl;
  return r.ok ? 0 : 1;
}

template <typename F>
int timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = f();
  const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return emit(r, dt);
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const StageError*>(&e)) return "stage";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const RejectionError*>(&e)) return "rejection";
  if (dynamic_cast<const InputError*>(&e)) return "input";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const Error*>(&e)) return "rfsynth";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic RF scene, caption, instruction and benchmark pipeline"};
  app.require_subcommand(1);

  Common common;
  bool emit_predictions = false;
  std::string predictions, report_name;
  int trials = 100;

  auto* gen = app.add_subcommand("generate", "sample scenes and render IQ and spectrograms");
  auto* cap = app.add_subcommand("caption", "write multi-level captions");
  auto* ins = app.add_subcommand("instruct", "synthesize instruction examples");
  auto* ben = app.add_subcommand("bench", "build benchmark items");
  auto* sco = app.add_subcommand("score", "score a predictions file");
  auto* mdl = app.add_subcommand("model-check", "run the reference-model property suite");
  auto* rep = app.add_subcommand("report", "summarize the run manifest");
  auto* run = app.add_subcommand("run", "all stages, then score the oracle predictions");
  for (auto* s : {gen, cap, ins, ben, sco, rep, run}) add_common(s, common);
  ben->add_flag("--emit-predictions", emit_predictions, "also write oracle and shuffled-oracle predictions");
  sco->add_option("--predictions", predictions, "predictions JSONL keyed by item_id")->required();
  sco->add_option("--name", report_name, "report name (default: predictions file stem)");
  mdl->add_option("--seed", common.seed, "suite seed");
  mdl->add_option("--trials", trials, "seeded trials per property")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mdl) {
      const auto results = model::run_property_suite(common.seed >= 0 ? static_cast<std::uint64_t>(common.seed) : 7, trials);
      bool ok = true;
      for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
    const auto cfg = resolve(common);
    if (*gen) return timed([&] { return pipeline::generate(cfg); });
    if (*cap) return timed([&] { return pipeline::caption(cfg); });
    if (*ins) return timed([&] { return pipeline::instruct(cfg); });
    if (*ben) return timed([&] { return pipeline::bench(cfg, emit_predictions); });
    if (*sco) return timed([&] { return pipeline::score(cfg, predictions, report_name); });
    if (*rep) return timed([&] { return pipeline::report(cfg); });
    if (*run) {
      int rc = 0;
      rc |= timed([&] { return pipeline::generate(cfg); });
      rc |= timed([&] { return pipeline::caption(cfg); });
      rc |= timed([&] { return pipeline::instruct(cfg); });
      rc |= timed([&] { return pipeline::bench(cfg, true); });
      rc |= timed([&] { return pipeline::score(cfg, cfg.out + "/bench/predictions-oracle.jsonl", "oracle"); });
      rc |= timed([&] { return pipeline::report(cfg); });
      return rc;
    }
  } catch (const std::exception& e) {
    std::cerr << json{{"error", error_kind(e)}, {"message", e.what()}}.dump() << std::endl;
    return 2;
  }
  return 0;
}
