#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfsynth/bench/bench.hpp"
#include "rfsynth/instruct/instruct.hpp"
#include "rfsynth/scene/types.hpp"
#include "rfsynth/spectro/spectro.hpp"

namespace rfsynth::pipeline {

enum class Scale { desk, paper };
std::string_view to_string(Scale s);
Scale scale_from_string(std::string_view s);

inline const std::vector<std::string> kTaskNames = {"wbmc", "wbod", "wtr", "wnuc", "nrie"};

/// Each scene draws at most one impairment with probability `prob`, family
/// uniform over `kinds`, severity uniform in [0, lambda_max].
struct ImpairmentSchedule {
  double prob = 0.3;
  double lambda_max = 0.3;
  std::vector<impair::Kind> kinds = {impair::Kind::IQ, impair::Kind::PA, impair::Kind::CFO, impair::Kind::TDL};
};

/// Items per benchmark cell: WBMC/WBOD per difficulty, WTR per label, WNUC
/// per standard, NRIE per link. With `all_available` every candidate item is
/// used instead.
struct BenchSizes {
  std::size_t wbmc = 100;
  std::size_t wbod = 100;
  std::size_t wtr_per_class = 50;
  std::size_t wnuc_per_standard = 50;
  std::size_t nrie_per_link = 50;
  bool all_available = false;
};

struct RunConfig {
  std::uint64_t seed = 1;
  Scale scale = Scale::desk;
  std::string out = "run";
  std::map<std::string, int> scenes;  // per task
  spectro::StftConfig stft;
  spectro::RenderConfig render;
  ImpairmentSchedule impairments;
  instruct::ClientConfig client;
  bool offline = true;
  int instructions_per_scene = 52;
  BenchSizes bench;
  bench::BenchOptions bench_options;
  int jobs = 1;
  std::vector<std::string> tasks = kTaskNames;
};

/// Desk scale is 5% of the paper-scale benchmark sizes.
RunConfig default_config(Scale scale);
void to_json(nlohmann::json& j, const RunConfig& c);
/// Fields absent from `j` keep the scale defaults.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
/// Hash of everything that affects artifacts (not out, jobs or credentials).
std::string config_hash(const RunConfig& c);

/// Splits `total` scenes evenly over the configured tasks and switches the
/// benchmark to all available items.
void set_total_scenes(RunConfig& c, int total);

struct StageResult {
  std::string stage;
  nlohmann::json summary;
  bool ok = true;
};

/// Scene configs, IQ files, PNG spectrograms and metadata under out/.
StageResult generate(const RunConfig& c);
/// Caption shards under out/captions. Requires generate.
StageResult caption(const RunConfig& c);
/// Instruction shards under out/instructions. Requires caption.
StageResult instruct(const RunConfig& c);
/// Benchmark items under out/bench; with emit_predictions also oracle and
/// shuffled-oracle prediction files. Requires generate.
StageResult bench(const RunConfig& c, bool emit_predictions = false);
/// Scores a predictions file against out/bench/items.jsonl and writes the
/// report JSON and confusion CSV under out/reports. Requires bench.
StageResult score(const RunConfig& c, const std::string& predictions_path, const std::string& name = "");
/// Summary of every stage's manifest entry.
StageResult report(const RunConfig& c);

struct LoadedScene {
  scene::SceneRecord rec;
  std::string image_path;  // relative to out
};
/// Scenes listed in out/scenes/index.json. Throws StageError when absent.
std::vector<LoadedScene> load_scenes(const std::string& out);

/// Scene without IQ for a task and index, as generate() would draw it.
scene::SceneRecord draw_scene(const RunConfig& c, const std::string& task, int index);

nlohmann::json read_manifest(const std::string& out);
std::string manifest_hash(const std::string& out);

}  // namespace rfsynth::pipeline
