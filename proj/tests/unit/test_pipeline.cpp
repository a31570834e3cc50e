#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "rfsynth/core/error.hpp"
#include "rfsynth/instruct/instruct.hpp"
#include "rfsynth/pipeline/pipeline.hpp"

using namespace rfsynth;
using pipeline::RunConfig;
using pipeline::Scale;
namespace fs = std::filesystem;

namespace {

RunConfig small_run(const std::string& name, int total = 10) {
  auto c = pipeline::default_config(Scale::desk);
  c.out = (fs::temp_directory_path() / name).string();
  fs::remove_all(c.out);
  pipeline::set_total_scenes(c, total);
  return c;
}

}  // namespace

TEST_CASE("config JSON round-trips and the hash ignores out and jobs") {
  auto c = pipeline::default_config(Scale::desk);
  c.seed = 77;
  c.impairments.prob = 0.5;
  c.tasks = {"wbod", "wtr"};
  nlohmann::json j = c;
  const auto back = pipeline::config_from_json(j);
  CHECK(nlohmann::json(back) == j);
  auto moved = back;
  moved.out = "elsewhere";
  moved.jobs = 8;
  CHECK(pipeline::config_hash(moved) == pipeline::config_hash(c));
  moved.seed = 78;
  CHECK(pipeline::config_hash(moved) != pipeline::config_hash(c));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(pipeline::config_from_json({{"scale", "huge"}}), ConfigError);
  CHECK_THROWS_AS(pipeline::config_from_json({{"tasks", {"nope"}}}), ConfigError);
  CHECK_THROWS_AS(pipeline::config_from_json({{"impairments", {{"prob", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(pipeline::config_from_json({{"stft", {{"hop", 0}}}}), ConfigError);
  CHECK(pipeline::default_config(Scale::paper).bench.wtr_per_class == 1000);
  CHECK(pipeline::default_config(Scale::desk).bench.wtr_per_class == 50);
}

TEST_CASE("WBOD scenes use the forced-overlap probability") {
  auto c = pipeline::default_config(Scale::desk);
  c.tasks = {"wbod"};
  const auto rec = pipeline::draw_scene(c, "wbod", 0);
  CHECK(rec.overlap_prob == 0.6);
  CHECK(rec.task == "wbod");
}

TEST_CASE("splitting scenes over tasks") {
  auto c = pipeline::default_config(Scale::desk);
  pipeline::set_total_scenes(c, 12);
  int sum = 0;
  for (const auto& [t, n] : c.scenes) sum += n;
  CHECK(sum == 12);
  CHECK(c.scenes["wbmc"] == 3);
  CHECK(c.scenes["nrie"] == 2);
  CHECK(c.bench.all_available);
  CHECK_THROWS_AS(pipeline::set_total_scenes(c, -1), ConfigError);
}

TEST_CASE("stages refuse to run before their inputs exist") {
  const auto c = small_run("rfsynth_pipe_missing");
  CHECK_THROWS_AS(pipeline::caption(c), StageError);
  CHECK_THROWS_AS(pipeline::instruct(c), StageError);
  CHECK_THROWS_AS(pipeline::bench(c), StageError);
  CHECK_THROWS_AS(pipeline::score(c, "nothing.jsonl"), StageError);
  CHECK_THROWS_AS(pipeline::report(c), StageError);
  CHECK_THROWS_AS(pipeline::load_scenes(c.out), StageError);
}

TEST_CASE("a small offline run is complete, self-consistent and idempotent") {
  auto c = small_run("rfsynth_pipe_small");
  const auto g = pipeline::generate(c);
  CHECK(g.summary["scenes"] == 10);
  const auto scenes = pipeline::load_scenes(c.out);
  REQUIRE(scenes.size() == 10);
  for (const auto& s : scenes) {
    CHECK(fs::exists(fs::path(c.out) / s.image_path));
    CHECK(fs::exists(fs::path(c.out) / s.rec.iq_path));
  }
  CHECK(pipeline::caption(c).summary["captions"] == 10);

  const auto ins = pipeline::instruct(c);
  CHECK(ins.ok);
  CHECK(ins.summary["self_score"] == 1.0);
  CHECK(ins.summary["mode"] == "offline");
  const double per_scene = ins.summary["per_scene"].get<double>();
  CHECK(per_scene == doctest::Approx(52.0).epsilon(0.1));
  const auto data = instruct::read_dataset((fs::path(c.out) / "instructions").string());
  CHECK(data.size() == ins.summary["K"].get<std::size_t>());

  const auto b = pipeline::bench(c, true);
  CHECK(b.ok);
  for (const auto& [cell, acc] : b.summary["oracle_accuracy"].items()) CHECK_MESSAGE(acc == 1.0, cell);
  const auto s = pipeline::score(c, c.out + "/bench/predictions-oracle.jsonl", "oracle");
  CHECK(s.summary["warnings"] == 0);
  CHECK(fs::exists(fs::path(c.out) / "reports" / "score-oracle.json"));
  CHECK(!pipeline::report(c).summary.contains("warning"));

  const auto first = pipeline::manifest_hash(c.out);
  const auto stages = pipeline::read_manifest(c.out)["stages"];
  pipeline::generate(c);
  pipeline::caption(c);
  pipeline::instruct(c);
  pipeline::bench(c, true);
  pipeline::score(c, c.out + "/bench/predictions-oracle.jsonl", "oracle");
  CHECK(pipeline::read_manifest(c.out)["stages"] == stages);
  CHECK(pipeline::manifest_hash(c.out) == first);

  auto other = c;
  other.seed = 2;
  CHECK(pipeline::report(other).summary.contains("warning"));
  fs::remove_all(c.out);
}

TEST_CASE("the same config in two directories gives the same artifacts") {
  auto a = small_run("rfsynth_pipe_a", 5);
  auto b = small_run("rfsynth_pipe_b", 5);
  b.jobs = 2;
  pipeline::generate(a);
  pipeline::generate(b);
  CHECK(pipeline::read_manifest(a.out)["stages"]["generate"] == pipeline::read_manifest(b.out)["stages"]["generate"]);
  fs::remove_all(a.out);
  fs::remove_all(b.out);
}

TEST_CASE("remote mode without an endpoint is a config error") {
  auto c = small_run("rfsynth_pipe_remote", 5);
  c.offline = false;
  c.client.base_url.clear();
  unsetenv("RFSYNTH_LLM_BASE_URL");
  pipeline::generate(c);
  pipeline::caption(c);
  CHECK_THROWS_AS(pipeline::instruct(c), ConfigError);
  fs::remove_all(c.out);
}
