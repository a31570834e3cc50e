#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/instruct/instruct.hpp"
#include "rfsynth/scene/sampler.hpp"
#include "rfsynth/scene/tech.hpp"

using namespace rfsynth;
using namespace rfsynth::instruct;
using caption::Level;
using caption::LevelSet;
using scene::SceneRecord;

namespace {

constexpr double kFs = 61.44e6;

const TaskTemplate& tpl(const std::string& id) {
  for (const auto& t : default_library())
    if (t.template_id == id) return t;
  throw std::runtime_error("no template " + id);
}

caption::CaptionRecord cap_of(const SceneRecord& rec, LevelSet levels = LevelSet::all()) {
  return caption::build_caption(rec, caption::derive_visual_attrs(rec), levels, 0);
}

SceneRecord tech_scene(scene::Technology t, scene::Link l, std::uint64_t seed) {
  SceneRecord rec;
  rec.scene_id = "tech-" + std::to_string(seed);
  rec.fs = kFs;
  rec.duration = 131072 / kFs;
  rec.signals = scene::plan_technology(t, l, seed, kFs, 131072).records;
  return rec;
}

SceneRecord generic_with(int n, std::uint64_t seed) {
  auto spec = scene::wbmc_spec();
  spec.min_signals = spec.max_signals = n;
  return scene::sample_scene_config(seed, spec);
}

/// Replays scripted completions, then repeats the last one.
class ScriptedClient : public TextGenClient {
 public:
  explicit ScriptedClient(std::vector<Completion> script) : script_(std::move(script)) {}
  Completion complete(const Prompt& p) override {
    prompts.push_back(p);
    const auto i = std::min(calls_++, script_.size() - 1);
    return script_[i];
  }
  std::vector<Prompt> prompts;

 private:
  std::vector<Completion> script_;
  std::size_t calls_ = 0;
};

}  // namespace

TEST_CASE("library covers every task type and difficulty with three templates") {
  std::map<std::pair<TaskType, bench::Difficulty>, int> n;
  std::set<std::string> ids;
  for (const auto& t : default_library()) {
    CHECK_NOTHROW(validate(t));
    CHECK(ids.insert(t.template_id).second);
    ++n[{t.task_type, t.difficulty}];
  }
  for (auto tt : kAllTaskTypes)
    for (auto d : bench::kAllDifficulties) CHECK(n[{tt, d}] >= 3);
}

TEST_CASE("validation rejects empty levels and mismatched formats") {
  auto t = tpl("count-e1");
  t.required_levels = {};
  CHECK_THROWS_AS(validate(t), ConfigError);
  t = tpl("count-e1");
  t.answer_format = AnswerFormat::json;
  CHECK_THROWS_AS(validate(t), ConfigError);
}

TEST_CASE("SRS-only library skips a downlink scene") {
  const auto rec = tech_scene(scene::Technology::NR, scene::Link::DL, 1);
  const std::vector<TaskTemplate> lib = {tpl("info-h2")};
  const auto sel = select_template(1, cap_of(rec), rec, lib);
  CHECK(sel.tpl == nullptr);
  CHECK(sel.skip_reason == "no applicable template");
  SynthConfig cfg;
  cfg.per_scene = 5;
  const auto out = synthesize_scene(rec, cap_of(rec), "x.png", cfg, lib);
  CHECK(out.examples.empty());
  REQUIRE(out.skipped.size() == 1);
  CHECK(out.skipped[0].find("no applicable template") != std::string::npos);
}

TEST_CASE("template choice is deterministic and respects weights") {
  const auto rec = generic_with(3, 4);
  const auto cap = cap_of(rec);
  auto a = tpl("count-e1"), b = tpl("count-e2");
  a.weight = 1;
  b.weight = 0;
  const std::vector<TaskTemplate> lib = {a, b};
  for (std::uint64_t s = 0; s < 200; ++s) CHECK(select_template(s, cap, rec, lib).tpl->template_id == "count-e1");
  for (std::uint64_t s = 0; s < 20; ++s)
    CHECK(select_template(s, cap, rec, default_library()).tpl == select_template(s, cap, rec, default_library()).tpl);
}

TEST_CASE("templates whose levels the caption lacks are not chosen") {
  const auto rec = generic_with(3, 4);
  const auto cap = cap_of(rec, {Level::summary});
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto sel = select_template(s, cap, rec, default_library());
    REQUIRE(sel.tpl);
    CHECK(sel.tpl->required_levels.subset_of(cap.levels));
  }
  CHECK_THROWS_AS(assemble_prompt(tpl("mod-h1"), cap, {{"classes", "x"}}), InputError);
}

TEST_CASE("summary-only hidden context excludes signal text") {
  const auto rec = generic_with(3, 5);
  const auto cap = cap_of(rec);
  const auto p = assemble_prompt(tpl("count-e1"), cap);
  CHECK(p.hidden_context == cap.render({Level::summary}));
  for (const auto& lines : cap.signal_context)
    for (const auto& l : lines) CHECK(p.hidden_context.find(l) == std::string::npos);
  CHECK(p.system == kSystemPrompt);
}

TEST_CASE("count prompt is verbatim and the offline answer is the count") {
  const auto rec = generic_with(3, 6);
  const auto cap = cap_of(rec);
  const auto& t = tpl("count-e1");
  const auto inst = make_instance(t, rec, cap, "x.png", 1);
  REQUIRE(inst);
  const auto p = assemble_prompt(t, cap, inst->vars);
  CHECK(p.user == "How many distinct signals are present?");
  const auto r = generate_pair(p, nullptr, 3, t, *inst, {});
  CHECK(r.example.answer == "3");
  CHECK(r.example.source == "offline");
  CHECK(score_against(inst->grounding, r.example.answer) == 1.0);
}

TEST_CASE("captions differing only in scene id give identical prompts") {
  auto rec = generic_with(4, 7);
  auto other = rec;
  other.scene_id = "another-id";
  for (const auto& t : default_library()) {
    const auto ca = cap_of(rec), cb = cap_of(other);
    const auto ia = make_instance(t, rec, ca, "x.png", 3);
    const auto ib = make_instance(t, other, cb, "x.png", 3);
    REQUIRE(ia.has_value() == ib.has_value());
    if (!ia) continue;
    const auto pa = assemble_prompt(t, ca, ia->vars), pb = assemble_prompt(t, cb, ib->vars);
    CHECK(pa.user == pb.user);
    CHECK(pa.hidden_context == pb.hidden_context);
    CHECK(ia->offline_answer == ib->offline_answer);
  }
}

TEST_CASE("offline overlap answers name the overlap class") {
  int both_seen = 0;
  for (std::uint64_t seed = 0; seed < 60 && both_seen < 3; ++seed) {
    const auto rec = scene::sample_scene_config(seed, scene::wbod_spec());
    const auto cap = cap_of(rec);
    for (std::uint64_t k = 0; k < 6; ++k) {
      const auto inst = make_instance(tpl("ovl-m1"), rec, cap, "x.png", k);
      if (!inst || inst->grounding.truth != "both") continue;
      ++both_seen;
      CHECK(inst->offline_answer.find("both") != std::string::npos);
      const auto hard = make_instance(tpl("ovl-h1"), rec, cap, "x.png", k);
      REQUIRE(hard);
      CHECK(hard->offline_answer.find("time:") != std::string::npos);
      CHECK(hard->offline_answer.find("frequency:") != std::string::npos);
    }
  }
  CHECK(both_seen > 0);
}

TEST_CASE("every offline answer parses and scores 1 against its grounding") {
  for (const auto& task : {"wbmc", "wbod", "wtr", "wnuc", "nrie"})
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto rec = scene::sample_scene_config(derive_seed(seed, task), scene::spec_for_task(task));
      SynthConfig cfg;
      cfg.seed = seed;
      const auto out = synthesize_scene(rec, cap_of(rec), "x.png", cfg);
      CHECK(out.examples.size() == 52);
      for (const auto& e : out.examples) {
        CHECK(parse_for(e.grounding, e.answer).ok);
        CHECK_MESSAGE(score_against(e.grounding, e.answer) == 1.0, e.template_id << ": " << e.answer);
        const auto& t = tpl(e.template_id);
        CHECK(e.info_levels_used == t.required_levels);
      }
    }
}

TEST_CASE("invalid remote JSON is retried, then accepted") {
  const auto rec = generic_with(2, 8);
  const auto cap = cap_of(rec);
  const auto& t = tpl("desc-h1");
  const auto inst = make_instance(t, rec, cap, "x.png", 1);
  REQUIRE(inst);
  const auto p = assemble_prompt(t, cap, inst->vars);
  ScriptedClient client({{true, "{not json", ""}, {true, inst->offline_answer, ""}});
  const auto r = generate_pair(p, &client, 3, t, *inst, {});
  CHECK(r.attempts == 2);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].find("format") != std::string::npos);
  CHECK(r.example.source == "remote");
  CHECK(client.prompts.size() == 2);
  CHECK(client.prompts[0].hidden_context == cap.render(t.required_levels));
}

TEST_CASE("transport failures fall back to the offline answer") {
  const auto rec = generic_with(3, 9);
  const auto cap = cap_of(rec);
  const auto& t = tpl("count-e1");
  const auto inst = make_instance(t, rec, cap, "x.png", 1);
  ScriptedClient client({{false, "", "connection refused"}});
  const auto r = generate_pair(assemble_prompt(t, cap), &client, 3, t, *inst, {});
  CHECK(r.attempts == 3);
  CHECK(r.failures.size() == 3);
  CHECK(r.example.source == "fallback");
  CHECK(r.example.answer == "3");
}

TEST_CASE("unreachable HTTP endpoint reports a transport error") {
  ClientConfig cfg;
  cfg.base_url = "http://127.0.0.1:9/v1";
  cfg.model = "m";
  cfg.timeout_s = 1;
  HttpTextGenClient client(cfg);
  const auto c = client.complete({"s", "u", "h", {Level::summary}});
  CHECK_FALSE(c.ok);
  CHECK(!c.error.empty());
  const auto body = HttpTextGenClient::request_body({"s", "u", "h", {Level::summary}}, "m");
  CHECK(body.at("model") == "m");
  CHECK(body.at("temperature") == 0);
}

TEST_CASE("placeholders must resolve") {
  const auto rec = generic_with(3, 10);
  const auto cap = cap_of(rec);
  CHECK_THROWS_AS(assemble_prompt(tpl("mod-m1"), cap, {}), InputError);
  auto broken = tpl("count-e1");
  broken.user_prompt_pattern = "How many {signals";
  CHECK_THROWS_AS(assemble_prompt(broken, cap, {}), InputError);
}

TEST_CASE("datasets: empty, deterministic, round-trip") {
  const auto dir = (std::filesystem::temp_directory_path() / "rfsynth_instruct_test").string();
  std::filesystem::remove_all(dir);
  const auto empty = write_dataset({}, dir, 1, "h");
  CHECK(empty.K == 0);
  CHECK(empty.shards.empty());
  CHECK(read_dataset(dir).empty());

  std::vector<InstructionExample> all;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto rec = scene::sample_scene_config(s, scene::wbmc_spec());
    SynthConfig cfg;
    cfg.seed = 5;
    auto out = synthesize_scene(rec, cap_of(rec), "x.png", cfg);
    all.insert(all.end(), out.examples.begin(), out.examples.end());
  }
  const auto m1 = write_dataset(all, dir, 5, "h", 60);
  std::ifstream in1(dir + "/manifest.json");
  std::stringstream s1;
  s1 << in1.rdbuf();
  std::reverse(all.begin(), all.end());
  const auto m2 = write_dataset(all, dir, 5, "h", 60);
  std::ifstream in2(dir + "/manifest.json");
  std::stringstream s2;
  s2 << in2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK(m1.K == all.size());
  CHECK(m1.shards.size() == (all.size() + 59) / 60);
  std::size_t counted = 0;
  for (const auto& [k, v] : m1.counts) counted += v;
  CHECK(counted == m1.K);
  const auto back = read_dataset(dir);
  REQUIRE(back.size() == all.size());
  for (std::size_t i = 1; i < back.size(); ++i) CHECK(back[i - 1].id < back[i].id);
  all.push_back(all.front());
  CHECK_THROWS_AS(write_dataset(all, dir, 5, "h"), InputError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("default instruction ratio is about 52 per scene") {
  std::size_t total = 0;
  const int scenes = 10;
  for (int i = 0; i < scenes; ++i) {
    const auto rec = scene::sample_scene_config(static_cast<std::uint64_t>(i), scene::wtr_spec());
    total += synthesize_scene(rec, cap_of(rec), "x.png", SynthConfig{}).examples.size();
  }
  CHECK(static_cast<double>(total) / scenes == doctest::Approx(52.0).epsilon(0.05));
}

TEST_CASE("environment overrides the client config") {
  setenv("RFSYNTH_LLM_BASE_URL", "http://example.invalid/v1", 1);
  unsetenv("RFSYNTH_LLM_MODEL");
  ClientConfig base;
  base.model = "kept";
  const auto c = client_from_env(base);
  CHECK(c.base_url == "http://example.invalid/v1");
  CHECK(c.model == "kept");
  unsetenv("RFSYNTH_LLM_BASE_URL");
}
