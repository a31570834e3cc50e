#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "rfsynth/bench/bench.hpp"
#include "rfsynth/core/error.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/scene/sampler.hpp"

using namespace rfsynth;
using namespace rfsynth::bench;
using nlohmann::json;

namespace {

std::vector<SceneEntry> scenes_for(const std::string& task, int n, std::uint64_t base = 100) {
  std::vector<SceneEntry> out;
  const auto spec = scene::spec_for_task(task);
  for (int i = 0; i < n; ++i) out.push_back({scene::sample_scene_config(derive_seed(base, task, i), spec), "img.png"});
  return out;
}

double score_text(const ItemKey& key, const json& truth, const std::string& text) {
  return score_answer(key, truth, parse_answer(text, key));
}

const ItemKey kScs{Task::NRIE, Difficulty::easy, "scs"};
const ItemKey kSsb{Task::NRIE, Difficulty::easy, "ssb_pattern"};
const ItemKey kUe{Task::NRIE, Difficulty::medium, "ue_count"};

}  // namespace

TEST_CASE("WBMC positionwise scorer") {
  const std::vector<std::string> truth = {"qpsk", "16qam"};
  const std::vector<std::string> same = {"qpsk", "16qam"}, short_pred = {"qpsk"}, swapped = {"16qam", "qpsk"};
  CHECK(score_wbmc(truth, same) == 1.0);
  CHECK(score_wbmc(truth, short_pred) == 0.0);
  CHECK(score_wbmc(truth, swapped) == 0.0);
  const std::vector<std::string> half = {"qpsk", "bpsk"};
  CHECK(score_wbmc(truth, half) == 0.5);
  CHECK(score_wbmc_set(truth, swapped) == 1.0);
}

TEST_CASE("WTR scoring is joint over technology and link") {
  const ItemKey k{Task::WTR, Difficulty::easy, {}};
  CHECK(score_text(k, "NR-DL", "Answer: NR-DL") == 1.0);
  CHECK(score_text(k, "NR-DL", "Answer: NR-UL") == 0.0);
  CHECK(score_text(k, "NR-DL", "5G NR downlink") == 1.0);
  CHECK(score_text(k, "WLAN-BE", "This is Wi-Fi 7 (802.11be).") == 1.0);
  CHECK(score_text(k, "BT", "Answer: Bluetooth") == 1.0);
  const auto bad = parse_answer("a microwave oven", k);
  CHECK_FALSE(bad.ok);
  CHECK(score_answer(k, "BT", bad) == 0.0);
}

TEST_CASE("NRIE parser canonicalizes values") {
  CHECK(score_text(kScs, "30", "30") == 1.0);
  CHECK(score_text(kScs, "30", "Answer: 30 kHz") == 1.0);
  CHECK_FALSE(parse_answer("45 kHz", kScs).ok);
  CHECK(score_text(kSsb, "N/A", "N/A") == 1.0);
  CHECK(score_text(kSsb, "N/A", "There is no SSB in this capture.") == 1.0);
  CHECK(score_text(kSsb, "C", "Answer: Case C") == 1.0);
  CHECK(score_text(kSsb, "B", "It is pattern B.") == 1.0);
  CHECK(score_text(kUe, "3", "three") == 1.0);
  CHECK(score_text(kUe, "21", "twenty-one users") == 1.0);
  CHECK(score_text(kUe, "0", "none") == 1.0);
}

TEST_CASE("answer grammar") {
  const auto s = parse_overlap_strength("time: slightly, frequency: almost fully");
  REQUIRE(s);
  CHECK(s->first == OverlapLevel::slightly);
  CHECK(s->second == OverlapLevel::almost_fully);
  CHECK(parse_interval("[16, 30]") == std::pair<long, long>{16, 30});
  CHECK(parse_interval("between 11 and 20") == std::pair<long, long>{11, 20});
  CHECK(parse_integer("I count 12 users") == 12L);
  CHECK(parse_integer("forty two") == 42L);
  CHECK(parse_overlap_type("They overlap in time only.") == OverlapType::time_only);
  CHECK(parse_overlap_type("no overlap at all") == OverlapType::neither);
  const auto seg = answer_segment("reasoning... Answer: X. answer: Y");
  CHECK(seg.find('Y') != std::string::npos);
  CHECK(seg.find('X') == std::string::npos);
  const auto labels = parse_label_list("Answer: 16qam, ofdm-64, fm-wb", false);
  CHECK(labels == std::vector<std::string>{"16qam", "ofdm-64", "fm-wb"});
  CHECK(parse_label_list("psk then qam", true) == std::vector<std::string>{"psk", "qam"});
}

TEST_CASE("empty answers are parse failures scoring zero") {
  for (Task t : kAllTasks)
    for (Difficulty d : difficulties_for(t)) {
      ItemKey k{t, d, t == Task::NRIE ? "ue_count" : ""};
      const auto p = parse_answer("", k);
      CHECK_FALSE(p.ok);
      CHECK(score_answer(k, json("x"), p) == 0.0);
    }
}

TEST_CASE("scorer is total on arbitrary text") {
  Rng rng(4);
  const std::string alphabet = "abcdeqpsk0123456789 ,[]:-NADTime";
  const auto items = build_benchmark(scenes_for("wbod", 40), Task::WBOD, Difficulty::hard, 0, 1);
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    const auto len = rng.uniform_int(0, 40);
    for (int c = 0; c < len; ++c) text += alphabet[static_cast<std::size_t>(rng.uniform_int(0, alphabet.size() - 1))];
    for (Task t : kAllTasks)
      for (Difficulty d : difficulties_for(t)) {
        ItemKey k{t, d, t == Task::NRIE ? "ssb_pattern" : ""};
        const auto p = parse_answer(text, k);
        json truth;
        switch (t) {
          case Task::WBMC: truth = json::array({"qpsk"}); break;
          case Task::WBOD: truth = d == Difficulty::hard ? json::array({"none", "none"}) : json("neither"); break;
          case Task::WNUC: truth = d == Difficulty::hard ? json(10) : json::array({1, 10}); break;
          default: truth = "A";
        }
        const double s = score_answer(k, truth, p);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        if (!p.ok) CHECK(s == 0.0);
      }
  }
  CHECK(!items.empty());
}

TEST_CASE("oracle predictions score 1.0 on every cell") {
  const std::map<Task, std::string> tasks = {
      {Task::WBMC, "wbmc"}, {Task::WBOD, "wbod"}, {Task::WTR, "wtr"}, {Task::WNUC, "wnuc"}, {Task::NRIE, "nrie"}};
  for (const auto& [task, name] : tasks) {
    const auto scenes = scenes_for(name, task == Task::WTR ? 80 : 30);
    for (Difficulty d : difficulties_for(task)) {
      const auto items = build_benchmark(scenes, task, d, 0, 7);
      REQUIRE(!items.empty());
      const auto rep = score(items, oracle_predictions(items));
      const auto* cell = rep.find(task, d);
      REQUIRE(cell != nullptr);
      CHECK(cell->n == items.size());
      CHECK(cell->accuracy() == 1.0);
      CHECK(cell->parse_failures == 0);
      CHECK(rep.warnings.empty());
    }
  }
}

TEST_CASE("WBMC ground truth is ordered by start time") {
  for (const auto& e : scenes_for("wbmc", 30)) {
    auto sigs = e.rec.signals;
    std::stable_sort(sigs.begin(), sigs.end(), [](const auto& a, const auto& b) {
      return a.t_interval.lo != b.t_interval.lo ? a.t_interval.lo < b.t_interval.lo : a.id < b.id;
    });
    const auto truth = wbmc_truth(e.rec, false);
    REQUIRE(truth.size() == sigs.size());
    for (std::size_t i = 0; i < sigs.size(); ++i) CHECK(truth[i] == sigs[i].mod_class);
  }
}

TEST_CASE("WBMC-medium candidates contain the truth plus distractors") {
  for (const auto& it : build_benchmark(scenes_for("wbmc", 20), Task::WBMC, Difficulty::medium, 0, 3)) {
    const auto truth = it.ground_truth.get<std::vector<std::string>>();
    const std::set<std::string> distinct(truth.begin(), truth.end());
    const std::set<std::string> cands(it.candidate_list.begin(), it.candidate_list.end());
    for (const auto& t : distinct) CHECK(cands.count(t) == 1);
    CHECK(cands.size() > distinct.size());
  }
}

TEST_CASE("WBOD items only use adjacent pairs") {
  const auto scenes = scenes_for("wbod", 30);
  std::map<std::string, const scene::SceneRecord*> by_id;
  for (const auto& s : scenes) by_id[s.rec.scene_id] = &s.rec;
  for (Difficulty d : {Difficulty::medium, Difficulty::hard})
    for (const auto& it : build_benchmark(scenes, Task::WBOD, d, 0, 3)) {
      const auto pairs = adjacent_pairs(*by_id.at(it.scene_id));
      const auto comma = it.attribute.find(',');
      const std::pair<int, int> p{std::stoi(it.attribute.substr(0, comma)), std::stoi(it.attribute.substr(comma + 1))};
      CHECK(std::find(pairs.begin(), pairs.end(), p) != pairs.end());
    }
}

TEST_CASE("build_benchmark is deterministic and names deficits") {
  const auto scenes = scenes_for("wbmc", 20);
  const auto a = build_benchmark(scenes, Task::WBMC, Difficulty::hard, 10, 5);
  const auto b = build_benchmark(scenes, Task::WBMC, Difficulty::hard, 10, 5);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(to_json(a[i]) == to_json(b[i]));
  CHECK(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) { return x.item_id < y.item_id; }));
  try {
    build_benchmark(scenes, Task::WBMC, Difficulty::hard, 1000, 5);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("1000") != std::string::npos);
  }
  CHECK(build_benchmark(scenes, Task::WTR, Difficulty::easy, 0, 5).empty());
}

TEST_CASE("per-group sampling draws n items per WTR label") {
  const auto items = build_benchmark(scenes_for("wtr", 120), Task::WTR, Difficulty::easy, 3, 2, true);
  std::map<std::string, int> per;
  for (const auto& it : items) ++per[it.group];
  CHECK(per.size() == kWtrLabels.size());
  for (const auto& [label, n] : per) CHECK(n == 3);
}

TEST_CASE("constant predictor accuracy equals the label frequency") {
  const auto items = build_benchmark(scenes_for("wbod", 200), Task::WBOD, Difficulty::easy, 0, 9);
  std::map<std::string, std::size_t> freq;
  for (const auto& it : items) ++freq[it.ground_truth.get<std::string>()];
  for (OverlapType t : kAllOverlapTypes) {
    std::vector<Prediction> preds;
    for (const auto& it : items) preds.push_back({it.item_id, render_answer(it.key(), std::string(to_string(t)))});
    const auto rep = score(items, preds);
    const double expected = static_cast<double>(freq[std::string(to_string(t))]) / static_cast<double>(items.size());
    CHECK(rep.find(Task::WBOD, Difficulty::easy)->accuracy() == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("shuffled predictions permute answers within a cell") {
  const auto items = build_benchmark(scenes_for("wtr", 80), Task::WTR, Difficulty::easy, 0, 1);
  const auto oracle = oracle_predictions(items);
  const auto shuffled = shuffled_predictions(items, 3);
  REQUIRE(shuffled.size() == oracle.size());
  std::multiset<std::string> a, b;
  for (const auto& p : oracle) a.insert(p.raw_text);
  for (const auto& p : shuffled) b.insert(p.raw_text);
  CHECK(a == b);
  CHECK(score(items, shuffled).find(Task::WTR, Difficulty::easy)->accuracy() < 1.0);
}

TEST_CASE("scoring reports unknown, duplicate and missing predictions") {
  const auto items = build_benchmark(scenes_for("wnuc", 20), Task::WNUC, Difficulty::easy, 0, 1);
  REQUIRE(items.size() >= 2);
  auto preds = oracle_predictions(items);
  preds.push_back({"no-such-item", "Answer: [1, 5]"});
  preds.push_back(preds.front());
  preds.erase(preds.begin() + 1);
  const auto rep = score(items, preds);
  CHECK(rep.warnings.size() == 2);
  const auto* cell = rep.find(Task::WNUC, Difficulty::easy);
  CHECK(cell->missing == 1);
  CHECK(cell->n == items.size());
  CHECK(cell->accuracy() == doctest::Approx(static_cast<double>(items.size() - 1) / items.size()));
}

TEST_CASE("WTR confusion matrix is row-normalized") {
  const auto items = build_benchmark(scenes_for("wtr", 80), Task::WTR, Difficulty::easy, 0, 1);
  const auto rep = score(items, oracle_predictions(items));
  const auto norm = rep.find(Task::WTR, Difficulty::easy)->confusion_normalized();
  REQUIRE(norm.size() == kWtrLabels.size());
  for (std::size_t r = 0; r < norm.size(); ++r) {
    REQUIRE(norm[r].size() == kWtrLabels.size() + 1);
    double sum = 0;
    for (double v : norm[r]) sum += v;
    if (sum > 0) {
      CHECK(sum == doctest::Approx(1.0));
      CHECK(norm[r][r] == doctest::Approx(1.0));
    }
  }
  CHECK(rep.confusion_csv().find("NR-DL") != std::string::npos);
}

TEST_CASE("items and predictions round-trip through JSONL") {
  const auto dir = std::filesystem::temp_directory_path() / "rfsynth_bench_test";
  std::filesystem::create_directories(dir);
  const auto items = build_benchmark(scenes_for("nrie", 20), Task::NRIE, Difficulty::easy, 0, 1);
  write_items(items, (dir / "items.jsonl").string());
  const auto back = read_items((dir / "items.jsonl").string());
  REQUIRE(back.size() == items.size());
  for (std::size_t i = 0; i < items.size(); ++i) CHECK(to_json(back[i]) == to_json(items[i]));
  const auto preds = oracle_predictions(items);
  write_predictions(preds, (dir / "p.jsonl").string());
  const auto pb = read_predictions((dir / "p.jsonl").string());
  REQUIRE(pb.size() == preds.size());
  CHECK(pb[0].raw_text == preds[0].raw_text);
  std::filesystem::remove_all(dir);
}

TEST_CASE("NRIE attributes respect the link") {
  CHECK(nrie_applicable(NrAttribute::csirs_count, scene::Link::DL));
  CHECK_FALSE(nrie_applicable(NrAttribute::csirs_count, scene::Link::UL));
  CHECK_FALSE(nrie_applicable(NrAttribute::srs_count, scene::Link::DL));
  CHECK_FALSE(nrie_applicable(NrAttribute::ssb_pattern, scene::Link::UL));
  for (const auto& e : scenes_for("nrie", 20)) {
    const auto link = scene::scene_link(e.rec);
    if (link == scene::Link::UL) CHECK_THROWS_AS(nrie_truth(e.rec, NrAttribute::csirs_count), InputError);
    else CHECK_THROWS_AS(nrie_truth(e.rec, NrAttribute::srs_count), InputError);
  }
}
