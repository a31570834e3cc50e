#include "rfsynth/instruct/instruct.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>

#include "rfsynth/bench/overlap.hpp"
#include "rfsynth/core/error.hpp"
#include "rfsynth/core/hash.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/scene/modclass.hpp"

namespace rfsynth::instruct {

namespace {

using bench::Difficulty;
using caption::Level;
using caption::LevelSet;
using nlohmann::json;
using scene::Link;
using scene::SceneRecord;
using scene::Technology;

std::string_view target_name(Target t) {
  switch (t) {
    case Target::signal_count: return "signal_count";
    case Target::family_count: return "family_count";
    case Target::overlap_pairs: return "overlap_pairs";
    case Target::wbmc: return "wbmc";
    case Target::wbod: return "wbod";
    case Target::wtr: return "wtr";
    case Target::wnuc: return "wnuc";
    case Target::nrie: return "nrie";
    case Target::claim: return "claim";
    case Target::description: return "description";
    case Target::structured: return "structured";
  }
  return "?";
}

Target target_from_name(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(Target::structured); ++i)
    if (target_name(static_cast<Target>(i)) == s) return static_cast<Target>(i);
  throw InputError("unknown instruction target '" + std::string(s) + "'");
}

std::optional<bench::Task> bench_task(Target t) {
  switch (t) {
    case Target::wbmc: return bench::Task::WBMC;
    case Target::wbod: return bench::Task::WBOD;
    case Target::wtr: return bench::Task::WTR;
    case Target::wnuc: return bench::Task::WNUC;
    case Target::nrie: return bench::Task::NRIE;
    default: return std::nullopt;
  }
}

AnswerFormat expected_format(const TaskTemplate& t) {
  switch (t.target) {
    case Target::signal_count:
    case Target::family_count:
    case Target::overlap_pairs: return AnswerFormat::integer;
    case Target::wnuc: return t.difficulty == Difficulty::hard ? AnswerFormat::integer : AnswerFormat::interval;
    case Target::nrie: return t.attribute == "ssb_pattern" ? AnswerFormat::label : AnswerFormat::integer;
    case Target::description: return AnswerFormat::paragraph;
    case Target::structured: return AnswerFormat::json;
    default: return AnswerFormat::label;
  }
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(sep) : std::string()) + v[i];
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double round_to(double v, double step) { return std::round(v / step) * step; }

std::vector<const scene::SignalRecord*> time_order(const SceneRecord& rec) {
  std::vector<const scene::SignalRecord*> out;
  for (const auto& s : rec.signals) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(), [](auto* a, auto* b) {
    return a->t_interval.lo != b->t_interval.lo ? a->t_interval.lo < b->t_interval.lo : a->id < b->id;
  });
  return out;
}

int overlapping_pairs(const SceneRecord& rec) {
  int n = 0;
  for (std::size_t i = 0; i < rec.signals.size(); ++i)
    for (std::size_t j = i + 1; j < rec.signals.size(); ++j)
      n += bench::overlap_type(rec.signals[i], rec.signals[j]) == bench::OverlapType::both;
  return n;
}

int family_count(const SceneRecord& rec) {
  std::set<scene::Family> fams;
  for (const auto& s : rec.signals) fams.insert(scene::family_of(s.mod_class));
  return static_cast<int>(fams.size());
}

json structured_summary(const SceneRecord& rec) {
  json sigs = json::array();
  for (auto* s : time_order(rec))
    sigs.push_back({{"id", s->id},
                    {"mod_class", s->mod_class},
                    {"start_us", round_to(s->t_interval.lo * 1e6, 0.1)},
                    {"center_mhz", round_to(s->f_center() / 1e6, 0.001)}});
  return {{"technology", scene::to_string(scene::scene_technology(rec))},
          {"link", scene::to_string(scene::scene_link(rec))},
          {"signal_count", rec.signals.size()},
          {"signals", sigs}};
}

std::string overlap_phrase(bench::OverlapType t) {
  switch (t) {
    case bench::OverlapType::neither: return "do not overlap at all";
    case bench::OverlapType::time_only: return "overlap in time only";
    case bench::OverlapType::frequency_only: return "overlap in frequency only";
    case bench::OverlapType::both: return "overlap in both time and frequency";
  }
  return {};
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

/// Claim that holds with probability 1/2; returns (claim, holds).
std::optional<std::pair<std::string, bool>> make_claim(const TaskTemplate& tpl, const SceneRecord& rec, Rng& rng) {
  const bool holds = rng.bernoulli(0.5);
  switch (tpl.difficulty) {
    case Difficulty::easy: {
      if (scene::scene_technology(rec) == Technology::GENERIC) {
        const int n = static_cast<int>(rec.signals.size());
        int shown = n;
        if (!holds) shown = n == 1 || rng.bernoulli(0.5) ? n + 1 : n - 1;
        return std::make_pair("The capture contains " + std::to_string(shown) + (shown == 1 ? " signal." : " signals."), holds);
      }
      const auto truth = bench::wtr_label(rec);
      std::string shown = truth;
      if (!holds) {
        std::vector<std::string> others;
        for (const auto& l : bench::kWtrLabels)
          if (l != truth) others.push_back(l);
        shown = others[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(others.size()) - 1))];
      }
      return std::make_pair("The capture shows a " + shown + " transmission.", holds);
    }
    case Difficulty::medium: {
      const auto order = time_order(rec);
      const auto* s = order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(order.size()) - 1))];
      std::string shown = s->mod_class;
      if (!holds) {
        std::vector<std::string> others;
        for (const auto& n : scene::default_registry().names())
          if (n != s->mod_class) others.push_back(n);
        shown = others[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(others.size()) - 1))];
      }
      return std::make_pair(capitalize(bench::describe_signal(*s)) + " uses " + shown + " modulation.", holds);
    }
    case Difficulty::hard: {
      const auto pairs = bench::adjacent_pairs(rec);
      if (pairs.empty()) return std::nullopt;
      std::vector<std::pair<int, int>> v(pairs.begin(), pairs.end());
      const auto [a, b] = v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
      const scene::SignalRecord *sa = nullptr, *sb = nullptr;
      for (const auto& s : rec.signals) {
        if (s.id == a) sa = &s;
        if (s.id == b) sb = &s;
      }
      const auto truth = bench::overlap_type(*sa, *sb);
      auto shown = truth;
      if (!holds) {
        std::vector<bench::OverlapType> others;
        for (auto t : {bench::OverlapType::neither, bench::OverlapType::time_only, bench::OverlapType::frequency_only,
                       bench::OverlapType::both})
          if (t != truth) others.push_back(t);
        shown = others[static_cast<std::size_t>(rng.uniform_int(0, 2))];
      }
      return std::make_pair(capitalize(bench::describe_signal(*sa)) + " and " + bench::describe_signal(*sb) + " " +
                                overlap_phrase(shown) + ".",
                            holds);
    }
  }
  return std::nullopt;
}

std::optional<std::string> parse_yes_no(std::string_view text) {
  static const std::regex re(R"(\b(yes|no)\b)", std::regex::icase);
  const std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  std::string v = m[1];
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return v;
}

std::string strip_fences(std::string s) {
  s = trim(s);
  if (s.rfind("```", 0) == 0) {
    const auto nl = s.find('\n');
    const auto end = s.rfind("```");
    if (nl != std::string::npos && end > nl) s = s.substr(nl + 1, end - nl - 1);
  }
  return trim(s);
}

}  // namespace

std::string_view to_string(TaskType t) {
  switch (t) {
    case TaskType::count: return "count";
    case TaskType::mod_recognition: return "mod_recognition";
    case TaskType::tech_recognition: return "tech_recognition";
    case TaskType::info_extraction: return "info_extraction";
    case TaskType::overlap_analysis: return "overlap_analysis";
    case TaskType::consistency_check: return "consistency_check";
    case TaskType::open_description: return "open_description";
  }
  return "?";
}

TaskType task_type_from_string(std::string_view s) {
  for (auto t : kAllTaskTypes)
    if (to_string(t) == s) return t;
  throw ConfigError("unknown task type '" + std::string(s) + "'");
}

std::string_view to_string(AnswerFormat f) {
  switch (f) {
    case AnswerFormat::label: return "label";
    case AnswerFormat::integer: return "integer";
    case AnswerFormat::interval: return "interval";
    case AnswerFormat::json: return "json";
    case AnswerFormat::paragraph: return "paragraph";
  }
  return "?";
}

void validate(const TaskTemplate& tpl) {
  if (tpl.required_levels.empty()) throw ConfigError("template " + tpl.template_id + " requires no caption level");
  if (tpl.weight < 0) throw ConfigError("template " + tpl.template_id + " has a negative weight");
  if (tpl.answer_format != expected_format(tpl))
    throw ConfigError("template " + tpl.template_id + " declares format " + std::string(to_string(tpl.answer_format)) +
                      " but its parser reads " + std::string(to_string(expected_format(tpl))));
  if (tpl.target == Target::nrie) bench::nr_attribute_from_string(tpl.attribute);
}

bool in_scope(Scope s, const SceneRecord& rec) {
  if (rec.signals.empty()) return false;
  const auto tech = scene::scene_technology(rec);
  const auto link = scene::scene_link(rec);
  switch (s) {
    case Scope::generic: return tech == Technology::GENERIC;
    case Scope::generic_multi: return tech == Technology::GENERIC && rec.signals.size() >= 2;
    case Scope::technology: return tech != Technology::GENERIC;
    case Scope::wlan: return scene::wlan_attrs(rec) != nullptr;
    case Scope::nr: return scene::nr_attrs(rec) != nullptr;
    case Scope::nr_dl: return scene::nr_attrs(rec) != nullptr && link == Link::DL;
    case Scope::nr_ul: return scene::nr_attrs(rec) != nullptr && link == Link::UL;
    case Scope::any: return true;
  }
  return false;
}

std::optional<Instance> make_instance(const TaskTemplate& tpl, const SceneRecord& rec, const caption::CaptionRecord& cap,
                                      const std::string& image_path, std::uint64_t seed) {
  if (!in_scope(tpl.scope, rec)) return std::nullopt;
  Rng rng(seed);
  Instance inst;
  auto& g = inst.grounding;
  g.target = tpl.target;
  g.key = {bench::Task::WBMC, tpl.difficulty, tpl.attribute};
  if (auto task = bench_task(tpl.target)) {
    g.key.task = *task;
    auto items = bench::candidate_items({rec, image_path}, *task, *task == bench::Task::WTR ? Difficulty::easy : tpl.difficulty);
    if (*task == bench::Task::NRIE)
      std::erase_if(items, [&](const bench::BenchmarkItem& it) { return it.attribute != tpl.attribute; });
    if (items.empty()) return std::nullopt;
    const auto& it = items[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(items.size()) - 1))];
    g.key = it.key();
    g.item_id = it.item_id;
    g.truth = it.ground_truth;
    inst.offline_answer = bench::render_answer(g.key, g.truth);
    if (!it.candidate_list.empty()) inst.vars["candidates"] = join(it.candidate_list, ", ");
    inst.vars["classes"] = join(scene::default_registry().names(), ", ");
    inst.vars["labels"] = join(bench::kWtrLabels, ", ");
    inst.vars["bucket"] = tpl.difficulty == Difficulty::easy ? "15" : "10";
    if (*task == bench::Task::WBOD && !it.attribute.empty()) {
      const auto comma = it.attribute.find(',');
      const int a = std::stoi(it.attribute.substr(0, comma)), b = std::stoi(it.attribute.substr(comma + 1));
      std::string pair;
      for (int id : {a, b})
        for (const auto& s : rec.signals)
          if (s.id == id) pair += (pair.empty() ? "" : " and ") + bench::describe_signal(s);
      inst.vars["pair"] = pair;
    }
    return inst;
  }
  switch (tpl.target) {
    case Target::signal_count: g.truth = static_cast<long>(rec.signals.size()); break;
    case Target::family_count: g.truth = static_cast<long>(family_count(rec)); break;
    case Target::overlap_pairs: g.truth = static_cast<long>(overlapping_pairs(rec)); break;
    case Target::claim: {
      auto c = make_claim(tpl, rec, rng);
      if (!c) return std::nullopt;
      inst.vars["claim"] = c->first;
      g.truth = c->second ? "yes" : "no";
      inst.offline_answer = c->second ? "Yes" : "No";
      return inst;
    }
    case Target::description: {
      auto text = cap.render(tpl.required_levels);
      std::replace(text.begin(), text.end(), '\n', ' ');
      g.truth = trim(text);
      inst.offline_answer = g.truth.get<std::string>();
      return inst;
    }
    case Target::structured:
      g.truth = structured_summary(rec);
      inst.offline_answer = g.truth.dump();
      return inst;
    default: return std::nullopt;
  }
  inst.offline_answer = std::to_string(g.truth.get<long>());
  return inst;
}

Selection select_template(std::uint64_t seed, const caption::CaptionRecord& cap, const SceneRecord& rec,
                          const std::vector<TaskTemplate>& library) {
  if (library.empty()) return {nullptr, "empty template library"};
  std::vector<const TaskTemplate*> ok;
  std::vector<double> w;
  for (const auto& t : library) {
    if (t.weight <= 0 || !in_scope(t.scope, rec) || !t.required_levels.subset_of(cap.levels)) continue;
    ok.push_back(&t);
    w.push_back(t.weight);
  }
  if (ok.empty()) return {nullptr, "no applicable template"};
  Rng rng(seed);
  return {ok[rng.weighted_index(w)], {}};
}

Prompt assemble_prompt(const TaskTemplate& tpl, const caption::CaptionRecord& cap,
                       const std::map<std::string, std::string>& vars) {
  if (!tpl.required_levels.subset_of(cap.levels))
    throw InputError("caption " + cap.scene_id + " lacks a level required by template " + tpl.template_id);
  Prompt p;
  p.system = std::string(kSystemPrompt);
  p.levels = tpl.required_levels;
  std::string user = tpl.user_prompt_pattern;
  for (std::size_t open; (open = user.find('{')) != std::string::npos;) {
    const auto close = user.find('}', open);
    if (close == std::string::npos) throw InputError("unterminated placeholder in template " + tpl.template_id);
    const auto name = user.substr(open + 1, close - open - 1);
    auto it = vars.find(name);
    if (it == vars.end()) throw InputError("template " + tpl.template_id + " needs a value for {" + name + "}");
    user.replace(open, close - open + 1, it->second);
  }
  p.user = user;
  p.hidden_context = cap.render(tpl.required_levels);
  return p;
}

bench::ParsedAnswer parse_for(const Grounding& g, std::string_view answer, const bench::BenchOptions& opts) {
  if (bench_task(g.target)) return bench::parse_answer(answer, g.key, opts);
  bench::ParsedAnswer p;
  const auto seg = bench::answer_segment(answer);
  switch (g.target) {
    case Target::signal_count:
    case Target::family_count:
    case Target::overlap_pairs:
      if (auto v = bench::parse_integer(seg)) p.value = *v;
      else p.reason = "no integer found";
      break;
    case Target::claim:
      if (auto v = parse_yes_no(seg)) p.value = *v;
      else p.reason = "expected yes or no";
      break;
    case Target::description: {
      auto t = trim(answer);
      if (t.empty()) p.reason = "empty description";
      else p.value = t;
      break;
    }
    case Target::structured: {
      auto j = json::parse(strip_fences(std::string(answer)), nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        p.reason = "answer is not a JSON object";
      } else if (!j.contains("technology") || !j.contains("signals") || !j["signals"].is_array()) {
        p.reason = "JSON answer lacks technology or signals";
      } else {
        bool sig_ok = true;
        for (const auto& s : j["signals"]) sig_ok = sig_ok && s.is_object() && s.contains("mod_class");
        if (!sig_ok) p.reason = "every signal needs a mod_class";
        else p.value = j;
      }
      break;
    }
    default: p.reason = "unsupported target"; break;
  }
  p.ok = p.reason.empty();
  return p;
}

bench::ParsedAnswer validate_answer(const TaskTemplate& tpl, const Grounding& g, std::string_view answer) {
  auto p = parse_for(g, answer);
  if (p.ok && tpl.answer_format == AnswerFormat::paragraph && p.value.get<std::string>().size() > 4000) {
    p.ok = false;
    p.reason = "description longer than 4000 characters";
  }
  return p;
}

double score_against(const Grounding& g, std::string_view answer, const bench::BenchOptions& opts) {
  const auto p = parse_for(g, answer, opts);
  if (bench_task(g.target)) return bench::score_answer(g.key, g.truth, p, opts);
  return p.ok && p.value == g.truth ? 1.0 : 0.0;
}

ClientConfig client_from_env(ClientConfig cfg) {
  if (const char* v = std::getenv("RFSYNTH_LLM_BASE_URL")) cfg.base_url = v;
  if (const char* v = std::getenv("RFSYNTH_LLM_MODEL")) cfg.model = v;
  if (const char* v = std::getenv("RFSYNTH_LLM_API_KEY")) cfg.api_key = v;
  return cfg;
}

GenResult generate_pair(const Prompt& prompt, TextGenClient* client, int retries, const TaskTemplate& tpl,
                        const Instance& inst, InstructionExample base) {
  GenResult r;
  base.instruction = prompt.user;
  base.info_levels_used = prompt.levels;
  base.grounding = inst.grounding;
  base.task_type = tpl.task_type;
  base.difficulty = tpl.difficulty;
  base.template_id = tpl.template_id;
  if (client) {
    for (int k = 1; k <= retries; ++k) {
      ++r.attempts;
      auto c = client->complete(prompt);
      if (!c.ok) {
        r.failures.push_back("attempt " + std::to_string(k) + ": transport: " + c.error);
        continue;
      }
      auto v = validate_answer(tpl, inst.grounding, c.text);
      if (v.ok) {
        base.answer = trim(c.text);
        base.source = "remote";
        r.example = std::move(base);
        return r;
      }
      r.failures.push_back("attempt " + std::to_string(k) + ": format: " + v.reason);
    }
  }
  base.answer = inst.offline_answer;
  base.source = client ? "fallback" : "offline";
  r.example = std::move(base);
  return r;
}

SynthOutcome synthesize_scene(const SceneRecord& rec, const caption::CaptionRecord& cap, const std::string& image_path,
                              const SynthConfig& cfg, const std::vector<TaskTemplate>& library, TextGenClient* client,
                              int retries) {
  SynthOutcome out;
  const auto root = derive_seed(cfg.seed, "instruct-" + rec.scene_id);
  for (int i = 0; i < cfg.per_scene; ++i) {
    const auto sel = select_template(derive_seed(root, "template", static_cast<std::uint64_t>(i)), cap, rec, library);
    if (!sel.tpl) {
      out.skipped.push_back(rec.scene_id + ": " + sel.skip_reason);
      break;
    }
    auto inst = make_instance(*sel.tpl, rec, cap, image_path, derive_seed(root, "instance", static_cast<std::uint64_t>(i)));
    if (!inst) {
      out.skipped.push_back(rec.scene_id + ": template " + sel.tpl->template_id + " has nothing to ask");
      continue;
    }
    InstructionExample base;
    char id[32];
    std::snprintf(id, sizeof id, "-i%04d", i);
    base.id = rec.scene_id + id;
    base.waveform_id = rec.scene_id;
    base.image_path = image_path;
    auto prompt = assemble_prompt(*sel.tpl, cap, inst->vars);
    auto r = generate_pair(prompt, client, retries, *sel.tpl, *inst, std::move(base));
    for (auto& f : r.failures) out.failures.push_back(r.example.id + ": " + f);
    out.examples.push_back(std::move(r.example));
  }
  return out;
}

void to_json(json& j, const InstructionExample& e) {
  json levels = json::array();
  for (auto l : e.info_levels_used.levels()) levels.push_back(caption::to_string(l));
  j = {{"id", e.id},
       {"waveform_id", e.waveform_id},
       {"image_path", e.image_path},
       {"instruction", e.instruction},
       {"answer", e.answer},
       {"task_type", to_string(e.task_type)},
       {"difficulty", bench::to_string(e.difficulty)},
       {"template_id", e.template_id},
       {"info_levels_used", levels},
       {"grounding",
        {{"target", target_name(e.grounding.target)},
         {"task", bench::to_string(e.grounding.key.task)},
         {"difficulty", bench::to_string(e.grounding.key.difficulty)},
         {"attribute", e.grounding.key.attribute},
         {"item_id", e.grounding.item_id},
         {"truth", e.grounding.truth}}},
       {"source", e.source}};
}

void from_json(const json& j, InstructionExample& e) {
  e.id = j.at("id").get<std::string>();
  e.waveform_id = j.at("waveform_id").get<std::string>();
  e.image_path = j.value("image_path", "");
  e.instruction = j.at("instruction").get<std::string>();
  e.answer = j.at("answer").get<std::string>();
  e.task_type = task_type_from_string(j.at("task_type").get<std::string>());
  e.difficulty = bench::difficulty_from_string(j.at("difficulty").get<std::string>());
  e.template_id = j.value("template_id", "");
  e.info_levels_used = {};
  for (const auto& l : j.value("info_levels_used", json::array())) e.info_levels_used.insert(caption::level_from_string(l.get<std::string>()));
  const auto& g = j.at("grounding");
  e.grounding.target = target_from_name(g.at("target").get<std::string>());
  e.grounding.key = {bench::task_from_string(g.at("task").get<std::string>()),
                     bench::difficulty_from_string(g.at("difficulty").get<std::string>()), g.value("attribute", "")};
  e.grounding.item_id = g.value("item_id", "");
  e.grounding.truth = g.at("truth");
  e.source = j.value("source", "offline");
}

void to_json(json& j, const DatasetManifest& m) {
  j = {{"counts", m.counts}, {"seed", m.seed},     {"config_hash", m.config_hash},
       {"K", m.K},           {"shards", m.shards}, {"content_hash", m.content_hash}};
}

DatasetManifest write_dataset(std::vector<InstructionExample> examples, const std::string& dir, std::uint64_t seed,
                              const std::string& config_hash, std::size_t shard_size) {
  namespace fs = std::filesystem;
  if (shard_size == 0) throw ConfigError("shard size must be positive");
  std::sort(examples.begin(), examples.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < examples.size(); ++i)
    if (examples[i].id == examples[i - 1].id) throw InputError("duplicate instruction id " + examples[i].id);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().filename().string().rfind("instructions-", 0) == 0) fs::remove(entry.path());
  DatasetManifest m;
  m.seed = seed;
  m.config_hash = config_hash;
  m.K = examples.size();
  std::string all;
  for (std::size_t s = 0; s * shard_size < examples.size(); ++s) {
    char name[40];
    std::snprintf(name, sizeof name, "instructions-%05zu.jsonl", s);
    std::string body;
    for (std::size_t i = s * shard_size; i < std::min(examples.size(), (s + 1) * shard_size); ++i) {
      ++m.counts[std::string(to_string(examples[i].task_type)) + "/" + std::string(bench::to_string(examples[i].difficulty))];
      body += json(examples[i]).dump() + "\n";
    }
    const auto path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw IoError("shard " + std::to_string(s) + ": cannot write '" + path + "'");
    m.shards.push_back(name);
    all += body;
  }
  m.content_hash = digest(all);
  std::ofstream out((fs::path(dir) / "manifest.json").string(), std::ios::binary);
  out << json(m).dump(2) << "\n";
  if (!out) throw IoError("cannot write instruction manifest in '" + dir + "'");
  return m;
}

std::vector<InstructionExample> read_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto mpath = fs::path(dir) / "manifest.json";
  std::ifstream min(mpath);
  if (!min) throw StageError("no instruction dataset at '" + dir + "'");
  const auto manifest = json::parse(min);
  std::vector<InstructionExample> out;
  for (const auto& shard : manifest.at("shards")) {
    const auto path = (fs::path(dir) / shard.get<std::string>()).string();
    std::ifstream in(path);
    if (!in) throw IoError("cannot read shard '" + path + "'");
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) out.push_back(json::parse(line).get<InstructionExample>());
  }
  return out;
}

}  // namespace rfsynth::instruct
