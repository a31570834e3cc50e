#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rfsynth/bench/bench.hpp"
#include "rfsynth/caption/caption.hpp"
#include "rfsynth/scene/types.hpp"

namespace rfsynth::instruct {

enum class TaskType {
  count,
  mod_recognition,
  tech_recognition,
  info_extraction,
  overlap_analysis,
  consistency_check,
  open_description
};
inline constexpr TaskType kAllTaskTypes[] = {TaskType::count,           TaskType::mod_recognition,
                                             TaskType::tech_recognition, TaskType::info_extraction,
                                             TaskType::overlap_analysis, TaskType::consistency_check,
                                             TaskType::open_description};
std::string_view to_string(TaskType t);
TaskType task_type_from_string(std::string_view s);

enum class AnswerFormat { label, integer, interval, json, paragraph };
std::string_view to_string(AnswerFormat f);

/// What a template asks about. Bench-backed targets reuse the benchmark item
/// builder, so their answers are scored by the benchmark parser.
enum class Target {
  signal_count,     // generic bursts in the scene
  family_count,     // distinct modulation families
  overlap_pairs,    // pairs of bursts overlapping on both axes
  wbmc,
  wbod,
  wtr,
  wnuc,
  nrie,
  claim,            // yes/no check of a stated claim
  description,      // caption text of the template's levels
  structured,       // JSON object summarizing the scene
};

/// Scenes a template can be applied to.
enum class Scope { generic, generic_multi, technology, wlan, nr, nr_dl, nr_ul, any };

struct TaskTemplate {
  std::string template_id;
  TaskType task_type = TaskType::count;
  bench::Difficulty difficulty = bench::Difficulty::easy;
  caption::LevelSet required_levels;
  AnswerFormat answer_format = AnswerFormat::integer;
  /// Placeholders: {candidates}, {classes}, {pair}, {labels}, {bucket},
  /// {claim}. Every placeholder must be resolvable for the chosen instance.
  std::string user_prompt_pattern;
  double weight = 1.0;
  Target target = Target::signal_count;
  Scope scope = Scope::generic;
  std::string attribute;  // NRIE attribute for Target::nrie
};

/// Throws ConfigError for an empty level set or a format that the target's
/// parser cannot read.
void validate(const TaskTemplate& tpl);

/// The shipped library: at least three templates per task type and
/// difficulty.
const std::vector<TaskTemplate>& default_library();

/// Structured target of one instruction, sufficient to re-score its answer.
struct Grounding {
  Target target = Target::signal_count;
  bench::ItemKey key{bench::Task::WBMC, bench::Difficulty::easy, {}};
  std::string item_id;  // benchmark item behind the question, when any
  nlohmann::json truth;
};

/// One concrete question for a (template, scene) pair.
struct Instance {
  std::map<std::string, std::string> vars;
  Grounding grounding;
  std::string offline_answer;
};

bool in_scope(Scope s, const scene::SceneRecord& rec);

/// Draws the question details for a template; nullopt when the scene has
/// nothing to ask (e.g. no adjacent pairs).
std::optional<Instance> make_instance(const TaskTemplate& tpl, const scene::SceneRecord& rec,
                                      const caption::CaptionRecord& cap, const std::string& image_path,
                                      std::uint64_t seed);

struct Selection {
  const TaskTemplate* tpl = nullptr;
  std::string skip_reason;
};

/// Weighted choice among templates in scope for the scene whose levels the
/// caption carries. Deterministic in seed.
Selection select_template(std::uint64_t seed, const caption::CaptionRecord& cap, const scene::SceneRecord& rec,
                          const std::vector<TaskTemplate>& library);

inline constexpr std::string_view kSystemPrompt =
    "You are an RF expert who reads radio spectrograms. Answer the user's question about the spectrogram using "
    "only what it shows. Use the hidden context, which describes the capture, but never mention it. "
    "Follow the requested answer format exactly.";

struct Prompt {
  std::string system;
  std::string user;
  std::string hidden_context;
  caption::LevelSet levels;
};

/// Fills the pattern and renders only the required levels as hidden context.
/// Throws InputError if the caption lacks a required level or a placeholder
/// has no value.
Prompt assemble_prompt(const TaskTemplate& tpl, const caption::CaptionRecord& cap,
                       const std::map<std::string, std::string>& vars = {});

/// Parses an answer with the parser of its target; fails with a reason.
bench::ParsedAnswer parse_for(const Grounding& g, std::string_view answer, const bench::BenchOptions& opts = {});
/// Format check applied to remote responses.
bench::ParsedAnswer validate_answer(const TaskTemplate& tpl, const Grounding& g, std::string_view answer);
/// 1 when the answer matches the grounding truth.
double score_against(const Grounding& g, std::string_view answer, const bench::BenchOptions& opts = {});

struct ClientConfig {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key;
  double timeout_s = 30.0;
  int retries = 3;
  int max_in_flight = 1;
};

/// Base URL, model and key from RFSYNTH_LLM_BASE_URL, RFSYNTH_LLM_MODEL and
/// RFSYNTH_LLM_API_KEY; values already set in `cfg` are kept when the
/// variable is absent.
ClientConfig client_from_env(ClientConfig cfg = {});

struct Completion {
  bool ok = false;
  std::string text;
  std::string error;
};

class TextGenClient {
 public:
  virtual ~TextGenClient() = default;
  virtual Completion complete(const Prompt& prompt) = 0;
};

/// Chat-completion JSON over HTTP at temperature 0.
class HttpTextGenClient : public TextGenClient {
 public:
  explicit HttpTextGenClient(ClientConfig cfg);
  Completion complete(const Prompt& prompt) override;
  static nlohmann::json request_body(const Prompt& prompt, const std::string& model);

 private:
  ClientConfig cfg_;
};

struct InstructionExample {
  std::string id;
  std::string waveform_id;
  std::string image_path;
  std::string instruction;
  std::string answer;
  TaskType task_type = TaskType::count;
  bench::Difficulty difficulty = bench::Difficulty::easy;
  std::string template_id;
  caption::LevelSet info_levels_used;
  Grounding grounding;
  std::string source = "offline";  // offline, remote, fallback
};

void to_json(nlohmann::json& j, const InstructionExample& e);
void from_json(const nlohmann::json& j, InstructionExample& e);

struct GenResult {
  InstructionExample example;
  int attempts = 0;
  /// One entry per rejected or failed remote attempt.
  std::vector<std::string> failures;
};

/// With a null client the answer is the instance's offline answer. A remote
/// client is retried up to its budget; the record then falls back offline.
GenResult generate_pair(const Prompt& prompt, TextGenClient* client, int retries, const TaskTemplate& tpl,
                        const Instance& inst, InstructionExample base);

struct SynthConfig {
  int per_scene = 52;
  std::uint64_t seed = 0;
  std::size_t shard_size = 5000;
};

struct SynthOutcome {
  std::vector<InstructionExample> examples;
  std::vector<std::string> skipped;   // "<scene_id>: reason"
  std::vector<std::string> failures;  // "<example id>: reason"
};

/// Instructions for one scene, ids "<scene_id>-i0000", ...
SynthOutcome synthesize_scene(const scene::SceneRecord& rec, const caption::CaptionRecord& cap,
                              const std::string& image_path, const SynthConfig& cfg,
                              const std::vector<TaskTemplate>& library = default_library(),
                              TextGenClient* client = nullptr, int retries = 3);

struct DatasetManifest {
  std::map<std::string, std::size_t> counts;  // "<task_type>/<difficulty>"
  std::uint64_t seed = 0;
  std::string config_hash;
  std::size_t K = 0;
  std::vector<std::string> shards;
  std::string content_hash;
};

void to_json(nlohmann::json& j, const DatasetManifest& m);

/// Sorts by id and writes `<dir>/instructions-%05zu.jsonl` shards plus
/// `<dir>/manifest.json`. Throws IoError naming the shard on failure.
DatasetManifest write_dataset(std::vector<InstructionExample> examples, const std::string& dir, std::uint64_t seed,
                              const std::string& config_hash, std::size_t shard_size = 5000);
std::vector<InstructionExample> read_dataset(const std::string& dir);

}  // namespace rfsynth::instruct
