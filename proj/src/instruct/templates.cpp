#include "rfsynth/instruct/instruct.hpp"

namespace rfsynth::instruct {

namespace {

using bench::Difficulty;
using caption::Level;
using caption::LevelSet;

constexpr auto E = Difficulty::easy;
constexpr auto M = Difficulty::medium;
constexpr auto H = Difficulty::hard;

const LevelSet kSummary{Level::summary};
const LevelSet kSignals{Level::signal_visual, Level::signal_context};
const LevelSet kSignalContext{Level::signal_context};
const LevelSet kOverlap{Level::global_visual, Level::signal_visual};
const LevelSet kTech{Level::summary, Level::global_context};
const LevelSet kTechVisual{Level::global_visual, Level::global_context};
const LevelSet kInfo{Level::summary, Level::global_visual, Level::global_context};
const LevelSet kGlobal{Level::summary, Level::global_visual, Level::global_context};

std::vector<TaskTemplate> build() {
  using T = TaskType;
  using F = AnswerFormat;
  using G = Target;
  using S = Scope;
  std::vector<TaskTemplate> lib = {
      // count
      {"count-e1", T::count, E, kSummary, F::integer, "How many distinct signals are present?", 1, G::signal_count, S::generic, ""},
      {"count-e2", T::count, E, kSummary, F::integer, "Count the separate transmissions visible in this spectrogram. Reply with one integer.", 1, G::signal_count, S::generic, ""},
      {"count-e3", T::count, E, kSummary, F::integer, "How many bursts can you make out in this capture? Give only the number.", 1, G::signal_count, S::generic, ""},
      {"count-m1", T::count, M, kSignalContext, F::integer, "How many different modulation families appear among the signals? Reply with one integer.", 1, G::family_count, S::generic, ""},
      {"count-m2", T::count, M, kSignalContext, F::integer, "Group the signals by modulation family (PSK, QAM, FSK, OFDM, AM, FM). How many groups are there?", 1, G::family_count, S::generic, ""},
      {"count-m3", T::count, M, kSignalContext, F::integer, "Counting each modulation family once, how many families are present?", 1, G::family_count, S::generic, ""},
      {"count-h1", T::count, H, kOverlap, F::integer, "How many pairs of signals overlap in both time and frequency? Reply with one integer.", 1, G::overlap_pairs, S::generic_multi, ""},
      {"count-h2", T::count, H, kOverlap, F::integer, "Count the signal pairs that collide, sharing both some time span and some bandwidth.", 1, G::overlap_pairs, S::generic_multi, ""},
      {"count-h3", T::count, H, kOverlap, F::integer, "Considering every pair of signals, how many pairs share time and frequency at once?", 1, G::overlap_pairs, S::generic_multi, ""},
      // mod_recognition
      {"mod-e1", T::mod_recognition, E, kSignals, F::label, "Name the modulation family (psk, qam, fsk, ofdm, am, fm) of each signal, ordered by start time, as a comma-separated list.", 1, G::wbmc, S::generic, ""},
      {"mod-e2", T::mod_recognition, E, kSignals, F::label, "For every signal from earliest to latest start, which modulation family does it use? Families: psk, qam, fsk, ofdm, am, fm.", 1, G::wbmc, S::generic, ""},
      {"mod-e3", T::mod_recognition, E, kSignals, F::label, "List the modulation families of the signals in time order (psk, qam, fsk, ofdm, am or fm).", 1, G::wbmc, S::generic, ""},
      {"mod-m1", T::mod_recognition, M, kSignals, F::label, "Identify the modulation of each signal in order of start time. Choose from: {candidates}.", 1, G::wbmc, S::generic, ""},
      {"mod-m2", T::mod_recognition, M, kSignals, F::label, "The signals use modulations from this list: {candidates}. Give the modulation of each signal, earliest first.", 1, G::wbmc, S::generic, ""},
      {"mod-m3", T::mod_recognition, M, kSignals, F::label, "Using only the candidates {candidates}, label every signal in time order.", 1, G::wbmc, S::generic, ""},
      {"mod-h1", T::mod_recognition, H, kSignals, F::label, "Identify the exact modulation class of each signal in order of start time. Possible classes: {classes}.", 1, G::wbmc, S::generic, ""},
      {"mod-h2", T::mod_recognition, H, kSignals, F::label, "Which modulation does each signal use, from earliest to latest? Answer with class names such as {classes}.", 1, G::wbmc, S::generic, ""},
      {"mod-h3", T::mod_recognition, H, kSignals, F::label, "Classify every burst by its exact modulation ({classes}), listed by start time.", 1, G::wbmc, S::generic, ""},
      // tech_recognition
      {"tech-e1", T::tech_recognition, E, kSummary, F::label, "Which technology and link direction does this spectrogram show? Choose one of: {labels}.", 1, G::wtr, S::technology, ""},
      {"tech-e2", T::tech_recognition, E, kSummary, F::label, "Pick the label that matches this capture: {labels}.", 1, G::wtr, S::technology, ""},
      {"tech-e3", T::tech_recognition, E, kSummary, F::label, "What kind of transmission is this? Options: {labels}.", 1, G::wtr, S::technology, ""},
      {"tech-m1", T::tech_recognition, M, kTech, F::label, "Identify the air interface in this spectrogram, including the link direction for cellular signals.", 1, G::wtr, S::technology, ""},
      {"tech-m2", T::tech_recognition, M, kTech, F::label, "Which wireless standard produced this capture? For 5G NR say whether it is downlink or uplink.", 1, G::wtr, S::technology, ""},
      {"tech-m3", T::tech_recognition, M, kTech, F::label, "Name the technology shown here (for Wi-Fi give the amendment, for NR the direction).", 1, G::wtr, S::technology, ""},
      {"tech-h1", T::tech_recognition, H, kTechVisual, F::label, "From the time-frequency structure alone, determine the technology and direction. Answer with one of: {labels}.", 1, G::wtr, S::technology, ""},
      {"tech-h2", T::tech_recognition, H, kTechVisual, F::label, "Judging by the resource layout and burst pattern, which of {labels} is this?", 1, G::wtr, S::technology, ""},
      {"tech-h3", T::tech_recognition, H, kTechVisual, F::label, "Explain briefly what structure you see, then give the technology label ({labels}) after 'Answer:'.", 1, G::wtr, S::technology, ""},
      // info_extraction
      {"info-e1", T::info_extraction, E, kInfo, F::integer, "What is the subcarrier spacing of this 5G NR signal? Answer with one of 15, 30, 60, 120 (kHz).", 1, G::nrie, S::nr, "scs"},
      {"info-e2", T::info_extraction, E, kInfo, F::label, "Which SSB pattern (A, B, C or D) does this NR downlink use? Say N/A if there is no SSB.", 1, G::nrie, S::nr_dl, "ssb_pattern"},
      {"info-e3", T::info_extraction, E, kInfo, F::interval, "How many Wi-Fi users are scheduled in this capture? Answer with the bucket of width {bucket} that contains the count, written as [s, e].", 1, G::wnuc, S::wlan, ""},
      {"info-m1", T::info_extraction, M, kInfo, F::integer, "How many distinct UEs are served in this NR capture? Reply with one integer.", 1, G::nrie, S::nr, "ue_count"},
      {"info-m2", T::info_extraction, M, kInfo, F::interval, "Estimate the number of WLAN users as a bucket [s, e] of width {bucket}.", 1, G::wnuc, S::wlan, ""},
      {"info-m3", T::info_extraction, M, kInfo, F::integer, "Count the user equipments with their own data allocation in this 5G NR grid.", 1, G::nrie, S::nr, "ue_count"},
      {"info-h1", T::info_extraction, H, kInfo, F::integer, "How many CSI-RS resources does this NR downlink carry? Reply with one integer.", 1, G::nrie, S::nr_dl, "csirs_count"},
      {"info-h2", T::info_extraction, H, kInfo, F::integer, "How many SRS resources appear in this NR uplink? Reply with one integer.", 1, G::nrie, S::nr_ul, "srs_count"},
      {"info-h3", T::info_extraction, H, kInfo, F::integer, "How many distinct WLAN users are active? Give the exact count below 10, otherwise the nearest multiple of 10.", 1, G::wnuc, S::wlan, ""},
      // overlap_analysis
      {"ovl-e1", T::overlap_analysis, E, kOverlap, F::label, "Taken together, do the signals overlap in time, in frequency, in both, or neither? Answer neither, time-only, frequency-only or both.", 1, G::wbod, S::generic_multi, ""},
      {"ovl-e2", T::overlap_analysis, E, kOverlap, F::label, "Describe the overall overlap of the signals with one word: neither, time-only, frequency-only or both.", 1, G::wbod, S::generic_multi, ""},
      {"ovl-e3", T::overlap_analysis, E, kOverlap, F::label, "Is there any time overlap, frequency overlap, both, or none among the signals? Reply neither, time-only, frequency-only or both.", 1, G::wbod, S::generic_multi, ""},
      {"ovl-m1", T::overlap_analysis, M, kOverlap, F::label, "Consider {pair}. Do they overlap in time, frequency, both, or neither?", 1, G::wbod, S::generic_multi, ""},
      {"ovl-m2", T::overlap_analysis, M, kOverlap, F::label, "Look at {pair}. Which axes do they share: neither, time-only, frequency-only or both?", 1, G::wbod, S::generic_multi, ""},
      {"ovl-m3", T::overlap_analysis, M, kOverlap, F::label, "For {pair}, classify their overlap as neither, time-only, frequency-only or both.", 1, G::wbod, S::generic_multi, ""},
      {"ovl-h1", T::overlap_analysis, H, kOverlap, F::label, "Consider {pair}. How strongly do they overlap? Answer 'time: <level>, frequency: <level>' with levels none, slightly, considerably, almost fully.", 1, G::wbod, S::generic_multi, ""},
      {"ovl-h2", T::overlap_analysis, H, kOverlap, F::label, "Rate the time and frequency overlap of {pair} as none, slightly, considerably or almost fully, in the form 'time: X, frequency: Y'.", 1, G::wbod, S::generic_multi, ""},
      {"ovl-h3", T::overlap_analysis, H, kOverlap, F::label, "Quantify the overlap between {pair} on each axis (none, slightly, considerably, almost fully). Format: time: X, frequency: Y.", 1, G::wbod, S::generic_multi, ""},
      // consistency_check
      {"cons-e1", T::consistency_check, E, kSummary, F::label, "A note on this capture reads: \"{claim}\" Is that consistent with the spectrogram? Answer yes or no.", 1, G::claim, S::any, ""},
      {"cons-e2", T::consistency_check, E, kSummary, F::label, "True or not: {claim} Reply yes or no.", 1, G::claim, S::any, ""},
      {"cons-e3", T::consistency_check, E, kSummary, F::label, "Someone describes this spectrogram as follows: \"{claim}\" Do you agree? Answer yes or no.", 1, G::claim, S::any, ""},
      {"cons-m1", T::consistency_check, M, kSignals, F::label, "Check this statement against the spectrogram: \"{claim}\" Answer yes or no.", 1, G::claim, S::generic, ""},
      {"cons-m2", T::consistency_check, M, kSignals, F::label, "Is the following claim about one of the signals correct? \"{claim}\" Reply yes or no.", 1, G::claim, S::generic, ""},
      {"cons-m3", T::consistency_check, M, kSignals, F::label, "Verify: {claim} Answer yes or no.", 1, G::claim, S::generic, ""},
      {"cons-h1", T::consistency_check, H, kOverlap, F::label, "A report states: \"{claim}\" Does the spectrogram support it? Answer yes or no.", 1, G::claim, S::generic_multi, ""},
      {"cons-h2", T::consistency_check, H, kOverlap, F::label, "Is this overlap statement accurate? \"{claim}\" Reply yes or no.", 1, G::claim, S::generic_multi, ""},
      {"cons-h3", T::consistency_check, H, kOverlap, F::label, "Decide whether the following holds for this capture: {claim} Answer yes or no.", 1, G::claim, S::generic_multi, ""},
      // open_description
      {"desc-e1", T::open_description, E, kSummary, F::paragraph, "Describe this spectrogram in one sentence.", 1, G::description, S::any, ""},
      {"desc-e2", T::open_description, E, kSummary, F::paragraph, "Give a short summary of what this capture contains.", 1, G::description, S::any, ""},
      {"desc-e3", T::open_description, E, kSummary, F::paragraph, "What is in this spectrogram? Keep it brief.", 1, G::description, S::any, ""},
      {"desc-m1", T::open_description, M, kGlobal, F::paragraph, "Describe the capture: what it contains, its overall structure and its configuration.", 1, G::description, S::any, ""},
      {"desc-m2", T::open_description, M, kGlobal, F::paragraph, "Write a paragraph explaining the content and layout of this spectrogram.", 1, G::description, S::any, ""},
      {"desc-m3", T::open_description, M, kGlobal, F::paragraph, "Summarize this RF scene, including its global structure and capture settings.", 1, G::description, S::any, ""},
      {"desc-h1", T::open_description, H, LevelSet::all(), F::json, "Describe this scene as a JSON object with keys technology, link, signal_count and signals (each with id, mod_class, start_us, center_mhz).", 1, G::structured, S::any, ""},
      {"desc-h2", T::open_description, H, LevelSet::all(), F::json, "Return a JSON summary of every signal in the capture: technology, link, signal_count, and a signals array whose objects carry id, mod_class, start_us and center_mhz.", 1, G::structured, S::any, ""},
      {"desc-h3", T::open_description, H, LevelSet::all(), F::json, "Produce a machine-readable JSON description of this spectrogram (technology, link, signal_count, signals with id, mod_class, start_us, center_mhz).", 1, G::structured, S::any, ""},
  };
  for (const auto& t : lib) validate(t);
  return lib;
}

}  // namespace

const std::vector<TaskTemplate>& default_library() {
  static const std::vector<TaskTemplate> lib = build();
  return lib;
}

}  // namespace rfsynth::instruct
