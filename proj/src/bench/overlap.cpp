#include "rfsynth/bench/overlap.hpp"

#include <algorithm>
#include <set>

#include "rfsynth/core/error.hpp"

namespace rfsynth::bench {

std::string_view to_string(OverlapType t) {
  switch (t) {
    case OverlapType::neither: return "neither";
    case OverlapType::time_only: return "time_only";
    case OverlapType::frequency_only: return "frequency_only";
    case OverlapType::both: return "both";
  }
  return "?";
}

OverlapType overlap_type_from_string(std::string_view s) {
  for (auto t : kAllOverlapTypes)
    if (to_string(t) == s) return t;
  throw InputError("unknown overlap type '" + std::string(s) + "'");
}

std::string_view to_string(OverlapLevel l) {
  switch (l) {
    case OverlapLevel::none: return "none";
    case OverlapLevel::slightly: return "slightly";
    case OverlapLevel::considerably: return "considerably";
    case OverlapLevel::almost_fully: return "almost_fully";
  }
  return "?";
}

OverlapLevel overlap_level_from_string(std::string_view s) {
  for (auto l : {OverlapLevel::none, OverlapLevel::slightly, OverlapLevel::considerably, OverlapLevel::almost_fully})
    if (to_string(l) == s) return l;
  throw InputError("unknown overlap level '" + std::string(s) + "'");
}

double intersection_length(const scene::Interval& a, const scene::Interval& b) {
  return std::max(0.0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo));
}

double iou(const scene::Interval& a, const scene::Interval& b) {
  const double inter = intersection_length(a, b);
  const double uni = a.length() + b.length() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

OverlapType overlap_type(const scene::SignalRecord& a, const scene::SignalRecord& b) {
  const bool t = intersection_length(a.t_interval, b.t_interval) > 0.0;
  const bool f = intersection_length(a.f_interval, b.f_interval) > 0.0;
  if (t && f) return OverlapType::both;
  if (t) return OverlapType::time_only;
  if (f) return OverlapType::frequency_only;
  return OverlapType::neither;
}

OverlapType global_overlap_label(std::span<const OverlapType> pairs) {
  auto has = [&](OverlapType t) { return std::find(pairs.begin(), pairs.end(), t) != pairs.end(); };
  if (has(OverlapType::both)) return OverlapType::both;
  const bool t = has(OverlapType::time_only);
  const bool f = has(OverlapType::frequency_only);
  if (t && f) return OverlapType::both;
  if (t) return OverlapType::time_only;
  if (f) return OverlapType::frequency_only;
  return OverlapType::neither;
}

OverlapType global_overlap_label(const scene::SceneRecord& rec) {
  if (rec.signals.size() < 2) throw InputError("global overlap label needs at least 2 signals");
  std::vector<OverlapType> types;
  for (std::size_t i = 0; i < rec.signals.size(); ++i)
    for (std::size_t j = i + 1; j < rec.signals.size(); ++j) types.push_back(overlap_type(rec.signals[i], rec.signals[j]));
  return global_overlap_label(types);
}

std::pair<double, double> overlap_ratios(const scene::SignalRecord& a, const scene::SignalRecord& b) {
  return {iou(a.t_interval, b.t_interval), iou(a.f_interval, b.f_interval)};
}

OverlapLevel quantize_ratio(double r) {
  if (r < 0.01) return OverlapLevel::none;
  if (r < 0.3) return OverlapLevel::slightly;
  if (r < 0.6) return OverlapLevel::considerably;
  return OverlapLevel::almost_fully;
}

std::vector<std::pair<int, int>> adjacent_pairs(const scene::SceneRecord& rec) {
  if (rec.signals.size() < 2) throw InputError("adjacent pairs need at least 2 signals");
  std::vector<const scene::SignalRecord*> order;
  for (const auto& s : rec.signals) order.push_back(&s);
  std::set<std::pair<int, int>> out;
  auto collect = [&](auto key) {
    std::stable_sort(order.begin(), order.end(), [&](auto* a, auto* b) {
      const double ka = key(*a), kb = key(*b);
      return ka != kb ? ka < kb : a->id < b->id;
    });
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
      out.insert(std::minmax(order[i]->id, order[i + 1]->id));
  };
  collect([](const scene::SignalRecord& s) { return s.t_interval.lo; });
  collect([](const scene::SignalRecord& s) { return s.f_interval.lo; });
  return {out.begin(), out.end()};
}

}  // namespace rfsynth::bench
