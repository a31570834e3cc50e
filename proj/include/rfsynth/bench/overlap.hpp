#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rfsynth/scene/types.hpp"

namespace rfsynth::bench {

enum class OverlapType { neither, time_only, frequency_only, both };
std::string_view to_string(OverlapType t);
OverlapType overlap_type_from_string(std::string_view s);
inline constexpr OverlapType kAllOverlapTypes[] = {OverlapType::neither, OverlapType::time_only,
                                                   OverlapType::frequency_only, OverlapType::both};

enum class OverlapLevel { none, slightly, considerably, almost_fully };
std::string_view to_string(OverlapLevel l);
OverlapLevel overlap_level_from_string(std::string_view s);

/// Measure of the intersection; touching endpoints give 0.
double intersection_length(const scene::Interval& a, const scene::Interval& b);
/// |A ∩ B| / |A ∪ B|, 0 when the union is empty.
double iou(const scene::Interval& a, const scene::Interval& b);

OverlapType overlap_type(const scene::SignalRecord& a, const scene::SignalRecord& b);

/// Aggregates pairwise types: any both -> both; time_only and frequency_only
/// together -> both; else time_only; else frequency_only; else neither.
OverlapType global_overlap_label(std::span<const OverlapType> pair_types);
/// Over all unordered signal pairs. Throws InputError for fewer than 2 signals.
OverlapType global_overlap_label(const scene::SceneRecord& rec);

std::pair<double, double> overlap_ratios(const scene::SignalRecord& a, const scene::SignalRecord& b);

/// r < 0.01 none, < 0.3 slightly, < 0.6 considerably, else almost_fully.
OverlapLevel quantize_ratio(double r);

/// Consecutive pairs under start-time order and under f_low order, merged,
/// deduplicated, as (lower id, higher id) sorted ascending. Ties in the sort
/// key break by id.
std::vector<std::pair<int, int>> adjacent_pairs(const scene::SceneRecord& rec);

}  // namespace rfsynth::bench
