#pragma once

#include <string>
#include <vector>

#include "nsplan/harness.hpp"

namespace nsplan {

/// Stable shortest-roundtrip formatting so identical runs produce identical
/// bytes.
std::string format_number(double value);

/// One row per episode; no timing columns, so reruns with the same seed are
/// byte-identical.
std::string render_raw_csv(const std::vector<ScenarioResult>& results);

/// One row per cell: mean, stderr, per-decision time, mode occupancy.
std::string render_summary_csv(const std::vector<ScenarioResult>& results);
std::string render_summary_json(const std::vector<ScenarioResult>& results);

/// Plain-text table for terminal output.
std::string render_summary_table(const std::vector<ScenarioResult>& results);

std::string render_timing_csv(const std::vector<TimingRow>& rows);
std::string render_timing_table(const std::vector<TimingRow>& rows);

/// Return-versus-p line plot, one polyline per planner column.
std::string render_return_vs_p_svg(const std::vector<ScenarioResult>& results,
                                   const std::string& env_name);

/// Writes raw.csv, summary.csv and summary.json under `directory`; adds
/// plots/<env>.svg when `plots` is set. Creates the directory if needed.
void write_results(const std::vector<ScenarioResult>& results, const std::string& directory,
                   bool plots);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace nsplan
