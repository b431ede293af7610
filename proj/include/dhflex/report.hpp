#pragma once

#include <string>
#include <vector>

#include "dhflex/econ.hpp"
#include "dhflex/engine.hpp"

namespace dhflex::report {

// Writes trace.csv, population.csv, network.csv and summary.json into `dir`
// (created if needed).
void write_run(const engine::SimulationResult& result, const engine::ScenarioConfig& config,
               const std::string& dir);

std::string summary_json(const engine::SimulationResult& result, const engine::ScenarioConfig& config);

// Absolute columns of a comparison row from a summary.json written by write_run;
// deltas are left for econ::fill_deltas. Throws IngestError on a malformed file.
econ::ReportRow read_summary(const std::string& path);

// Writes table5.csv, profit.csv and comparison.json.
void write_comparison(const std::vector<econ::ReportRow>& rows, const std::string& dir);

}  // namespace dhflex::report
