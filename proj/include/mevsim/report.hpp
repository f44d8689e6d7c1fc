#pragma once

// Rendering and parsing of experiment outputs: the CSV row format written by
// `simulate --out`, the comparison table, the JSON summary, and the flat
// key = value configuration file. Floating-point fields are always rendered
// through format_g9 so byte-identical reports follow from identical runs.

#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mevsim/sim_engine.hpp"

namespace mevsim {

// 9 significant digits, the fixed numeric rendering for all report output.
std::string format_g9(double v);

// One '#'-prefixed line echoing the full configuration and seed.
std::string report_header(const ExperimentConfig& cfg);

std::string render_summary_text(const ExperimentReport& report);

// Single JSON object: strategy, mean_block_mev, mean_terminal_disorder,
// entropy_final_bits, good_mev_count, bad_mev_count, seed.
std::string render_summary_json(const ExperimentReport& report);

// CSV with header "record,index,value": per-step entropy and its standard
// error, per-block mean MEV, then the summary scalars.
std::string render_simulate_rows(const ExperimentReport& report);

// CSV table with one row per strategy.
std::string render_compare_table(std::span<const ExperimentReport> reports);
std::string render_compare_json(std::span<const ExperimentReport> reports);

struct CsvRow {
  std::string record;
  std::string index;
  std::string value;
};

// Parses a record,index,value file back into rows; validates the header.
std::vector<CsvRow> parse_csv_rows(std::istream& in);

// Flat `key = value` text; '#' comments and blank lines are skipped.
std::map<std::string, std::string> parse_config_file(std::istream& in);

// Applies one key to the config; throws std::invalid_argument on unknown
// keys or unparseable values.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

}  // namespace mevsim
