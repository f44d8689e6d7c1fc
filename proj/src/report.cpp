#include "mevsim/report.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mevsim {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad numeric value for " + key + ": '" + value + "'");
  }
  if (used != value.size()) {
    throw std::invalid_argument("trailing characters in value for " + key + ": '" + value + "'");
  }
  return parsed;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  std::int64_t parsed = 0;
  try {
    parsed = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer value for " + key + ": '" + value + "'");
  }
  if (used != value.size()) {
    throw std::invalid_argument("trailing characters in value for " + key + ": '" + value + "'");
  }
  return parsed;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  std::uint64_t parsed = 0;
  try {
    parsed = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad seed value for " + key + ": '" + value + "'");
  }
  if (used != value.size()) {
    throw std::invalid_argument("trailing characters in value for " + key + ": '" + value + "'");
  }
  return parsed;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("bad boolean value for " + key + ": '" + value + "'");
}

double entropy_final_bits(const ExperimentReport& report) {
  return report.trajectory.per_step_entropy.empty() ? 0.0
                                                    : report.trajectory.per_step_entropy.back();
}

void append_json_summary(std::string& out, const ExperimentReport& report) {
  out += "{\"strategy\":\"";
  out += strategy_name(report.config.strategy);
  out += "\",\"mean_block_mev\":";
  out += format_g9(report.mean_block_mev);
  out += ",\"mean_terminal_disorder\":";
  out += format_g9(report.mean_terminal_disorder);
  out += ",\"entropy_final_bits\":";
  out += format_g9(entropy_final_bits(report));
  out += ",\"good_mev_count\":";
  out += std::to_string(report.good_mev_count);
  out += ",\"bad_mev_count\":";
  out += std::to_string(report.bad_mev_count);
  out += ",\"seed\":";
  out += std::to_string(report.master_seed);
  out += "}";
}

}  // namespace

std::string format_g9(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", v);
  return buffer;
}

std::string report_header(const ExperimentConfig& cfg) {
  std::string line = "# strategy=";
  line += strategy_name(cfg.strategy);
  line += " p=" + format_g9(cfg.p);
  line += " n=" + std::to_string(cfg.n);
  line += " blocks_per_run=" + std::to_string(cfg.blocks_per_run);
  line += " mempool_size=" + std::to_string(cfg.effective_mempool_size());
  line += " runs=" + std::to_string(cfg.runs);
  line += " alpha=" + format_g9(cfg.alpha);
  line += " unit_value=" + std::to_string(cfg.payoff.unit_value());
  line += " seed=" + std::to_string(cfg.master_seed);
  line += "\n";
  return line;
}

std::string render_summary_text(const ExperimentReport& report) {
  std::string out = report_header(report.config);
  out += "mean_block_mev = " + format_g9(report.mean_block_mev) + "\n";
  out += "block_mev_variance = " + format_g9(report.block_mev_variance) + "\n";
  out += "mean_terminal_disorder = " + format_g9(report.mean_terminal_disorder) + "\n";
  out += "mean_terminal_available_value = " + format_g9(report.mean_terminal_available_value) +
         "\n";
  out += "entropy_final_bits = " + format_g9(entropy_final_bits(report)) + "\n";
  out += "good_mev_count = " + std::to_string(report.good_mev_count) + "\n";
  out += "bad_mev_count = " + std::to_string(report.bad_mev_count) + "\n";
  out += "total_mev_payoff = " + std::to_string(report.total_mev_payoff) + "\n";
  out += "total_searcher_balance_delta = " + std::to_string(report.total_searcher_balance_delta) +
         "\n";
  return out;
}

std::string render_summary_json(const ExperimentReport& report) {
  std::string out;
  append_json_summary(out, report);
  out += "\n";
  return out;
}

std::string render_simulate_rows(const ExperimentReport& report) {
  std::string out = "record,index,value\n";
  const auto& entropy_steps = report.trajectory.per_step_entropy;
  for (std::size_t k = 0; k < entropy_steps.size(); ++k) {
    out += "step_entropy_bits," + std::to_string(k) + "," + format_g9(entropy_steps[k]) + "\n";
  }
  for (std::size_t k = 0; k < report.per_step_entropy_se.size(); ++k) {
    out += "step_entropy_se_bits," + std::to_string(k) + "," +
           format_g9(report.per_step_entropy_se[k]) + "\n";
  }
  for (std::size_t k = 0; k < report.trajectory.per_step_delta.size(); ++k) {
    out += "step_entropy_delta_bits," + std::to_string(k) + "," +
           format_g9(report.trajectory.per_step_delta[k]) + "\n";
  }
  out += "summary,strategy," + std::string(strategy_name(report.config.strategy)) + "\n";
  out += "summary,mean_block_mev," + format_g9(report.mean_block_mev) + "\n";
  out += "summary,block_mev_variance," + format_g9(report.block_mev_variance) + "\n";
  out += "summary,mean_terminal_disorder," + format_g9(report.mean_terminal_disorder) + "\n";
  out += "summary,mean_terminal_available_value," +
         format_g9(report.mean_terminal_available_value) + "\n";
  out += "summary,entropy_final_bits," + format_g9(entropy_final_bits(report)) + "\n";
  out += "summary,good_mev_count," + std::to_string(report.good_mev_count) + "\n";
  out += "summary,bad_mev_count," + std::to_string(report.bad_mev_count) + "\n";
  out += "summary,total_mev_payoff," + std::to_string(report.total_mev_payoff) + "\n";
  out += "summary,total_searcher_balance_delta," +
         std::to_string(report.total_searcher_balance_delta) + "\n";
  out += "summary,seed," + std::to_string(report.master_seed) + "\n";
  return out;
}

std::string render_compare_table(std::span<const ExperimentReport> reports) {
  std::string out =
      "strategy,mean_terminal_disorder,mean_block_mev,block_mev_variance,"
      "mean_terminal_available_value,good_mev_count,bad_mev_count,entropy_final_bits\n";
  for (const auto& report : reports) {
    out += strategy_name(report.config.strategy);
    out += "," + format_g9(report.mean_terminal_disorder);
    out += "," + format_g9(report.mean_block_mev);
    out += "," + format_g9(report.block_mev_variance);
    out += "," + format_g9(report.mean_terminal_available_value);
    out += "," + std::to_string(report.good_mev_count);
    out += "," + std::to_string(report.bad_mev_count);
    out += "," + format_g9(entropy_final_bits(report));
    out += "\n";
  }
  return out;
}

std::string render_compare_json(std::span<const ExperimentReport> reports) {
  std::string out = "[";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i > 0) out += ",";
    append_json_summary(out, reports[i]);
  }
  out += "]\n";
  return out;
}

std::vector<CsvRow> parse_csv_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "record,index,value") {
    throw std::invalid_argument("missing record,index,value header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    if (first == std::string::npos || second == std::string::npos) {
      throw std::invalid_argument("malformed row: '" + line + "'");
    }
    rows.push_back(CsvRow{line.substr(0, first), line.substr(first + 1, second - first - 1),
                          line.substr(second + 1)});
  }
  return rows;
}

std::map<std::string, std::string> parse_config_file(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_number) +
                                  " is not key = value: '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("empty key on config line " + std::to_string(line_number));
    }
    entries[key] = value;
  }
  return entries;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "p") {
    cfg.p = parse_double(key, value);
  } else if (key == "n") {
    cfg.n = static_cast<int>(parse_int(key, value));
  } else if (key == "blocks_per_run") {
    cfg.blocks_per_run = static_cast<int>(parse_int(key, value));
  } else if (key == "mempool_size") {
    cfg.mempool_size = static_cast<int>(parse_int(key, value));
  } else if (key == "runs") {
    cfg.runs = parse_int(key, value);
  } else if (key == "strategy") {
    const auto strategy = strategy_from_name(value);
    if (!strategy) {
      throw std::invalid_argument("unknown strategy: '" + value + "'");
    }
    cfg.strategy = *strategy;
  } else if (key == "unit_value") {
    cfg.payoff = PayoffModel::linear(parse_int(key, value));
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, value);
  } else if (key == "master_seed") {
    cfg.master_seed = parse_uint(key, value);
  } else if (key == "oracle_limit") {
    cfg.oracle_limit = parse_int(key, value);
  } else if (key == "carry_over_mempool") {
    cfg.carry_over_mempool = parse_bool(key, value);
  } else if (key == "bundle_counts_one_slot") {
    cfg.bundle_counts_one_slot = parse_bool(key, value);
  } else if (key == "auction_searchers") {
    cfg.auction_searchers = static_cast<int>(parse_int(key, value));
  } else {
    throw std::invalid_argument("unknown configuration key: '" + key + "'");
  }
}

}  // namespace mevsim
