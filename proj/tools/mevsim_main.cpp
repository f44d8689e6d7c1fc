// mevsim: configure, run and report entropy/MEV market simulations.
//
// Exit codes: 0 success, 1 runtime or check failure, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mevsim/block_builders.hpp"
#include "mevsim/info_theory.hpp"
#include "mevsim/report.hpp"
#include "mevsim/sim_engine.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::uint64_t generate_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

struct EntropyOpts {
  int n = 0;
  double p = 0.5;
  std::string sweep;
};

struct SimOpts {
  std::string config_path;
  std::string strategy = "baseline";
  double p = 0.5;
  int n = 10;
  int blocks = 1;
  int mempool = 0;
  std::int64_t runs = 1000;
  double alpha = 0.9;
  std::int64_t unit_value = 1;
  std::uint64_t seed = 0;
  std::int64_t oracle_limit = mevsim::kDefaultOracleLimit;
  int threads = 1;
  bool carry_over = false;
  bool bundle_one_slot = false;
  int auction_searchers = 2;
  std::string out_path;
  std::string format = "text";
};

struct OracleOpts {
  int trials = 1000;
  int mempool = 12;
  int n = 6;
  std::uint64_t seed = 1;
};

void add_sim_options(CLI::App* sub, SimOpts& opts, bool with_strategy) {
  sub->add_option("--config", opts.config_path, "flat key = value configuration file");
  if (with_strategy) {
    sub->add_option("--strategy", opts.strategy,
                    "baseline | min-oracle-bf | min-oracle-greedy | fcfs | auction");
  }
  sub->add_option("--p", opts.p, "trader buy probability, 0 < p < 1");
  sub->add_option("--n", opts.n, "block size in transaction slots");
  sub->add_option("--blocks", opts.blocks, "blocks per run");
  sub->add_option("--mempool", opts.mempool, "trader entries sampled per block (0 = 4*n)");
  sub->add_option("--runs", opts.runs, "independent runs");
  sub->add_option("--alpha", opts.alpha, "auction tip fraction in (0, 1]");
  sub->add_option("--unit-value", opts.unit_value, "linear payoff per unit of closed imbalance");
  sub->add_option("--seed", opts.seed, "master seed; omitted = generated and printed");
  sub->add_option("--oracle-limit", opts.oracle_limit, "brute-force subset cap");
  sub->add_option("--threads", opts.threads, "worker threads (report is thread-count invariant)");
  sub->add_flag("--carry-over", opts.carry_over, "carry unconsumed trader entries across blocks");
  sub->add_flag("--bundle-one-slot", opts.bundle_one_slot, "bundles occupy one slot");
  sub->add_option("--auction-searchers", opts.auction_searchers,
                  "arbitrage bundles submitted per block");
  sub->add_option("--format", opts.format, "text | json")
      ->check(CLI::IsMember({"text", "json"}));
}

// Precedence: flags override config-file keys override defaults.
mevsim::ExperimentConfig make_config(const CLI::App* sub, const SimOpts& opts,
                                     bool with_strategy) {
  mevsim::ExperimentConfig cfg;
  bool seed_given = false;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) {
      throw std::invalid_argument("cannot open config file: " + opts.config_path);
    }
    for (const auto& [key, value] : mevsim::parse_config_file(in)) {
      if (!with_strategy && key == "strategy") continue;
      if (key == "master_seed") seed_given = true;
      mevsim::apply_config_entry(cfg, key, value);
    }
  }
  if (with_strategy && sub->count("--strategy") > 0) {
    const auto strategy = mevsim::strategy_from_name(opts.strategy);
    if (!strategy) {
      throw std::invalid_argument("unknown strategy: '" + opts.strategy + "'");
    }
    cfg.strategy = *strategy;
  }
  if (sub->count("--p") > 0) cfg.p = opts.p;
  if (sub->count("--n") > 0) cfg.n = opts.n;
  if (sub->count("--blocks") > 0) cfg.blocks_per_run = opts.blocks;
  if (sub->count("--mempool") > 0) cfg.mempool_size = opts.mempool;
  if (sub->count("--runs") > 0) cfg.runs = opts.runs;
  if (sub->count("--alpha") > 0) cfg.alpha = opts.alpha;
  if (sub->count("--unit-value") > 0) cfg.payoff = mevsim::PayoffModel::linear(opts.unit_value);
  if (sub->count("--oracle-limit") > 0) cfg.oracle_limit = opts.oracle_limit;
  if (sub->count("--carry-over") > 0) cfg.carry_over_mempool = opts.carry_over;
  if (sub->count("--bundle-one-slot") > 0) cfg.bundle_counts_one_slot = opts.bundle_one_slot;
  if (sub->count("--auction-searchers") > 0) cfg.auction_searchers = opts.auction_searchers;
  if (sub->count("--seed") > 0) {
    cfg.master_seed = opts.seed;
  } else if (!seed_given) {
    cfg.master_seed = generate_seed();
  }
  cfg.validate();
  return cfg;
}

int run_entropy(const CLI::App* sub, const EntropyOpts& opts) {
  if (sub->count("--n") == 0 && opts.sweep.empty()) {
    throw std::invalid_argument("entropy needs --n or --sweep start:stop:step");
  }
  std::vector<int> ns;
  if (!opts.sweep.empty()) {
    int start = 0, stop = 0, step = 0;
    if (std::sscanf(opts.sweep.c_str(), "%d:%d:%d", &start, &stop, &step) != 3 || step <= 0 ||
        start < 0 || stop < start) {
      throw std::invalid_argument("bad --sweep, expected start:stop:step with step > 0");
    }
    for (int n = start; n <= stop; n += step) ns.push_back(n);
  } else {
    if (opts.n < 0) throw std::invalid_argument("--n must be >= 0");
    ns.push_back(opts.n);
  }
  if (!(opts.p > 0.0 && opts.p < 1.0)) {
    throw std::invalid_argument("--p must satisfy 0 < p < 1");
  }
  const mevsim::Probability p(opts.p);
  std::string out = "n,exact_bits,asymptotic_bits,abs_diff\n";
  for (int n : ns) {
    const double exact = mevsim::binomial_entropy_exact(n, p);
    out += std::to_string(n) + "," + mevsim::format_g9(exact);
    if (n == 0) {
      out += ",na,na\n";  // the asymptotic formula needs n >= 1
    } else {
      const double asymptotic = mevsim::binomial_entropy_asymptotic(n, p);
      out += "," + mevsim::format_g9(asymptotic) + "," +
             mevsim::format_g9(std::abs(exact - asymptotic)) + "\n";
    }
  }
  std::cout << out;
  return kExitOk;
}

int run_simulate(const CLI::App* sub, const SimOpts& opts) {
  const mevsim::ExperimentConfig cfg = make_config(sub, opts, true);
  const mevsim::ExperimentReport report = mevsim::run_experiment(cfg, opts.threads);
  if (opts.format == "json") {
    std::cout << mevsim::render_summary_json(report);
  } else {
    std::cout << mevsim::render_summary_text(report);
  }
  if (!opts.out_path.empty()) {
    std::ofstream out(opts.out_path);
    if (!out) {
      throw std::runtime_error("cannot write report file: " + opts.out_path);
    }
    out << mevsim::render_simulate_rows(report);
  }
  return kExitOk;
}

int run_compare(const CLI::App* sub, const SimOpts& opts) {
  mevsim::ExperimentConfig cfg = make_config(sub, opts, false);
  std::vector<mevsim::Strategy> strategies = {mevsim::Strategy::Baseline};
  // the brute-force oracle joins whenever its subset count fits the cap
  if (mevsim::subset_count_capped(cfg.effective_mempool_size(), cfg.n, cfg.oracle_limit) <=
      cfg.oracle_limit) {
    strategies.push_back(mevsim::Strategy::MinOracleBruteForce);
  }
  strategies.insert(strategies.end(), {mevsim::Strategy::MinOracleGreedy, mevsim::Strategy::Fcfs,
                                       mevsim::Strategy::Auction});
  std::vector<mevsim::ExperimentReport> reports;
  reports.reserve(strategies.size());
  for (mevsim::Strategy strategy : strategies) {
    mevsim::ExperimentConfig strategy_cfg = cfg;  // same seed: common random numbers
    strategy_cfg.strategy = strategy;
    reports.push_back(mevsim::run_experiment(strategy_cfg, opts.threads));
  }
  if (opts.format == "json") {
    std::cout << mevsim::render_compare_json(reports);
  } else {
    std::string header = "# p=" + mevsim::format_g9(cfg.p) + " n=" + std::to_string(cfg.n) +
                         " blocks_per_run=" + std::to_string(cfg.blocks_per_run) +
                         " mempool_size=" + std::to_string(cfg.effective_mempool_size()) +
                         " runs=" + std::to_string(cfg.runs) +
                         " alpha=" + mevsim::format_g9(cfg.alpha) +
                         " unit_value=" + std::to_string(cfg.payoff.unit_value()) +
                         " seed=" + std::to_string(cfg.master_seed) + "\n";
    std::cout << header << mevsim::render_compare_table(reports);
  }
  if (!opts.out_path.empty()) {
    std::ofstream out(opts.out_path);
    if (!out) {
      throw std::runtime_error("cannot write report file: " + opts.out_path);
    }
    out << mevsim::render_compare_table(reports);
  }
  return kExitOk;
}

int run_oracle_check(const OracleOpts& opts) {
  if (opts.trials < 1) throw std::invalid_argument("--trials must be >= 1");
  if (opts.n < 1 || opts.mempool < opts.n) {
    throw std::invalid_argument("need --n >= 1 and --mempool >= --n");
  }
  if (mevsim::subset_count_capped(opts.mempool, opts.n, mevsim::kDefaultOracleLimit) >
      mevsim::kDefaultOracleLimit) {
    throw std::invalid_argument("C(mempool, n) exceeds the brute-force cap");
  }
  const mevsim::OracleCheckResult result =
      mevsim::oracle_check(opts.trials, opts.mempool, opts.n, opts.seed);
  if (result.ok) {
    std::cout << "oracle-check: " << result.trials_run
              << " trials, greedy matches brute force\n";
    return kExitOk;
  }
  std::cout << "oracle-check: disagreement on mempool [" << result.counterexample
            << "]: candidate disorder " << result.candidate_disorder << ", brute force "
            << result.bruteforce_disorder << "\n";
  return kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo market simulator for entropy-based MEV analysis"};
  app.require_subcommand(1);

  EntropyOpts entropy_opts;
  auto* entropy_cmd =
      app.add_subcommand("entropy", "exact vs asymptotic entropy of the imbalance after n trades");
  entropy_cmd->add_option("--n", entropy_opts.n, "number of trades");
  entropy_cmd->add_option("--p", entropy_opts.p, "buy probability");
  entropy_cmd->add_option("--sweep", entropy_opts.sweep, "range start:stop:step");

  SimOpts simulate_opts;
  auto* simulate_cmd = app.add_subcommand("simulate", "run one strategy and report");
  add_sim_options(simulate_cmd, simulate_opts, true);
  simulate_cmd->add_option("--out", simulate_opts.out_path, "write detailed CSV rows here");

  SimOpts compare_opts;
  auto* compare_cmd =
      app.add_subcommand("compare", "run all strategies under common random numbers");
  add_sim_options(compare_cmd, compare_opts, false);
  compare_cmd->add_option("--out", compare_opts.out_path, "write the comparison table here");

  OracleOpts oracle_opts;
  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "verify greedy against the brute-force oracle");
  oracle_cmd->add_option("--trials", oracle_opts.trials, "random mempools to test");
  oracle_cmd->add_option("--mempool", oracle_opts.mempool, "mempool size M");
  oracle_cmd->add_option("--n", oracle_opts.n, "block size");
  oracle_cmd->add_option("--seed", oracle_opts.seed, "mempool sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(entropy_cmd)) return run_entropy(entropy_cmd, entropy_opts);
    if (app.got_subcommand(simulate_cmd)) return run_simulate(simulate_cmd, simulate_opts);
    if (app.got_subcommand(compare_cmd)) return run_compare(compare_cmd, compare_opts);
    if (app.got_subcommand(oracle_cmd)) return run_oracle_check(oracle_opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
