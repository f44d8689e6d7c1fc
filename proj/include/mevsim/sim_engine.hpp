#pragma once

// Ensemble Monte Carlo driver. Runs R independent chain realizations under a
// configured block-building strategy and aggregates imbalance trajectories,
// MEV classifications, payoffs and balances into an ExperimentReport.
//
// Reports are a pure function of (config, master_seed): per-run streams are
// keyed off the master seed, and every aggregate is accumulated in integers,
// so serial and parallel execution produce identical reports.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "mevsim/block_builders.hpp"
#include "mevsim/info_theory.hpp"
#include "mevsim/market_model.hpp"

namespace mevsim {

enum class Strategy { Baseline, MinOracleBruteForce, MinOracleGreedy, Fcfs, Auction };

std::string_view strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(std::string_view name);

struct ExperimentConfig {
  double p = 0.5;            // trader buy probability
  int n = 10;                // block size in transaction slots
  int blocks_per_run = 1;
  int mempool_size = 0;      // trader entries sampled per block; 0 means 4*n
  std::int64_t runs = 1000;
  Strategy strategy = Strategy::Baseline;
  PayoffModel payoff = PayoffModel::linear(1);
  double alpha = 0.9;        // auction tip fraction of expected profit
  std::uint64_t master_seed = 42;
  std::int64_t oracle_limit = kDefaultOracleLimit;

  // Sensitivity switches; defaults match the headline model.
  bool carry_over_mempool = false;     // keep unconsumed trader entries across blocks
  bool bundle_counts_one_slot = false; // auction bundles take one slot instead of inner length
  int auction_searchers = 2;           // arbitrage bundles submitted per block

  int effective_mempool_size() const { return mempool_size > 0 ? mempool_size : 4 * n; }
  void validate() const;  // throws std::invalid_argument
};

struct MevEvent {
  std::int64_t step = 0;  // global slot index across the run's blocks
  MevClass cls = MevClass::NotMev;
  std::int64_t payoff = 0;
};

// One full realization of the chain.
struct RunTrace {
  std::vector<std::int64_t> imbalance_by_step;  // one entry per slot, blocks_per_run * n total
  std::vector<MevEvent> mev_events;             // steps strictly increasing
  std::map<PlayerId, std::int64_t> final_balances;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::uint64_t master_seed = 0;

  // Ensemble entropy of the imbalance after each slot, k = 0..blocks_per_run*n,
  // with the plug-in estimator's standard error alongside.
  EntropyTrajectory trajectory;
  std::vector<double> per_step_entropy_se;

  double mean_block_mev = 0.0;
  double block_mev_variance = 0.0;
  double mean_terminal_disorder = 0.0;
  // Average payoff a searcher could still extract from the terminal state;
  // the good MEV a block leaves on the table.
  double mean_terminal_available_value = 0.0;
  std::int64_t good_mev_count = 0;
  std::int64_t bad_mev_count = 0;
  std::int64_t total_mev_payoff = 0;
  std::int64_t total_searcher_balance_delta = 0;
};

struct WrongStrategyError : std::runtime_error {
  explicit WrongStrategyError(const std::string& what) : std::runtime_error(what) {}
};

// One realization, deterministic in (config.master_seed, run_index).
RunTrace run_single(const ExperimentConfig& config, std::int64_t run_index);

// R independent realizations aggregated; identical output for any `threads`.
ExperimentReport run_experiment(const ExperimentConfig& config, int threads = 1);

// True iff per-step entropy is nondecreasing within two standard errors of
// the plug-in estimator. Only meaningful for searcher-free ensembles; any
// other strategy is rejected with WrongStrategyError.
bool entropy_growth_check(const ExperimentReport& report);

// The exact trader mempool a run sees for one block (carry-over disabled);
// exposed so tests can condition on mempool composition.
Mempool sample_trader_mempool(const ExperimentConfig& config, std::int64_t run_index,
                              int block_index);

}  // namespace mevsim
