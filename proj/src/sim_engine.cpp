#include "mevsim/sim_engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <exception>
#include <thread>
#include <unordered_set>
#include <utility>

#include "mevsim/rng.hpp"

namespace mevsim {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Baseline: return "baseline";
    case Strategy::MinOracleBruteForce: return "min-oracle-bf";
    case Strategy::MinOracleGreedy: return "min-oracle-greedy";
    case Strategy::Fcfs: return "fcfs";
    case Strategy::Auction: return "auction";
  }
  return "unknown";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
  for (Strategy s : {Strategy::Baseline, Strategy::MinOracleBruteForce,
                     Strategy::MinOracleGreedy, Strategy::Fcfs, Strategy::Auction}) {
    if (strategy_name(s) == name) return s;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("p must satisfy 0 < p < 1");
  }
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (blocks_per_run < 1) throw std::invalid_argument("blocks_per_run must be at least 1");
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (effective_mempool_size() < n) {
    throw std::invalid_argument("mempool_size must be at least the block size");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1]");
  }
  if (oracle_limit < 1) throw std::invalid_argument("oracle_limit must be positive");
  if (auction_searchers < 0) throw std::invalid_argument("auction_searchers must be >= 0");
}

namespace {

std::vector<MempoolEntry> sample_trader_entries(RngStream& rng, int count, double p,
                                                std::uint32_t first_arrival) {
  std::vector<MempoolEntry> entries;
  entries.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const std::uint32_t arrival = first_arrival + static_cast<std::uint32_t>(j);
    const int direction = rng.bernoulli(p) ? +1 : -1;
    entries.push_back(MempoolEntry{
        make_trader_trade(direction, PlayerId{Role::Trader, arrival}), arrival, 0});
  }
  return entries;
}

Block build_for_strategy(const ExperimentConfig& cfg, const Mempool& mempool,
                         std::span<const Transaction> stream, const ChainState& state) {
  switch (cfg.strategy) {
    case Strategy::Baseline:
      return build_baseline(stream, cfg.n, state, cfg.payoff);
    case Strategy::Fcfs:
      return build_fcfs(stream, cfg.n, state, cfg.payoff);
    case Strategy::MinOracleBruteForce:
      return build_min_oracle_bruteforce(mempool, cfg.n, state, cfg.payoff, cfg.oracle_limit);
    case Strategy::MinOracleGreedy:
      return build_min_oracle_greedy(mempool, cfg.n, state, cfg.payoff);
    case Strategy::Auction: {
      // Searchers bid round(alpha * expected profit) for the arbitrage of the
      // block's starting state; the profit is zero at equilibrium and the
      // bundle then reverts if it is ever reached.
      Mempool with_bundles = mempool;
      const std::int64_t profit = cfg.payoff.value_for(disorder(state));
      const std::int64_t tip = std::llround(cfg.alpha * static_cast<double>(profit));
      for (int i = 0; i < cfg.auction_searchers; ++i) {
        const PlayerId searcher{Role::Searcher, static_cast<std::uint32_t>(i)};
        Bundle bundle{{make_searcher_arb(searcher)}, searcher};
        with_bundles.entries.push_back(MempoolEntry{
            std::move(bundle),
            static_cast<std::uint32_t>(mempool.entries.size()) + static_cast<std::uint32_t>(i),
            tip});
      }
      return build_auction(with_bundles, cfg.n, state, cfg.payoff, cfg.bundle_counts_one_slot);
    }
  }
  throw std::logic_error("unhandled strategy");
}

}  // namespace

RunTrace run_single(const ExperimentConfig& cfg, std::int64_t run_index) {
  cfg.validate();
  if (run_index < 0 || run_index >= cfg.runs) {
    throw std::out_of_range("run_index outside [0, runs)");
  }
  RngStream rng(derive_stream_seed(cfg.master_seed, static_cast<std::uint64_t>(run_index)));
  const int m = cfg.effective_mempool_size();

  RunTrace trace;
  trace.imbalance_by_step.reserve(static_cast<std::size_t>(cfg.blocks_per_run) *
                                  static_cast<std::size_t>(cfg.n));
  ChainState state;
  std::vector<MempoolEntry> carried;

  for (int b = 0; b < cfg.blocks_per_run; ++b) {
    Mempool mempool;
    if (cfg.carry_over_mempool && !carried.empty()) {
      mempool.entries = std::move(carried);
      carried.clear();
      for (std::size_t i = 0; i < mempool.entries.size(); ++i) {
        mempool.entries[i].arrival_index = static_cast<std::uint32_t>(i);
      }
    }
    const int fresh = m - static_cast<int>(mempool.entries.size());
    auto fresh_entries = sample_trader_entries(
        rng, fresh, cfg.p, static_cast<std::uint32_t>(mempool.entries.size()));
    mempool.entries.insert(mempool.entries.end(), fresh_entries.begin(), fresh_entries.end());

    std::vector<Transaction> stream;
    stream.reserve(mempool.entries.size());
    for (const auto& entry : mempool.entries) {
      stream.push_back(std::get<Transaction>(entry.payload));
    }

    const Block block = build_for_strategy(cfg, mempool, stream, state);
    assert(block.slots == cfg.n);

    // Imbalance after each slot; the last record of a slot wins, which makes
    // one-slot bundles report their net effect.
    std::vector<std::int64_t> slot_imbalance(static_cast<std::size_t>(cfg.n), state.imbalance);
    for (const TxRecord& rec : block.per_tx_records) {
      slot_imbalance[static_cast<std::size_t>(rec.slot)] = rec.imbalance_after;
    }
    for (int slot = 0; slot < cfg.n; ++slot) {
      trace.imbalance_by_step.push_back(slot_imbalance[static_cast<std::size_t>(slot)]);
    }
    for (const TxRecord& rec : block.per_tx_records) {
      if (rec.group_head && rec.mev != MevClass::NotMev) {
        trace.mev_events.push_back(MevEvent{
            static_cast<std::int64_t>(b) * cfg.n + rec.slot, rec.mev, rec.mev_payoff});
      }
    }

    // Sequential composition: the run state is the left fold of the block's
    // transactions over apply_tx.
    for (const Transaction& tx : block.transactions) {
      state = apply_tx(state, tx, cfg.payoff);
    }
    assert(state.imbalance == block.terminal_imbalance());

    if (cfg.carry_over_mempool) {
      std::unordered_set<std::uint32_t> consumed(block.consumed_arrivals.begin(),
                                                 block.consumed_arrivals.end());
      for (auto& entry : mempool.entries) {
        if (!consumed.count(entry.arrival_index) &&
            std::holds_alternative<Transaction>(entry.payload)) {
          carried.push_back(std::move(entry));
        }
      }
    }
  }
  trace.final_balances = state.balances;
  return trace;
}

namespace {

// Integer-only per-thread aggregate: merging partials is associative and
// exact, so the report cannot depend on the thread count.
struct PartialAggregate {
  std::vector<std::map<std::int64_t, std::int64_t>> hist;  // per step 0..B*n
  std::vector<std::int64_t> per_block_mev_sum;             // per block index
  std::int64_t terminal_disorder_sum = 0;
  std::int64_t terminal_available_sum = 0;
  std::int64_t block_mev_sum = 0;
  std::int64_t block_mev_sq_sum = 0;
  std::int64_t good = 0;
  std::int64_t bad = 0;
  std::int64_t searcher_delta = 0;

  PartialAggregate(int steps, int blocks)
      : hist(static_cast<std::size_t>(steps) + 1),
        per_block_mev_sum(static_cast<std::size_t>(blocks), 0) {}

  void absorb(const RunTrace& trace, const ExperimentConfig& cfg) {
    ++hist[0][0];  // every run starts at equilibrium
    for (std::size_t s = 0; s < trace.imbalance_by_step.size(); ++s) {
      ++hist[s + 1][trace.imbalance_by_step[s]];
    }
    const std::int64_t terminal =
        std::abs(trace.imbalance_by_step.empty() ? 0 : trace.imbalance_by_step.back());
    terminal_disorder_sum += terminal;
    terminal_available_sum += cfg.payoff.value_for(terminal);

    std::vector<std::int64_t> block_mev(per_block_mev_sum.size(), 0);
    for (const MevEvent& ev : trace.mev_events) {
      if (ev.cls == MevClass::GoodAtomic) ++good;
      if (ev.cls == MevClass::BadAtomic) ++bad;
      block_mev[static_cast<std::size_t>(ev.step / cfg.n)] += ev.payoff;
    }
    for (std::size_t b = 0; b < block_mev.size(); ++b) {
      per_block_mev_sum[b] += block_mev[b];
      block_mev_sum += block_mev[b];
      block_mev_sq_sum += block_mev[b] * block_mev[b];
    }
    for (const auto& [player, balance] : trace.final_balances) {
      if (player.role == Role::Searcher) searcher_delta += balance;
    }
  }

  void merge(const PartialAggregate& other) {
    for (std::size_t k = 0; k < hist.size(); ++k) {
      for (const auto& [outcome, count] : other.hist[k]) {
        hist[k][outcome] += count;
      }
    }
    for (std::size_t b = 0; b < per_block_mev_sum.size(); ++b) {
      per_block_mev_sum[b] += other.per_block_mev_sum[b];
    }
    terminal_disorder_sum += other.terminal_disorder_sum;
    terminal_available_sum += other.terminal_available_sum;
    block_mev_sum += other.block_mev_sum;
    block_mev_sq_sum += other.block_mev_sq_sum;
    good += other.good;
    bad += other.bad;
    searcher_delta += other.searcher_delta;
  }
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const std::int64_t total_runs = cfg.runs;
  int workers = std::max(1, threads);
  workers = static_cast<int>(std::min<std::int64_t>(workers, total_runs));
  const int steps = cfg.blocks_per_run * cfg.n;

  std::vector<PartialAggregate> partials(static_cast<std::size_t>(workers),
                                         PartialAggregate(steps, cfg.blocks_per_run));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
  const std::int64_t chunk = (total_runs + workers - 1) / workers;

  auto work = [&](int t) {
    try {
      const std::int64_t lo = static_cast<std::int64_t>(t) * chunk;
      const std::int64_t hi = std::min<std::int64_t>(total_runs, lo + chunk);
      for (std::int64_t run = lo; run < hi; ++run) {
        partials[static_cast<std::size_t>(t)].absorb(run_single(cfg, run), cfg);
      }
    } catch (...) {
      failures[static_cast<std::size_t>(t)] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  PartialAggregate total = std::move(partials.front());
  for (std::size_t t = 1; t < partials.size(); ++t) total.merge(partials[t]);

  ExperimentReport report;
  report.config = cfg;
  report.master_seed = cfg.master_seed;
  report.trajectory.per_step_entropy.reserve(total.hist.size());
  report.per_step_entropy_se.reserve(total.hist.size());
  for (const auto& counts : total.hist) {
    const DiscreteDistribution dist = DiscreteDistribution::from_counts(counts);
    const double h = entropy(dist);
    report.trajectory.per_step_entropy.push_back(h);
    // Plug-in estimator spread: Var[-log2 p(X)] / runs.
    double second_moment = 0.0;
    for (double mass : dist.mass()) {
      if (mass > 0.0) {
        const double surprisal = -std::log2(mass);
        second_moment += mass * surprisal * surprisal;
      }
    }
    const double variance = std::max(0.0, second_moment - h * h);
    report.per_step_entropy_se.push_back(
        std::sqrt(variance / static_cast<double>(total_runs)));
  }
  report.trajectory.per_step_delta.push_back(0.0);
  for (std::size_t k = 1; k < report.trajectory.per_step_entropy.size(); ++k) {
    report.trajectory.per_step_delta.push_back(report.trajectory.per_step_entropy[k] -
                                               report.trajectory.per_step_entropy[k - 1]);
  }

  const double run_count = static_cast<double>(total_runs);
  const double block_count = run_count * static_cast<double>(cfg.blocks_per_run);
  report.mean_terminal_disorder = static_cast<double>(total.terminal_disorder_sum) / run_count;
  report.mean_terminal_available_value =
      static_cast<double>(total.terminal_available_sum) / run_count;
  report.mean_block_mev = static_cast<double>(total.block_mev_sum) / block_count;
  const double mean_sq = static_cast<double>(total.block_mev_sq_sum) / block_count;
  report.block_mev_variance =
      std::max(0.0, mean_sq - report.mean_block_mev * report.mean_block_mev);
  report.good_mev_count = total.good;
  report.bad_mev_count = total.bad;
  report.total_mev_payoff = total.block_mev_sum;
  report.total_searcher_balance_delta = total.searcher_delta;
  return report;
}

bool entropy_growth_check(const ExperimentReport& report) {
  if (report.config.strategy != Strategy::Baseline) {
    throw WrongStrategyError("entropy growth check requires a trader-only baseline report, got " +
                             std::string(strategy_name(report.config.strategy)));
  }
  const auto& e = report.trajectory.per_step_entropy;
  const auto& se = report.per_step_entropy_se;
  for (std::size_t k = 1; k < e.size(); ++k) {
    const double allowed_dip = 2.0 * std::sqrt(se[k] * se[k] + se[k - 1] * se[k - 1]) + 1e-12;
    if (e[k] - e[k - 1] < -allowed_dip) return false;
  }
  return true;
}

Mempool sample_trader_mempool(const ExperimentConfig& cfg, std::int64_t run_index,
                              int block_index) {
  cfg.validate();
  if (cfg.carry_over_mempool) {
    throw std::invalid_argument("carry-over mempools depend on run state; use run_single");
  }
  if (run_index < 0 || run_index >= cfg.runs) {
    throw std::out_of_range("run_index outside [0, runs)");
  }
  if (block_index < 0 || block_index >= cfg.blocks_per_run) {
    throw std::out_of_range("block_index outside [0, blocks_per_run)");
  }
  RngStream rng(derive_stream_seed(cfg.master_seed, static_cast<std::uint64_t>(run_index)));
  rng.discard(static_cast<std::uint64_t>(block_index) *
              static_cast<std::uint64_t>(cfg.effective_mempool_size()));
  Mempool mempool;
  mempool.entries = sample_trader_entries(rng, cfg.effective_mempool_size(), cfg.p, 0);
  return mempool;
}

}  // namespace mevsim
