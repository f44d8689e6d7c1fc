#pragma once

// Block-building mechanisms: the min-disorder oracle (brute force and greedy
// coincidence-of-wants matching), first-come-first-serve with an always-on
// arbitrage searcher, and the closed-bid tip auction. Each builder is a pure
// function from (mempool/stream, block size, initial state) to a Block.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mevsim/market_model.hpp"

namespace mevsim {

// An ordered group of transactions executed all-or-nothing and classified as
// a single atomic unit.
struct Bundle {
  std::vector<Transaction> transactions;
  PlayerId submitter;
};

struct MempoolEntry {
  std::variant<Transaction, Bundle> payload;
  std::uint32_t arrival_index = 0;
  std::int64_t tip = 0;  // auction bid; plain transactions carry 0
};

struct Mempool {
  std::vector<MempoolEntry> entries;
};

// Per-transaction execution record. Transactions belonging to one bundle share
// an atomic_group; the group head carries the unit-level classification and
// payoff so aggregate counts never double-count a bundle.
struct TxRecord {
  MevClass mev = MevClass::NotMev;
  std::int64_t mev_payoff = 0;  // actor balance delta for searcher units, else 0
  std::int64_t imbalance_before = 0;
  std::int64_t imbalance_after = 0;
  int slot = 0;
  int atomic_group = 0;
  bool group_head = true;

  std::int64_t disorder_before() const {
    return imbalance_before < 0 ? -imbalance_before : imbalance_before;
  }
  std::int64_t disorder_after() const {
    return imbalance_after < 0 ? -imbalance_after : imbalance_after;
  }

  bool operator==(const TxRecord&) const = default;
};

struct Block {
  std::vector<Transaction> transactions;
  std::vector<TxRecord> per_tx_records;
  PlayerId builder{Role::Builder, 0};
  int slots = 0;
  std::int64_t max_intermediate_disorder = 0;
  // Arrival indices of the mempool entries this block consumed, when the
  // builder drew from a mempool or a stream of pooled entries.
  std::vector<std::uint32_t> consumed_arrivals;

  std::int64_t terminal_imbalance() const;
  // Total value extracted by searcher units executed in this block.
  std::int64_t mev_total() const;
  std::int64_t good_mev_count() const;
  std::int64_t bad_mev_count() const;
};

struct CombinatorialLimitError : std::runtime_error {
  explicit CombinatorialLimitError(const std::string& what) : std::runtime_error(what) {}
};
struct StreamExhaustedError : std::runtime_error {
  explicit StreamExhaustedError(const std::string& what) : std::runtime_error(what) {}
};
struct UnderfilledBlockError : std::runtime_error {
  explicit UnderfilledBlockError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::int64_t kDefaultOracleLimit = 5'000'000;

// One block slot's worth of work: a lone transaction or a whole bundle.
struct AtomicUnit {
  std::vector<Transaction> transactions;
  PlayerId actor;
  std::uint32_t arrival_index = 0;
  bool is_bundle = false;
  // False for transactions a builder injects itself (the fcfs searcher arb);
  // such units never appear in consumed_arrivals.
  bool from_pool = true;
};

// Executes the chosen units in order from `initial`, producing the records.
// With bundle_counts_one_slot a bundle occupies one slot regardless of its
// inner length; otherwise each inner transaction takes a slot.
Block execute_block(std::span<const AtomicUnit> units, const ChainState& initial,
                    const PayoffModel& payoff, bool bundle_counts_one_slot = false);

// Exhaustive min-disorder oracle: tries every n-subset of the mempool (trader
// entries only) and returns a block whose terminal |imbalance| is minimal.
// Ties resolve to the lexicographically smallest arrival-index sequence. The
// chosen trades are ordered to alternate buys and sells as far as possible.
// Throws CombinatorialLimitError when C(M, n) exceeds subset_limit.
Block build_min_oracle_bruteforce(const Mempool& mempool, int n, const ChainState& state,
                                  const PayoffModel& payoff,
                                  std::int64_t subset_limit = kDefaultOracleLimit);

// Coincidence-of-wants matching: picks the feasible buy/sell split whose
// terminal |imbalance| is minimal (ties prefer the buy side), taking each
// side in arrival order. Terminal disorder always equals the brute-force
// minimum; only the running time differs.
Block build_min_oracle_greedy(const Mempool& mempool, int n, const ChainState& state,
                              const PayoffModel& payoff);

// First-come-first-serve under searcher spam: traders in stream order with an
// arbitrage inserted after every trade that leaves the pool out of
// equilibrium. From an equilibrated start the block extracts exactly
// floor(n/2) * payoff(1).
Block build_fcfs(std::span<const Transaction> trade_stream, int n, const ChainState& state,
                 const PayoffModel& payoff);

// Closed-bid tip auction: entries ranked by tip descending (ties by arrival),
// taken greedily while slots remain; a unit whose arbitrage would hit an
// already-equilibrated pool reverts and is skipped.
Block build_auction(const Mempool& mempool, int n, const ChainState& state,
                    const PayoffModel& payoff, bool bundle_counts_one_slot = false);

// Reference builder: the first n trades in arrival order, no searcher.
Block build_baseline(std::span<const Transaction> trade_stream, int n, const ChainState& state,
                     const PayoffModel& payoff);

// Number of n-subsets of an M-entry mempool, saturating at `cap`.
std::int64_t subset_count_capped(int mempool_size, int n, std::int64_t cap);

// --- oracle verification -----------------------------------------------

using BuilderFn = std::function<Block(const Mempool&, int, const ChainState&, const PayoffModel&)>;

struct OracleCheckResult {
  bool ok = true;
  int trials_run = 0;
  std::string counterexample;  // mempool signs, e.g. "+ - + +", when !ok
  std::int64_t candidate_disorder = 0;
  std::int64_t bruteforce_disorder = 0;
};

// Compares a candidate builder's terminal disorder against the brute-force
// oracle on `trials` mempools sampled at p = 0.5. The candidate defaults to
// build_min_oracle_greedy; tests may inject a deliberately broken one.
OracleCheckResult oracle_check(int trials, int mempool_size, int n, std::uint64_t seed,
                               const BuilderFn& candidate = {});

}  // namespace mevsim
