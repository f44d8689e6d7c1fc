#include "mevsim/block_builders.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_set>
#include <utility>

#include "mevsim/rng.hpp"

namespace mevsim {

namespace {

std::int64_t abs64(std::int64_t v) { return v < 0 ? -v : v; }

void validate_mempool(const Mempool& mempool, int n) {
  if (n < 1) {
    throw std::invalid_argument("block size must be at least 1");
  }
  if (static_cast<int>(mempool.entries.size()) < n) {
    throw std::invalid_argument("mempool smaller than the block size");
  }
  std::unordered_set<std::uint32_t> arrivals;
  for (const auto& entry : mempool.entries) {
    if (!arrivals.insert(entry.arrival_index).second) {
      throw std::invalid_argument("duplicate arrival_index in mempool");
    }
    if (const auto* bundle = std::get_if<Bundle>(&entry.payload)) {
      if (bundle->transactions.empty()) {
        throw std::invalid_argument("empty bundle in mempool");
      }
    }
  }
}

const TraderTrade& trade_of(const MempoolEntry& entry) {
  const auto* tx = std::get_if<Transaction>(&entry.payload);
  if (tx == nullptr) {
    throw std::invalid_argument("oracle builders accept plain trader entries only");
  }
  const auto* trade = std::get_if<TraderTrade>(tx);
  if (trade == nullptr) {
    throw std::invalid_argument("oracle builders accept trader trades only");
  }
  return *trade;
}

AtomicUnit unit_from_entry(const MempoolEntry& entry) {
  AtomicUnit unit;
  unit.arrival_index = entry.arrival_index;
  if (const auto* bundle = std::get_if<Bundle>(&entry.payload)) {
    unit.transactions = bundle->transactions;
    unit.actor = bundle->submitter;
    unit.is_bundle = true;
  } else {
    const auto& tx = std::get<Transaction>(entry.payload);
    unit.transactions = {tx};
    unit.actor = actor_of(tx);
  }
  return unit;
}

// Interleaves the chosen trades so the running imbalance stays as close to 0
// as the selection allows: move toward equilibrium whenever off it, break
// ties at equilibrium by arrival. The unmatched surplus drains last, in
// arrival order.
std::vector<AtomicUnit> order_alternating(const std::vector<const MempoolEntry*>& chosen,
                                          std::int64_t initial_imbalance) {
  std::deque<const MempoolEntry*> buys;
  std::deque<const MempoolEntry*> sells;
  for (const MempoolEntry* entry : chosen) {
    (trade_of(*entry).direction > 0 ? buys : sells).push_back(entry);
  }
  std::vector<AtomicUnit> units;
  units.reserve(chosen.size());
  std::int64_t imbalance = initial_imbalance;
  auto take = [&](std::deque<const MempoolEntry*>& side) {
    const MempoolEntry* entry = side.front();
    side.pop_front();
    imbalance += trade_of(*entry).direction;
    units.push_back(unit_from_entry(*entry));
  };
  while (!buys.empty() && !sells.empty()) {
    if (imbalance > 0) {
      take(sells);
    } else if (imbalance < 0) {
      take(buys);
    } else {
      take(buys.front()->arrival_index < sells.front()->arrival_index ? buys : sells);
    }
  }
  auto& rest = buys.empty() ? sells : buys;
  while (!rest.empty()) take(rest);
  return units;
}

}  // namespace

std::int64_t Block::terminal_imbalance() const {
  return per_tx_records.empty() ? 0 : per_tx_records.back().imbalance_after;
}

std::int64_t Block::mev_total() const {
  std::int64_t total = 0;
  for (const auto& rec : per_tx_records) {
    if (rec.group_head) total += rec.mev_payoff;
  }
  return total;
}

std::int64_t Block::good_mev_count() const {
  std::int64_t count = 0;
  for (const auto& rec : per_tx_records) {
    if (rec.group_head && rec.mev == MevClass::GoodAtomic) ++count;
  }
  return count;
}

std::int64_t Block::bad_mev_count() const {
  std::int64_t count = 0;
  for (const auto& rec : per_tx_records) {
    if (rec.group_head && rec.mev == MevClass::BadAtomic) ++count;
  }
  return count;
}

Block execute_block(std::span<const AtomicUnit> units, const ChainState& initial,
                    const PayoffModel& payoff, bool bundle_counts_one_slot) {
  Block block;
  ChainState state = initial;
  int slot = 0;
  int group = 0;
  for (const AtomicUnit& unit : units) {
    state.balances.try_emplace(unit.actor, 0);
    const ChainState before = state;
    bool head = true;
    for (const Transaction& tx : unit.transactions) {
      TxRecord rec;
      rec.imbalance_before = state.imbalance;
      state = apply_tx(state, tx, payoff);
      rec.imbalance_after = state.imbalance;
      rec.slot = slot;
      rec.atomic_group = group;
      rec.group_head = head;
      head = false;
      block.transactions.push_back(tx);
      block.per_tx_records.push_back(rec);
      block.max_intermediate_disorder =
          std::max(block.max_intermediate_disorder, abs64(state.imbalance));
      if (!(unit.is_bundle && bundle_counts_one_slot)) ++slot;
    }
    if (unit.is_bundle && bundle_counts_one_slot) ++slot;
    // Classification and payoff live on the unit's head record; for bundles
    // they cover the whole unit, head to last inner transaction.
    TxRecord& head_rec = block.per_tx_records[block.per_tx_records.size() - unit.transactions.size()];
    head_rec.mev = classify_mev(before, state, unit.actor);
    if (unit.actor.role == Role::Searcher) {
      head_rec.mev_payoff = realized_extracted_value(before, state, unit.actor);
    }
    if (unit.from_pool) {
      block.consumed_arrivals.push_back(unit.arrival_index);
    }
  }
  block.slots = slot;
  return block;
}

std::int64_t subset_count_capped(int mempool_size, int n, std::int64_t cap) {
  if (n < 0 || n > mempool_size) return 0;
  const int k = std::min(n, mempool_size - n);
  std::int64_t count = 1;
  for (int i = 1; i <= k; ++i) {
    const std::int64_t factor = mempool_size - k + i;
    if (count > std::numeric_limits<std::int64_t>::max() / factor) return cap + 1;
    // count * factor / i stays integral at every step
    count = count * factor / i;
    if (count > cap) return cap + 1;
  }
  return count;
}

Block build_min_oracle_bruteforce(const Mempool& mempool, int n, const ChainState& state,
                                  const PayoffModel& payoff, std::int64_t subset_limit) {
  validate_mempool(mempool, n);
  const int m = static_cast<int>(mempool.entries.size());
  std::vector<int> directions(mempool.entries.size());
  for (std::size_t i = 0; i < mempool.entries.size(); ++i) {
    directions[i] = trade_of(mempool.entries[i]).direction;
  }
  if (subset_count_capped(m, n, subset_limit) > subset_limit) {
    throw CombinatorialLimitError("C(" + std::to_string(m) + "," + std::to_string(n) +
                                  ") exceeds the subset limit " + std::to_string(subset_limit) +
                                  "; use the greedy builder");
  }

  // Entries sorted by arrival define the index order, so the first subset
  // found at the minimum is the lexicographically smallest arrival sequence.
  std::vector<std::size_t> by_arrival(mempool.entries.size());
  std::iota(by_arrival.begin(), by_arrival.end(), std::size_t{0});
  std::sort(by_arrival.begin(), by_arrival.end(), [&](std::size_t a, std::size_t b) {
    return mempool.entries[a].arrival_index < mempool.entries[b].arrival_index;
  });

  std::vector<int> pick(static_cast<std::size_t>(n));
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<int> best;
  std::int64_t best_disorder = -1;
  while (true) {
    std::int64_t sum = state.imbalance;
    for (int idx : pick) sum += directions[by_arrival[static_cast<std::size_t>(idx)]];
    if (best_disorder < 0 || abs64(sum) < best_disorder) {
      best_disorder = abs64(sum);
      best = pick;
    }
    // next combination in lexicographic order
    int i = n - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - n + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }

  std::vector<const MempoolEntry*> chosen;
  chosen.reserve(best.size());
  for (int idx : best) {
    chosen.push_back(&mempool.entries[by_arrival[static_cast<std::size_t>(idx)]]);
  }
  auto units = order_alternating(chosen, state.imbalance);
  return execute_block(units, state, payoff);
}

Block build_min_oracle_greedy(const Mempool& mempool, int n, const ChainState& state,
                              const PayoffModel& payoff) {
  validate_mempool(mempool, n);
  std::vector<const MempoolEntry*> buys;
  std::vector<const MempoolEntry*> sells;
  for (const auto& entry : mempool.entries) {
    (trade_of(entry).direction > 0 ? buys : sells).push_back(&entry);
  }
  auto by_arrival = [](const MempoolEntry* a, const MempoolEntry* b) {
    return a->arrival_index < b->arrival_index;
  };
  std::sort(buys.begin(), buys.end(), by_arrival);
  std::sort(sells.begin(), sells.end(), by_arrival);

  // Feasible buy counts k give terminal imbalance init + 2k - n; scan the
  // range for the smallest |terminal|, preferring the larger k on ties.
  const int lo = std::max(0, n - static_cast<int>(sells.size()));
  const int hi = std::min(n, static_cast<int>(buys.size()));
  int best_k = lo;
  std::int64_t best_disorder = abs64(state.imbalance + 2 * lo - n);
  for (int k = lo + 1; k <= hi; ++k) {
    const std::int64_t d = abs64(state.imbalance + 2 * k - n);
    if (d <= best_disorder) {
      best_disorder = d;
      best_k = k;
    }
  }

  std::vector<const MempoolEntry*> chosen(buys.begin(), buys.begin() + best_k);
  chosen.insert(chosen.end(), sells.begin(), sells.begin() + (n - best_k));
  std::sort(chosen.begin(), chosen.end(), by_arrival);
  auto units = order_alternating(chosen, state.imbalance);
  return execute_block(units, state, payoff);
}

Block build_fcfs(std::span<const Transaction> trade_stream, int n, const ChainState& state,
                 const PayoffModel& payoff) {
  if (n < 1) {
    throw std::invalid_argument("block size must be at least 1");
  }
  const PlayerId searcher{Role::Searcher, 0};
  std::vector<AtomicUnit> units;
  units.reserve(static_cast<std::size_t>(n));
  std::int64_t imbalance = state.imbalance;
  std::size_t next_trade = 0;
  bool last_was_trade = false;
  for (int slot = 0; slot < n; ++slot) {
    if (last_was_trade && imbalance != 0) {
      AtomicUnit arb;
      arb.transactions = {make_searcher_arb(searcher)};
      arb.actor = searcher;
      arb.from_pool = false;
      units.push_back(arb);
      imbalance = 0;
      last_was_trade = false;
      continue;
    }
    if (next_trade >= trade_stream.size()) {
      throw StreamExhaustedError("trade stream exhausted after " +
                                 std::to_string(next_trade) + " trades");
    }
    const Transaction& tx = trade_stream[next_trade];
    const auto* trade = std::get_if<TraderTrade>(&tx);
    if (trade == nullptr) {
      throw std::invalid_argument("fcfs trade stream must contain trader trades only");
    }
    AtomicUnit unit;
    unit.transactions = {tx};
    unit.actor = trade->trader;
    unit.arrival_index = static_cast<std::uint32_t>(next_trade);
    units.push_back(unit);
    imbalance += trade->direction;
    ++next_trade;
    last_was_trade = true;
  }
  return execute_block(units, state, payoff);
}

Block build_auction(const Mempool& mempool, int n, const ChainState& state,
                    const PayoffModel& payoff, bool bundle_counts_one_slot) {
  validate_mempool(mempool, n);
  std::vector<const MempoolEntry*> ranked;
  ranked.reserve(mempool.entries.size());
  for (const auto& entry : mempool.entries) ranked.push_back(&entry);
  std::sort(ranked.begin(), ranked.end(), [](const MempoolEntry* a, const MempoolEntry* b) {
    if (a->tip != b->tip) return a->tip > b->tip;
    return a->arrival_index < b->arrival_index;
  });

  std::vector<AtomicUnit> units;
  std::int64_t imbalance = state.imbalance;
  int slots_left = n;
  for (const MempoolEntry* entry : ranked) {
    if (slots_left == 0) break;
    AtomicUnit unit = unit_from_entry(*entry);
    const int needed = (unit.is_bundle && bundle_counts_one_slot)
                           ? 1
                           : static_cast<int>(unit.transactions.size());
    if (needed > slots_left) continue;  // atomic units cannot be split
    // Dry-run against the running state; an arbitrage that finds the pool
    // already equilibrated reverts the whole unit.
    std::int64_t scratch = imbalance;
    bool reverts = false;
    for (const Transaction& tx : unit.transactions) {
      if (const auto* trade = std::get_if<TraderTrade>(&tx)) {
        scratch += trade->direction;
      } else if (scratch == 0) {
        reverts = true;
        break;
      } else {
        scratch = 0;
      }
    }
    if (reverts) continue;
    imbalance = scratch;
    slots_left -= needed;
    units.push_back(std::move(unit));
  }
  if (slots_left > 0) {
    throw UnderfilledBlockError("only " + std::to_string(n - slots_left) + " of " +
                                std::to_string(n) + " slots could be filled");
  }
  return execute_block(units, state, payoff, bundle_counts_one_slot);
}

Block build_baseline(std::span<const Transaction> trade_stream, int n, const ChainState& state,
                     const PayoffModel& payoff) {
  if (n < 1) {
    throw std::invalid_argument("block size must be at least 1");
  }
  if (trade_stream.size() < static_cast<std::size_t>(n)) {
    throw StreamExhaustedError("trade stream holds " + std::to_string(trade_stream.size()) +
                               " trades, block needs " + std::to_string(n));
  }
  std::vector<AtomicUnit> units;
  units.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Transaction& tx = trade_stream[static_cast<std::size_t>(i)];
    if (!std::holds_alternative<TraderTrade>(tx)) {
      throw std::invalid_argument("baseline stream must contain trader trades only");
    }
    AtomicUnit unit;
    unit.transactions = {tx};
    unit.actor = actor_of(tx);
    unit.arrival_index = static_cast<std::uint32_t>(i);
    units.push_back(unit);
  }
  return execute_block(units, state, payoff);
}

OracleCheckResult oracle_check(int trials, int mempool_size, int n, std::uint64_t seed,
                               const BuilderFn& candidate) {
  BuilderFn probe = candidate;
  if (!probe) {
    probe = [](const Mempool& mp, int size, const ChainState& st, const PayoffModel& po) {
      return build_min_oracle_greedy(mp, size, st, po);
    };
  }
  const PayoffModel payoff = PayoffModel::linear(1);
  OracleCheckResult result;
  for (int trial = 0; trial < trials; ++trial) {
    RngStream rng(derive_stream_seed(seed, static_cast<std::uint64_t>(trial)));
    Mempool mempool;
    std::string signs;
    for (int i = 0; i < mempool_size; ++i) {
      const int direction = rng.bernoulli(0.5) ? +1 : -1;
      mempool.entries.push_back(MempoolEntry{
          make_trader_trade(direction, PlayerId{Role::Trader, static_cast<std::uint32_t>(i)}),
          static_cast<std::uint32_t>(i), 0});
      if (!signs.empty()) signs += ' ';
      signs += direction > 0 ? '+' : '-';
    }
    const ChainState state;
    const Block reference = build_min_oracle_bruteforce(mempool, n, state, payoff);
    const Block probed = probe(mempool, n, state, payoff);
    result.trials_run = trial + 1;
    if (abs64(probed.terminal_imbalance()) != abs64(reference.terminal_imbalance())) {
      result.ok = false;
      result.counterexample = signs;
      result.candidate_disorder = abs64(probed.terminal_imbalance());
      result.bruteforce_disorder = abs64(reference.terminal_imbalance());
      return result;
    }
  }
  return result;
}

}  // namespace mevsim
