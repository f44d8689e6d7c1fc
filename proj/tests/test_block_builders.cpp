#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "mevsim/block_builders.hpp"
#include "mevsim/rng.hpp"
#include "support/oracles.hpp"

using namespace mevsim;

namespace {

const PayoffModel kUnitPayoff = PayoffModel::linear(1);

Mempool trade_mempool(const std::vector<int>& directions) {
  Mempool mempool;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    mempool.entries.push_back(MempoolEntry{
        make_trader_trade(directions[i], PlayerId{Role::Trader, static_cast<std::uint32_t>(i)}),
        static_cast<std::uint32_t>(i), 0});
  }
  return mempool;
}

std::vector<Transaction> trade_stream(const std::vector<int>& directions) {
  std::vector<Transaction> stream;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    stream.push_back(
        make_trader_trade(directions[i], PlayerId{Role::Trader, static_cast<std::uint32_t>(i)}));
  }
  return stream;
}

std::vector<int> random_directions(RngStream& rng, int count, double p = 0.5) {
  std::vector<int> directions(static_cast<std::size_t>(count));
  for (auto& d : directions) d = rng.bernoulli(p) ? +1 : -1;
  return directions;
}

MempoolEntry arb_bundle(std::uint32_t searcher, std::uint32_t arrival, std::int64_t tip) {
  const PlayerId id{Role::Searcher, searcher};
  return MempoolEntry{Bundle{{make_searcher_arb(id)}, id}, arrival, tip};
}

bool blocks_equal(const Block& a, const Block& b) {
  return a.transactions == b.transactions && a.per_tx_records == b.per_tx_records &&
         a.slots == b.slots && a.consumed_arrivals == b.consumed_arrivals;
}

}  // namespace

TEST_CASE("brute-force oracle on hand mempools") {
  SUBCASE("balanced mempool fully cancels") {
    const Block block = build_min_oracle_bruteforce(trade_mempool({+1, +1, -1, -1}), 4,
                                                    ChainState{}, kUnitPayoff);
    CHECK(block.terminal_imbalance() == 0);
    CHECK(block.mev_total() == 0);
    CHECK(block.slots == 4);
    CHECK(block.max_intermediate_disorder == 1);  // strict buy/sell alternation
  }
  SUBCASE("uniform mempool leaves unavoidable disorder") {
    const Block block =
        build_min_oracle_bruteforce(trade_mempool({+1, +1, +1}), 3, ChainState{}, kUnitPayoff);
    CHECK(block.terminal_imbalance() == 3);
  }
  SUBCASE("ties resolve to the lexicographically smallest arrival sequence") {
    const Block block = build_min_oracle_bruteforce(trade_mempool({+1, +1, -1, -1}), 2,
                                                    ChainState{}, kUnitPayoff);
    std::vector<std::uint32_t> consumed = block.consumed_arrivals;
    std::sort(consumed.begin(), consumed.end());
    CHECK(consumed == std::vector<std::uint32_t>{0, 2});
  }
  SUBCASE("combinatorial cap raises the dedicated error") {
    RngStream rng(3);
    const Mempool mempool = trade_mempool(random_directions(rng, 30));
    CHECK_THROWS_AS(
        build_min_oracle_bruteforce(mempool, 15, ChainState{}, kUnitPayoff, 1'000'000),
        CombinatorialLimitError);
  }
  SUBCASE("matches the exhaustive bitmask oracle on random instances") {
    RngStream rng(17);
    for (int trial = 0; trial < 300; ++trial) {
      const int m = 4 + static_cast<int>(rng.next_u64() % 9);  // 4..12
      const int n = 1 + static_cast<int>(rng.next_u64() % std::min(m, 6));
      const auto directions = random_directions(rng, m);
      const Block block =
          build_min_oracle_bruteforce(trade_mempool(directions), n, ChainState{}, kUnitPayoff);
      CHECK(std::abs(block.terminal_imbalance()) ==
            mevsim::testing::exhaustive_min_terminal_disorder(directions, n));
    }
  }
}

TEST_CASE("greedy matcher") {
  SUBCASE("balanced mempool with even n cancels fully") {
    RngStream rng(23);
    std::vector<int> directions;
    for (int i = 0; i < 20; ++i) directions.push_back(i % 2 == 0 ? +1 : -1);
    const Block block =
        build_min_oracle_greedy(trade_mempool(directions), 10, ChainState{}, kUnitPayoff);
    CHECK(block.terminal_imbalance() == 0);
    CHECK(block.mev_total() == 0);
  }
  SUBCASE("surplus side fills the remainder") {
    const Block block =
        build_min_oracle_greedy(trade_mempool({+1, +1, +1, -1}), 4, ChainState{}, kUnitPayoff);
    CHECK(std::abs(block.terminal_imbalance()) == 2);
  }
  SUBCASE("agrees with brute force on random instances") {
    RngStream rng(29);
    for (int trial = 0; trial < 1'000; ++trial) {
      const int m = 4 + static_cast<int>(rng.next_u64() % 9);
      const int n = 1 + static_cast<int>(rng.next_u64() % std::min(m, 6));
      const auto directions = random_directions(rng, m);
      const Mempool mempool = trade_mempool(directions);
      const Block greedy = build_min_oracle_greedy(mempool, n, ChainState{}, kUnitPayoff);
      const Block brute = build_min_oracle_bruteforce(mempool, n, ChainState{}, kUnitPayoff);
      CHECK(std::abs(greedy.terminal_imbalance()) == std::abs(brute.terminal_imbalance()));
    }
  }
  SUBCASE("agrees with brute force from out-of-equilibrium starts") {
    RngStream rng(37);
    for (int trial = 0; trial < 300; ++trial) {
      ChainState state;
      state.imbalance = static_cast<std::int64_t>(rng.next_u64() % 9) - 4;
      const int m = 4 + static_cast<int>(rng.next_u64() % 7);
      const int n = 1 + static_cast<int>(rng.next_u64() % std::min(m, 5));
      const auto directions = random_directions(rng, m);
      const Block greedy =
          build_min_oracle_greedy(trade_mempool(directions), n, state, kUnitPayoff);
      CHECK(std::abs(greedy.terminal_imbalance()) ==
            mevsim::testing::exhaustive_min_terminal_disorder(directions, n, state.imbalance));
    }
  }
  SUBCASE("mempool must cover the block and hold plain trades") {
    CHECK_THROWS_AS(build_min_oracle_greedy(trade_mempool({+1}), 2, ChainState{}, kUnitPayoff),
                    std::invalid_argument);
    Mempool with_bundle = trade_mempool({+1, -1});
    with_bundle.entries.push_back(arb_bundle(0, 2, 5));
    CHECK_THROWS_AS(build_min_oracle_greedy(with_bundle, 3, ChainState{}, kUnitPayoff),
                    std::invalid_argument);
  }
}

TEST_CASE("fcfs blocks") {
  SUBCASE("even block extracts floor(n/2) unit arbitrages") {
    RngStream rng(41);
    const auto stream = trade_stream(random_directions(rng, 10));
    const Block block = build_fcfs(stream, 10, ChainState{}, kUnitPayoff);
    CHECK(block.mev_total() == 5);
    CHECK(block.good_mev_count() == 5);
    CHECK(block.terminal_imbalance() == 0);
    CHECK(block.slots == 10);
    // strict trade/arb alternation from an equilibrated start
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
      CHECK(is_searcher_tx(block.transactions[i]) == (i % 2 == 1));
    }
  }
  SUBCASE("single-slot block holds one trade and no MEV") {
    const Block block = build_fcfs(trade_stream({+1}), 1, ChainState{}, kUnitPayoff);
    CHECK(block.mev_total() == 0);
    CHECK(block.good_mev_count() == 0);
    CHECK(block.transactions.size() == 1);
  }
  SUBCASE("odd block leaves one residual unit") {
    RngStream rng(43);
    const auto stream = trade_stream(random_directions(rng, 7));
    const Block block = build_fcfs(stream, 7, ChainState{}, kUnitPayoff);
    CHECK(block.mev_total() == 3 * kUnitPayoff.value_for(1));
    CHECK(std::abs(block.terminal_imbalance()) == 1);
  }
  SUBCASE("convex table payoff still pays per single-unit arbitrage") {
    const auto convex = PayoffModel::per_unit_table({0, 1, 4, 9, 16});
    RngStream rng(47);
    const auto stream = trade_stream(random_directions(rng, 11));
    const Block block = build_fcfs(stream, 11, ChainState{}, convex);
    CHECK(block.mev_total() == 5 * convex.value_for(1));
  }
  SUBCASE("arbs classify good, trades classify not-MEV") {
    RngStream rng(53);
    const auto stream = trade_stream(random_directions(rng, 8));
    const Block block = build_fcfs(stream, 8, ChainState{}, kUnitPayoff);
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
      if (is_searcher_tx(block.transactions[i])) {
        CHECK(block.per_tx_records[i].mev == MevClass::GoodAtomic);
        CHECK(block.per_tx_records[i].mev_payoff > 0);
      } else {
        CHECK(block.per_tx_records[i].mev == MevClass::NotMev);
        CHECK(block.per_tx_records[i].mev_payoff == 0);
      }
    }
  }
  SUBCASE("stream exhaustion raises the dedicated error") {
    CHECK_THROWS_AS(build_fcfs(trade_stream({+1}), 3, ChainState{}, kUnitPayoff),
                    StreamExhaustedError);
  }
  SUBCASE("payoff conservation: block MEV equals the sum of arb-moment payoffs") {
    RngStream rng(59);
    for (int trial = 0; trial < 100; ++trial) {
      const auto stream = trade_stream(random_directions(rng, 16));
      const Block block = build_fcfs(stream, 16, ChainState{}, kUnitPayoff);
      std::int64_t expected = 0;
      for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        if (is_searcher_tx(block.transactions[i])) {
          expected += kUnitPayoff.value_for(block.per_tx_records[i].disorder_before());
        }
      }
      CHECK(block.mev_total() == expected);
    }
  }
}

TEST_CASE("auction blocks") {
  SUBCASE("highest tip executes first") {
    ChainState state;
    state.imbalance = 3;  // both bundles target real disorder; the second reverts
    Mempool mempool = trade_mempool({+1, -1, +1, -1});
    mempool.entries.push_back(arb_bundle(0, 4, 3));
    mempool.entries.push_back(arb_bundle(1, 5, 5));
    const Block block = build_auction(mempool, 4, state, kUnitPayoff);
    REQUIRE(!block.transactions.empty());
    CHECK(is_searcher_tx(block.transactions.front()));
    CHECK(std::get<SearcherArb>(block.transactions.front()).searcher.index == 1);
    CHECK(block.per_tx_records.front().mev == MevClass::GoodAtomic);
    CHECK(block.per_tx_records.front().mev_payoff == 3);
    // the tip-3 bundle reverted against the equilibrated pool
    for (std::size_t i = 1; i < block.transactions.size(); ++i) {
      CHECK(!is_searcher_tx(block.transactions[i]));
    }
  }
  SUBCASE("bundles against an equilibrated pool are skipped") {
    Mempool mempool = trade_mempool({+1, -1, +1, -1});
    mempool.entries.push_back(arb_bundle(0, 4, 5));
    const Block block = build_auction(mempool, 4, ChainState{}, kUnitPayoff);
    for (const auto& tx : block.transactions) CHECK(!is_searcher_tx(tx));
    CHECK(block.mev_total() == 0);
  }
  SUBCASE("equal tips preserve arrival order") {
    const Block block =
        build_auction(trade_mempool({+1, -1, +1, -1, +1}), 5, ChainState{}, kUnitPayoff);
    CHECK(block.consumed_arrivals == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
  }
  SUBCASE("executed bundle tips are non-increasing") {
    RngStream rng(61);
    for (int trial = 0; trial < 200; ++trial) {
      ChainState state;
      state.imbalance = 1 + static_cast<std::int64_t>(rng.next_u64() % 5);
      Mempool mempool = trade_mempool(random_directions(rng, 10));
      const int bundles = 1 + static_cast<int>(rng.next_u64() % 4);
      for (int i = 0; i < bundles; ++i) {
        mempool.entries.push_back(arb_bundle(static_cast<std::uint32_t>(i),
                                             static_cast<std::uint32_t>(10 + i),
                                             1 + static_cast<std::int64_t>(rng.next_u64() % 9)));
      }
      const Block block = build_auction(mempool, 8, state, kUnitPayoff);
      std::int64_t last_tip = -1;
      for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        if (!block.per_tx_records[i].group_head || !is_searcher_tx(block.transactions[i])) {
          continue;
        }
        std::int64_t tip = -1;
        for (const auto& entry : mempool.entries) {
          if (const auto* bundle = std::get_if<Bundle>(&entry.payload)) {
            if (bundle->submitter == std::get<SearcherArb>(block.transactions[i]).searcher) {
              tip = entry.tip;
            }
          }
        }
        if (last_tip >= 0) CHECK(tip <= last_tip);
        last_tip = tip;
      }
    }
  }
  SUBCASE("tip ranking is invariant under uniform positive scaling") {
    ChainState state;
    state.imbalance = 2;
    Mempool low = trade_mempool({+1, -1, +1});
    low.entries.push_back(arb_bundle(0, 3, 10));
    low.entries.push_back(arb_bundle(1, 4, 5));
    Mempool high = low;
    high.entries[3].tip = 18;
    high.entries[4].tip = 9;
    const Block block_low = build_auction(low, 3, state, kUnitPayoff);
    const Block block_high = build_auction(high, 3, state, kUnitPayoff);
    CHECK(block_low.transactions == block_high.transactions);
  }
  SUBCASE("multi-transaction bundles are atomic and can take one slot") {
    const PlayerId searcher{Role::Searcher, 7};
    Bundle sandwich{{make_trader_trade(+1, PlayerId{Role::Trader, 90}), make_searcher_arb(searcher)},
                    searcher};
    Mempool mempool = trade_mempool({+1, -1, +1});
    mempool.entries.push_back(MempoolEntry{sandwich, 3, 4});

    const Block flat = build_auction(mempool, 3, ChainState{}, kUnitPayoff, false);
    CHECK(flat.transactions.size() == 3);  // two inner transactions count two slots
    CHECK(flat.slots == 3);

    const Block packed = build_auction(mempool, 3, ChainState{}, kUnitPayoff, true);
    CHECK(packed.slots == 3);
    CHECK(packed.transactions.size() == 4);  // bundle inner txs share one slot
    CHECK(packed.per_tx_records[0].slot == 0);
    CHECK(packed.per_tx_records[1].slot == 0);
    CHECK(packed.per_tx_records[0].group_head);
    CHECK_FALSE(packed.per_tx_records[1].group_head);
  }
  SUBCASE("underfilled blocks are an error") {
    Mempool mempool = trade_mempool({+1, -1});
    mempool.entries.push_back(arb_bundle(0, 2, 5));  // reverts at equilibrium
    CHECK_THROWS_AS(build_auction(mempool, 3, ChainState{}, kUnitPayoff), UnderfilledBlockError);
  }
}

TEST_CASE("baseline builder") {
  const Block block = build_baseline(trade_stream({+1, +1, -1, +1}), 3, ChainState{}, kUnitPayoff);
  CHECK(block.transactions.size() == 3);
  CHECK(block.terminal_imbalance() == 1);
  CHECK(block.mev_total() == 0);
  CHECK_THROWS_AS(build_baseline(trade_stream({+1}), 2, ChainState{}, kUnitPayoff),
                  StreamExhaustedError);
}

TEST_CASE("identical inputs produce identical blocks for every strategy") {
  RngStream rng(67);
  const auto directions = random_directions(rng, 12);
  const Mempool mempool = trade_mempool(directions);
  const auto stream = trade_stream(directions);
  ChainState state;
  state.imbalance = 2;
  Mempool auction_pool = mempool;
  auction_pool.entries.push_back(arb_bundle(0, 12, 2));

  CHECK(blocks_equal(build_min_oracle_bruteforce(mempool, 6, state, kUnitPayoff),
                     build_min_oracle_bruteforce(mempool, 6, state, kUnitPayoff)));
  CHECK(blocks_equal(build_min_oracle_greedy(mempool, 6, state, kUnitPayoff),
                     build_min_oracle_greedy(mempool, 6, state, kUnitPayoff)));
  CHECK(blocks_equal(build_fcfs(stream, 6, state, kUnitPayoff),
                     build_fcfs(stream, 6, state, kUnitPayoff)));
  CHECK(blocks_equal(build_auction(auction_pool, 6, state, kUnitPayoff),
                     build_auction(auction_pool, 6, state, kUnitPayoff)));
  CHECK(blocks_equal(build_baseline(stream, 6, state, kUnitPayoff),
                     build_baseline(stream, 6, state, kUnitPayoff)));
}

TEST_CASE("subset_count_capped") {
  CHECK(subset_count_capped(4, 2, 1'000) == 6);
  CHECK(subset_count_capped(12, 6, 1'000) == 924);
  CHECK(subset_count_capped(40, 10, 5'000'000) > 5'000'000);  // saturates
  CHECK(subset_count_capped(10, 0, 100) == 1);
  CHECK(subset_count_capped(10, 11, 100) == 0);
}

TEST_CASE("oracle_check validates the greedy builder and catches broken ones") {
  const auto ok = oracle_check(100, 12, 6, 2024);
  CHECK(ok.ok);
  CHECK(ok.trials_run == 100);

  // Negative control: a builder that just takes the first n arrivals.
  const BuilderFn arrival_order = [](const Mempool& mempool, int n, const ChainState& state,
                                     const PayoffModel& payoff) {
    std::vector<const MempoolEntry*> chosen;
    for (int i = 0; i < n; ++i) chosen.push_back(&mempool.entries[static_cast<std::size_t>(i)]);
    std::vector<AtomicUnit> units;
    for (const auto* entry : chosen) {
      AtomicUnit unit;
      unit.transactions = {std::get<Transaction>(entry->payload)};
      unit.actor = actor_of(unit.transactions.front());
      unit.arrival_index = entry->arrival_index;
      units.push_back(unit);
    }
    return execute_block(units, state, payoff);
  };
  const auto broken = oracle_check(200, 12, 6, 2024, arrival_order);
  CHECK_FALSE(broken.ok);
  CHECK(!broken.counterexample.empty());
  CHECK(broken.candidate_disorder > broken.bruteforce_disorder);
}
