#pragma once

// The two-pool market: chain state with a signed pool imbalance and player
// balances, Bernoulli traders, equilibrium-restoring searchers, and the
// entropy-based MEV classification of atomic transactions.

#include <compare>
#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "mevsim/info_theory.hpp"
#include "mevsim/rng.hpp"

namespace mevsim {

enum class Role { Trader, Searcher, Builder };

struct PlayerId {
  Role role = Role::Trader;
  std::uint32_t index = 0;

  auto operator<=>(const PlayerId&) const = default;
};

// A single-unit swap against pool 1. direction +1 buys the native token,
// -1 sells it.
struct TraderTrade {
  int direction = +1;
  PlayerId trader;

  bool operator==(const TraderTrade&) const = default;
};

// An atomic arbitrage that fully equilibrates the pools.
struct SearcherArb {
  PlayerId searcher;

  bool operator==(const SearcherArb&) const = default;
};

using Transaction = std::variant<TraderTrade, SearcherArb>;

// Validating constructors; trades must come from Trader-role players and
// arbitrages from Searcher-role players.
Transaction make_trader_trade(int direction, PlayerId trader);
Transaction make_searcher_arb(PlayerId searcher);

PlayerId actor_of(const Transaction& tx);
bool is_searcher_tx(const Transaction& tx);

// The simulated blockchain state. Only the signed difference between the two
// pools matters, so it is stored directly as `imbalance`; 0 is equilibrium.
// Values are immutable in use: apply_tx returns a new state.
struct ChainState {
  std::int64_t imbalance = 0;
  std::map<PlayerId, std::int64_t> balances;

  // 0 for players that never appeared in an applied transaction.
  std::int64_t balance_of(PlayerId id) const;
  bool knows(PlayerId id) const { return balances.count(id) != 0; }
};

// Profit for atomically closing k units of imbalance. payoff(0) = 0 and
// payoff is strictly increasing for k >= 1, which keeps every disorder-
// reducing arbitrage profitable.
class PayoffModel {
 public:
  enum class Kind { Linear, PerUnitTable };

  static PayoffModel linear(std::int64_t unit_value = 1);
  // by_magnitude[k] is the payoff for closing k units; entries beyond the
  // table extrapolate with the last increment.
  static PayoffModel per_unit_table(std::vector<std::int64_t> by_magnitude);

  std::int64_t value_for(std::int64_t magnitude) const;
  Kind kind() const { return kind_; }
  std::int64_t unit_value() const { return unit_value_; }

 private:
  PayoffModel(Kind kind, std::int64_t unit_value, std::vector<std::int64_t> table);

  Kind kind_;
  std::int64_t unit_value_;
  std::vector<std::int64_t> table_;
};

enum class MevClass { GoodAtomic, BadAtomic, NotMev };

// |imbalance|: the per-state disorder proxy. 0 iff equilibrium.
std::int64_t disorder(const ChainState& state);

// Bernoulli trade: buy with probability p, sell with 1-p. Deterministic given
// the stream state.
Transaction sample_trader_tx(Probability p, RngStream& rng, PlayerId trader);

// State transition. Trades move the imbalance by one unit and book the
// one-unit swap on the trader's balance. An arbitrage on an out-of-equilibrium
// state resets the imbalance to 0 and credits the searcher
// payoff(disorder); on an equilibrated state it is the identity.
ChainState apply_tx(const ChainState& state, const Transaction& tx, const PayoffModel& payoff);

// Searcher policy: arbitrage whenever there is any disorder to close.
bool searcher_would_act(const ChainState& state);

// balance(player, after) - balance(player, before). The player must be known
// to at least one of the two states; a player untouched by any transaction
// has delta 0.
std::int64_t realized_extracted_value(const ChainState& before, const ChainState& after,
                                      PlayerId player);

// GoodAtomic: the actor was paid for reducing disorder. BadAtomic: the actor
// extracted value while increasing disorder. Everything else is NotMev.
// Trader bookkeeping deltas are excluded from the extraction test, so trader
// trades are always NotMev.
MevClass classify_mev(const ChainState& before, const ChainState& after, PlayerId actor);

}  // namespace mevsim
