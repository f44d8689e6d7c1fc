#include "mevsim/market_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace mevsim {

Transaction make_trader_trade(int direction, PlayerId trader) {
  if (direction != 1 && direction != -1) {
    throw std::invalid_argument("trade direction must be +1 or -1");
  }
  if (trader.role != Role::Trader) {
    throw std::invalid_argument("trade submitted by a non-trader player");
  }
  return TraderTrade{direction, trader};
}

Transaction make_searcher_arb(PlayerId searcher) {
  if (searcher.role != Role::Searcher) {
    throw std::invalid_argument("arbitrage submitted by a non-searcher player");
  }
  return SearcherArb{searcher};
}

PlayerId actor_of(const Transaction& tx) {
  if (const auto* trade = std::get_if<TraderTrade>(&tx)) return trade->trader;
  return std::get<SearcherArb>(tx).searcher;
}

bool is_searcher_tx(const Transaction& tx) {
  return std::holds_alternative<SearcherArb>(tx);
}

std::int64_t ChainState::balance_of(PlayerId id) const {
  auto it = balances.find(id);
  return it == balances.end() ? 0 : it->second;
}

PayoffModel::PayoffModel(Kind kind, std::int64_t unit_value, std::vector<std::int64_t> table)
    : kind_(kind), unit_value_(unit_value), table_(std::move(table)) {}

PayoffModel PayoffModel::linear(std::int64_t unit_value) {
  if (unit_value < 1) {
    throw std::invalid_argument("unit_value must be a positive integer");
  }
  return PayoffModel(Kind::Linear, unit_value, {});
}

PayoffModel PayoffModel::per_unit_table(std::vector<std::int64_t> by_magnitude) {
  if (by_magnitude.size() < 2) {
    throw std::invalid_argument("payoff table needs entries for magnitudes 0 and 1");
  }
  if (by_magnitude[0] != 0) {
    throw std::invalid_argument("payoff(0) must be 0");
  }
  if (by_magnitude[1] <= 0) {
    throw std::invalid_argument("payoff(1) must be positive");
  }
  for (std::size_t k = 2; k < by_magnitude.size(); ++k) {
    if (by_magnitude[k] <= by_magnitude[k - 1]) {
      throw std::invalid_argument("payoff table must be strictly increasing from k = 1");
    }
  }
  const std::int64_t unit = by_magnitude[1];
  return PayoffModel(Kind::PerUnitTable, unit, std::move(by_magnitude));
}

std::int64_t PayoffModel::value_for(std::int64_t magnitude) const {
  if (magnitude < 0) {
    throw std::invalid_argument("payoff queried for a negative magnitude");
  }
  if (kind_ == Kind::Linear) {
    return unit_value_ * magnitude;
  }
  const auto size = static_cast<std::int64_t>(table_.size());
  if (magnitude < size) {
    return table_[static_cast<std::size_t>(magnitude)];
  }
  const std::int64_t last_increment = table_[table_.size() - 1] - table_[table_.size() - 2];
  return table_.back() + (magnitude - (size - 1)) * last_increment;
}

std::int64_t disorder(const ChainState& state) {
  return state.imbalance < 0 ? -state.imbalance : state.imbalance;
}

Transaction sample_trader_tx(Probability p, RngStream& rng, PlayerId trader) {
  if (!(p.value() > 0.0 && p.value() < 1.0)) {
    throw std::domain_error("trader buy probability must satisfy 0 < p < 1");
  }
  const int direction = rng.bernoulli(p.value()) ? +1 : -1;
  return make_trader_trade(direction, trader);
}

ChainState apply_tx(const ChainState& state, const Transaction& tx, const PayoffModel& payoff) {
  ChainState next = state;
  if (const auto* trade = std::get_if<TraderTrade>(&tx)) {
    next.imbalance += trade->direction;
    // One-unit swap bookkeeping; excluded from MEV accounting.
    next.balances[trade->trader] += trade->direction > 0 ? -1 : +1;
    return next;
  }
  const auto& arb = std::get<SearcherArb>(tx);
  const std::int64_t d = disorder(state);
  if (d == 0) {
    // Arbitrage of an equilibrated pool is the identity.
    return next;
  }
  next.imbalance = 0;
  next.balances[arb.searcher] += payoff.value_for(d);
  return next;
}

bool searcher_would_act(const ChainState& state) { return disorder(state) > 0; }

std::int64_t realized_extracted_value(const ChainState& before, const ChainState& after,
                                      PlayerId player) {
  if (!before.knows(player) && !after.knows(player)) {
    throw std::invalid_argument("unknown player: never referenced by an applied transaction");
  }
  return after.balance_of(player) - before.balance_of(player);
}

MevClass classify_mev(const ChainState& before, const ChainState& after, PlayerId actor) {
  const std::int64_t d_before = disorder(before);
  const std::int64_t d_after = disorder(after);
  const std::int64_t raw_delta = realized_extracted_value(before, after, actor);
  // A trader's one-unit swap is bookkeeping, not extraction; it never counts
  // toward MEV even when the trade happens to land nearer equilibrium.
  const std::int64_t extracted = actor.role == Role::Trader ? 0 : raw_delta;
  if (extracted > 0 && d_after < d_before) return MevClass::GoodAtomic;
  if (extracted > 0 && d_after > d_before) return MevClass::BadAtomic;
  return MevClass::NotMev;
}

}  // namespace mevsim
