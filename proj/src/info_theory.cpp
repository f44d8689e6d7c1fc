#include "mevsim/info_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mevsim {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321214581766;

double log2_checked(double x) { return std::log(x) / kLn2; }

// Kahan-compensated sum; the validation tolerance is tight enough that a
// naive left fold over ~1e4 masses would eat most of it.
double compensated_sum(const std::vector<double>& xs) {
  double sum = 0.0;
  double carry = 0.0;
  for (double x : xs) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double log_binomial_coefficient(int n, int a) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(a) + 1.0) -
         std::lgamma(static_cast<double>(n - a) + 1.0);
}

}  // namespace

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::domain_error("probability outside [0,1]: " + std::to_string(value));
  }
}

DiscreteDistribution::DiscreteDistribution(std::vector<std::int64_t> support,
                                           std::vector<double> mass)
    : support_(std::move(support)), mass_(std::move(mass)) {
  if (support_.size() != mass_.size()) {
    throw std::invalid_argument("support and mass lengths differ");
  }
  if (support_.empty()) {
    throw std::invalid_argument("empty distribution");
  }
  // Keep outcomes sorted ascending; reorder the masses along with them.
  std::vector<std::size_t> order(support_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return support_[a] < support_[b]; });
  std::vector<std::int64_t> sorted_support(support_.size());
  std::vector<double> sorted_mass(mass_.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted_support[i] = support_[order[i]];
    sorted_mass[i] = mass_[order[i]];
  }
  support_ = std::move(sorted_support);
  mass_ = std::move(sorted_mass);

  for (std::size_t i = 1; i < support_.size(); ++i) {
    if (support_[i] == support_[i - 1]) {
      throw std::invalid_argument("duplicate outcome in support: " +
                                  std::to_string(support_[i]));
    }
  }
  for (double m : mass_) {
    if (!(m >= 0.0)) {
      throw std::invalid_argument("negative or NaN mass");
    }
  }
  double sum = compensated_sum(mass_);
  if (std::abs(sum - 1.0) > kMassSumTolerance) {
    throw std::invalid_argument("masses sum to " + std::to_string(sum) + ", not 1");
  }
}

DiscreteDistribution DiscreteDistribution::from_counts(
    const std::map<std::int64_t, std::int64_t>& counts) {
  if (counts.empty()) {
    throw std::invalid_argument("empty count table");
  }
  std::int64_t total = 0;
  for (const auto& [outcome, count] : counts) {
    if (count < 0) {
      throw std::invalid_argument("negative count");
    }
    total += count;
  }
  if (total == 0) {
    throw std::invalid_argument("all counts zero");
  }
  std::vector<std::int64_t> support;
  std::vector<double> mass;
  support.reserve(counts.size());
  mass.reserve(counts.size());
  for (const auto& [outcome, count] : counts) {
    if (count == 0) continue;
    support.push_back(outcome);
    mass.push_back(static_cast<double>(count) / static_cast<double>(total));
  }
  return DiscreteDistribution(std::move(support), std::move(mass));
}

double DiscreteDistribution::mass_at(std::int64_t outcome) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), outcome);
  if (it == support_.end() || *it != outcome) return 0.0;
  return mass_[static_cast<std::size_t>(it - support_.begin())];
}

Bits info_content(Probability p) {
  if (p.value() == 0.0) {
    throw std::domain_error("information content of an impossible event");
  }
  if (p.value() == 1.0) return 0.0;
  return -log2_checked(p.value());
}

Bits entropy(const DiscreteDistribution& d) {
  double h = 0.0;
  for (double m : d.mass()) {
    if (m > 0.0) {
      h -= m * log2_checked(m);
    }
  }
  // A single mass can sit at 1 + O(tolerance) and push the sum fractionally
  // below zero.
  return h < 0.0 ? 0.0 : h;
}

DiscreteDistribution binomial_imbalance_distribution(int n, Probability p, int max_n) {
  if (n < 0) {
    throw std::domain_error("negative trade count");
  }
  if (n > max_n) {
    throw std::invalid_argument("trade count " + std::to_string(n) +
                                " exceeds configured maximum " + std::to_string(max_n));
  }
  if (!(p.value() > 0.0 && p.value() < 1.0)) {
    throw std::domain_error("binomial requires 0 < p < 1");
  }
  const double log_p = std::log(p.value());
  const double log_q = std::log(1.0 - p.value());
  std::vector<std::int64_t> support(static_cast<std::size_t>(n) + 1);
  std::vector<double> log_mass(static_cast<std::size_t>(n) + 1);
  double max_log = -std::numeric_limits<double>::infinity();
  // a sell orders out of n; stored ascending, so a runs n..0.
  for (int a = n; a >= 0; --a) {
    const std::size_t i = static_cast<std::size_t>(n - a);
    support[i] = static_cast<std::int64_t>(n) - 2 * static_cast<std::int64_t>(a);
    log_mass[i] = log_binomial_coefficient(n, a) + (n - a) * log_p + a * log_q;
    max_log = std::max(max_log, log_mass[i]);
  }
  // Exp-normalize in extended precision: lgamma carries ~1e-11 absolute error
  // at n ~ 1e4, which would otherwise push the mass sum past its tolerance.
  std::vector<long double> weight(log_mass.size());
  long double total = 0.0L;
  for (std::size_t i = 0; i < log_mass.size(); ++i) {
    weight[i] = std::exp(static_cast<long double>(log_mass[i] - max_log));
    total += weight[i];
  }
  std::vector<double> mass(log_mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i) {
    mass[i] = static_cast<double>(weight[i] / total);
  }
  return DiscreteDistribution(std::move(support), std::move(mass));
}

Bits binomial_entropy_exact(int n, Probability p) {
  return entropy(binomial_imbalance_distribution(n, p));
}

Bits binomial_entropy_asymptotic(int n, Probability p) {
  if (n < 1) {
    throw std::domain_error("asymptotic entropy needs n >= 1");
  }
  if (!(p.value() > 0.0 && p.value() < 1.0)) {
    throw std::domain_error("asymptotic entropy requires 0 < p < 1");
  }
  const double two_pi_e = 2.0 * M_PI * std::exp(1.0);
  return 0.5 * log2_checked(two_pi_e * n * p.value() * (1.0 - p.value()));
}

DiscreteDistribution empirical_distribution(std::span<const std::int64_t> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("empirical distribution of an empty sample");
  }
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t v : samples) {
    ++counts[v];
  }
  return DiscreteDistribution::from_counts(counts);
}

double entropy_delta(Bits h_after, Bits h_before) { return h_after - h_before; }

EntropyTrajectory entropy_trajectory(
    const std::vector<std::vector<std::int64_t>>& per_step_samples) {
  if (per_step_samples.empty()) {
    throw std::invalid_argument("trajectory needs at least step 0");
  }
  const std::size_t runs = per_step_samples.front().size();
  for (const auto& step : per_step_samples) {
    if (step.empty()) {
      throw std::invalid_argument("empty sample list for a step");
    }
    if (step.size() != runs) {
      throw std::invalid_argument("ragged ensemble: sample lists differ in length");
    }
  }
  EntropyTrajectory traj;
  traj.per_step_entropy.reserve(per_step_samples.size());
  traj.per_step_delta.reserve(per_step_samples.size());
  for (const auto& step : per_step_samples) {
    traj.per_step_entropy.push_back(entropy(empirical_distribution(step)));
  }
  traj.per_step_delta.push_back(0.0);
  for (std::size_t k = 1; k < traj.per_step_entropy.size(); ++k) {
    traj.per_step_delta.push_back(
        entropy_delta(traj.per_step_entropy[k], traj.per_step_entropy[k - 1]));
  }
  return traj;
}

}  // namespace mevsim
