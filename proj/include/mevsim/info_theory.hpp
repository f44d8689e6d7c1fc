#pragma once

// Discrete information-theory primitives over integer-valued outcomes.
// All logarithms are base 2, so every quantity here is in bits.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace mevsim {

// Entropies are >= 0; entropy *deltas* are signed.
using Bits = double;

// A probability validated to lie in [0,1] at construction.
class Probability {
 public:
  explicit Probability(double value);
  double value() const { return value_; }

 private:
  double value_;
};

// Probability mass over distinct integer outcomes, kept sorted ascending.
// Construction enforces: masses >= 0, support distinct, sum(mass) == 1
// within kMassSumTolerance (absolute, Kahan-compensated).
class DiscreteDistribution {
 public:
  static constexpr double kMassSumTolerance = 1e-12;

  DiscreteDistribution(std::vector<std::int64_t> support, std::vector<double> mass);

  static DiscreteDistribution from_counts(const std::map<std::int64_t, std::int64_t>& counts);

  const std::vector<std::int64_t>& support() const { return support_; }
  const std::vector<double>& mass() const { return mass_; }
  std::size_t size() const { return support_.size(); }

  // Mass at an outcome, 0 if outside the support.
  double mass_at(std::int64_t outcome) const;

 private:
  std::vector<std::int64_t> support_;
  std::vector<double> mass_;
};

// Ensemble entropy after each transaction slot k = 0..n.
// per_step_delta[k] = per_step_entropy[k] - per_step_entropy[k-1]; entry 0 is 0.
struct EntropyTrajectory {
  std::vector<Bits> per_step_entropy;
  std::vector<double> per_step_delta;
};

// Surprisal -log2(p). Rejects p = 0 (impossible-event query); p = 1 maps to
// exactly 0 bits.
Bits info_content(Probability p);

// Shannon entropy -sum p log2 p with the 0*log2(0) := 0 convention.
Bits entropy(const DiscreteDistribution& d);

inline constexpr int kDefaultMaxBinomialN = 10'000;

// Distribution of the pool imbalance after n Bernoulli(+1/-1) trades:
// support {n - 2a : a = 0..n}, mass C(n,a) p^(n-a) q^a. Coefficients are
// evaluated in log space so n up to max_n stays overflow-free.
DiscreteDistribution binomial_imbalance_distribution(int n, Probability p,
                                                     int max_n = kDefaultMaxBinomialN);

// entropy(binomial_imbalance_distribution(n, p)), the exact reference value.
Bits binomial_entropy_exact(int n, Probability p);

// Large-n approximation 0.5 * log2(2 pi e n p (1-p)); requires n >= 1.
Bits binomial_entropy_asymptotic(int n, Probability p);

// Plug-in (maximum-likelihood) estimate: mass(v) = count(v) / len(samples).
DiscreteDistribution empirical_distribution(std::span<const std::int64_t> samples);

// h_after - h_before; positive means the step increased disorder.
double entropy_delta(Bits h_after, Bits h_before);

// Entropy of the empirical distribution at each step of an ensemble.
// Expects one sample list per step, all of equal length (one entry per run).
EntropyTrajectory entropy_trajectory(const std::vector<std::vector<std::int64_t>>& per_step_samples);

}  // namespace mevsim
