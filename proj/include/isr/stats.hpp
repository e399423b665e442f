#pragma once

#include <cstdint>

namespace isr::harness {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval for a binomial proportion. trials == 0 gives (0, 1).
// Throws std::invalid_argument if successes > trials.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

// Upper tail P[Bin(n, p) >= k], summed in log space.
double binomial_tail_at_least(std::uint64_t n, double p, std::uint64_t k);

struct Proportion {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;

  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
  Interval wilson(double z = 1.96) const { return wilson_interval(successes, trials, z); }
};

}  // namespace isr::harness
