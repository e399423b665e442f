#pragma once

// Entropy and Boolean-function analysis on the product space Bern(n, p).
//
// Coordinates are 1-based in the public API (i = 1..n) and map to bit i-1 of
// the table index. Fourier coefficients are indexed by subset bitmask with the
// same convention, over the orthonormal basis
//   chi_0 = 1,  chi_1(x) = (x - p) / sqrt(p (1 - p)),
// which reduces to the usual +-1 characters at p = 1/2.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "isr/bitvec.hpp"

namespace isr::math {

inline constexpr int kMaxBooleanFnVars = 20;

// h(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0.
// Throws std::domain_error outside [0, 1].
double binary_entropy(double x);

// Shannon entropy in bits of a probability vector (zeros skipped).
double entropy_bits(std::span<const double> probs);

struct FourierExpansion {
  int n = 0;
  double p = 0.5;
  std::vector<double> coeffs;  // indexed by subset mask S

  double operator[](std::uint32_t s) const { return coeffs[s]; }
  // h(x) = sum_S c_S prod_{i in S} chi(x_i).
  double evaluate(std::uint32_t x) const;
};

class BooleanFn {
 public:
  // Throws std::invalid_argument unless values.size() == 2^n, 1 <= n <= 20,
  // and 0 < p < 1.
  BooleanFn(int n, std::vector<double> values, double p = 0.5);

  int n() const { return n_; }
  double p() const { return p_; }
  std::span<const double> values() const { return values_; }
  double operator()(std::uint32_t x) const { return values_[x]; }

  // Probability of x under Bern(n, p).
  double weight(std::uint32_t x) const;
  double mean() const;
  double second_moment() const;
  bool in_range(double lo, double hi) const;

  // Computed on first use; thread-safe.
  const FourierExpansion& fourier() const;

 private:
  int n_;
  double p_;
  std::vector<double> values_;
  struct Cache {
    std::once_flag once;
    FourierExpansion expansion;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

FourierExpansion fourier_expand(const BooleanFn& f);
BooleanFn reconstruct(const FourierExpansion& e);

// Inf_i(f) = sum_{S containing i} f^_S^2. Throws std::out_of_range for i.
double influence(const BooleanFn& f, int i);
// Same sum restricted to |S| <= d.
double low_degree_influence(const BooleanFn& f, int i, int d);
// |{i : Inf_i^{<=d}(f) > tau}|.
std::size_t count_influential(const BooleanFn& f, double tau, int d);

// T_{1-eta} f: each coordinate independently kept w.p. 1-eta, resampled from
// Bern(p) w.p. eta, then averaged. Computed by direct per-coordinate
// averaging on the value table.
BooleanFn noise_operator(const BooleanFn& f, double eta);
// Fourier side of the same operator: c_S -> (1-eta)^|S| c_S.
FourierExpansion damp(const FourierExpansion& e, double eta);

}  // namespace isr::math
