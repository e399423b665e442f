#pragma once

// Compression under uncertain priors with a noisy shared dictionary.
//
// Alice, holding prior P and message m, sends her dictionary word w_{m,j} with
//   j = max{c, ceil((1+eps)/(1-h(mu)) * (log2(1/P(m)) + 2 Delta + log2(1/delta)))}.
// Bob, holding a prior Q with |log2(P_i/Q_i)| <= Delta, keeps the messages
// whose noisy word w'_{i,j} is within (mu + eps') j of the received word and
// outputs the Q-most-likely survivor (lowest index on ties).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isr/bitvec.hpp"
#include "isr/randsource.hpp"
#include "isr/stats.hpp"

namespace isr::compress {

class ProbVec {
 public:
  // Throws std::invalid_argument on negative entries or a sum outside 1 +- 1e-9.
  explicit ProbVec(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  double entropy() const { return entropy_; }

  // Inverse-CDF sample for u in [0, 1).
  std::size_t sample(double u) const;
  // Indices sorted by decreasing probability, ties by increasing index.
  std::span<const std::size_t> by_likelihood() const { return order_; }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
  std::vector<std::size_t> order_;
  double entropy_ = 0.0;
};

// Reads a JSON array of numbers, or whitespace-separated numbers.
ProbVec load_prob_vec(const std::string& path);
// p_i proportional to ratio^i, i < n.
ProbVec geometric_prob_vec(std::size_t n, double ratio);
// max_i |log2(P_i / Q_i)| over the joint support (infinite if supports differ).
double max_log_ratio(const ProbVec& p, const ProbVec& q);

// Solves 1/(1 - h(mu + eps')) = (1 + eps)/(1 - h(mu)) for eps' by bisection.
// Throws InfeasibleParameters when eps <= 0 or h(mu) >= 1.
double solve_epsilon_prime(double eps, double mu);

struct CompressParams {
  double rho = 1.0;
  double eps = 0.5;
  double delta = 0.1;
  double Delta = 0.0;
  double kappa = 3.0;
  // Derived.
  double mu = 0.0;
  double eps_prime = 0.0;
  std::size_t c = 0;

  // c = ceil(kappa / eps'^2 * ln(2 / delta)).
  static CompressParams make(double rho, double eps, double delta, double Delta,
                             double kappa = 3.0);

  double length_factor() const;  // (1 + eps) / (1 - h(mu))
  double radius_fraction() const { return mu + eps_prime; }
};

std::size_t codeword_length(const ProbVec& p, std::size_t message, const CompressParams& params);

// Throws std::invalid_argument if P(message) == 0 or src is not party A.
BitVec encode(const ProbVec& p, std::size_t message, const CompressParams& params,
              const rand::CorrelatedSource& src);

// nullopt when no message survives the radius test. Throws if src is not party B.
std::optional<std::size_t> decode(const ProbVec& q, const BitVec& word,
                                  const CompressParams& params,
                                  const rand::CorrelatedSource& src);

// The full surviving set S_X, ascending.
std::vector<std::size_t> decode_candidates(const ProbVec& q, const BitVec& word,
                                           const CompressParams& params,
                                           const rand::CorrelatedSource& src);

struct CompressionReport {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::uint64_t failures_empty = 0;  // trials where S_X was empty
  double success_rate = 0.0;
  double mean_length = 0.0;
  double length_bound = 0.0;  // (1+eps)/(1-h(mu)) (H(P) + 2 Delta + c)
  std::size_t max_length_formula_mismatch = 0;  // trials where |X| != codeword_length
  bool promise_ok = true;
  harness::Interval ci;
};

// Per trial t: seed mix(master_seed, t), m ~ P, encode as A, decode as B.
CompressionReport run_compression_experiment(const ProbVec& p, const ProbVec& q,
                                             const CompressParams& params, std::uint64_t trials,
                                             std::uint64_t master_seed, std::size_t jobs = 1);

}  // namespace isr::compress
