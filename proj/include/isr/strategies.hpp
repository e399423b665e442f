#pragma once

// Strategy trees and strategy vectors for k-round alternating protocols.
//
// A transcript is k bits i_1 .. i_k, indexed MSB first: index
// sum_j i_j 2^(k-j), so the children of a length-j prefix p are 2p and 2p+1.
// Alice speaks in rounds j = 0, 2, 4, ... (emitting i_{j+1} after a history of
// length j), Bob in the odd rounds, and the last bit is the verdict.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "isr/bitvec.hpp"
#include "isr/randsource.hpp"
#include "isr/stats.hpp"

namespace isr::strategies {

using rand::Party;

inline constexpr int kMaxRounds = 16;

bool owns_round(Party party, int j);

struct StrategyTree {
  Party party = Party::A;
  int k = 0;
  // tables[j][h]: probability of emitting 1 in round j after history h
  // (h < 2^j). Empty for rounds the party does not own.
  std::vector<std::vector<double>> tables;

  // All-1/2 tree. Throws std::invalid_argument unless 1 <= k <= 16.
  static StrategyTree uniform(Party party, int k);
  // Throws std::invalid_argument on bad shapes or entries outside [0, 1].
  void validate() const;
  bool deterministic() const;
};

struct StrategyVector {
  Party party = Party::A;
  int k = 0;
  std::vector<double> raw;  // x-bar, length 2^k

  // Entry times the verdict mask v (last transcript bit).
  std::vector<double> masked() const;
};

inline bool verdict(std::uint64_t transcript) { return transcript & 1u; }

// Probability of a length-j prefix given by the recursion: sum over the
// children at the party's own rounds, average at the other party's rounds.
double ptranscript(const StrategyVector& x, std::uint64_t prefix, int length);
// All prefix values, level by level: out[j][p] for j = 0..k.
std::vector<std::vector<double>> ptranscript_table(const StrategyVector& x);

struct Membership {
  bool ok = true;
  std::string violation;  // first failed constraint, empty when ok
};

Membership is_member(const StrategyVector& x, double tol = 1e-9);

StrategyVector tree_to_vector(const StrategyTree& tree);
// Transitions p(h 1) / p(h); 0/0 becomes 1/2.
StrategyTree vector_to_tree(const StrategyVector& x);

// sum_l xA(l) xB(l) v(l). Throws std::invalid_argument on a party or size mismatch.
double acceptance(const StrategyVector& xa, const StrategyVector& xb);

struct Simulation {
  harness::Proportion accepted;
  std::vector<std::uint64_t> histogram;  // per transcript; empty when samples == 0
};

// Sample s draws its round coins from seed mix(seed, s).
Simulation simulate(const StrategyTree& a, const StrategyTree& b, std::uint64_t seed,
                    std::uint64_t samples, std::size_t jobs = 1);
// The single transcript of two deterministic trees.
std::uint64_t replay(const StrategyTree& a, const StrategyTree& b);

// Concatenation of per-randomness strategy vectors into a gap inner-product
// instance with c = (2/3) 2^-k and s = (1/3) 2^-k. X carries the verdict mask.
struct Reduction {
  BitVec x;
  BitVec y;
  int k = 0;
  double c = 0.0;
  double s = 0.0;
};

// Throws std::invalid_argument unless every vector is a 0/1 member of the right party.
Reduction psr_to_gapip(const std::vector<StrategyVector>& alice,
                       const std::vector<StrategyVector>& bob);

// Toy 4-round equality test on 2-bit inputs with 8 shared random strings.
// For randomness R the string pair (r1, r2) is taken from a fixed table; Alice
// sends <a, r1>, Bob answers whether it matches <b, r1>, Alice sends <a, r2>,
// and Bob's verdict is "both matched". Unequal inputs pass for at most 2 of
// the 8 strings.
namespace toy {
inline constexpr int kRounds = 4;
inline constexpr int kStrings = 8;
std::pair<unsigned, unsigned> masks(int r);
StrategyTree alice(unsigned a, int r);
StrategyTree bob(unsigned b, int r);
}  // namespace toy

nlohmann::json to_json(const StrategyTree& tree);
// Throws std::invalid_argument on malformed input.
StrategyTree tree_from_json(const nlohmann::json& j);

}  // namespace isr::strategies
