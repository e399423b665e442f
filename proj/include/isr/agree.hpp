#pragma once

// Agreement distillation by syndrome decoding.
//
// Alice keeps her k correlated bits r and sends y = H r over GF(2) for a random
// l x k parity matrix H with l = ceil(h(mu + eps) k). Bob searches the Hamming
// ball of radius floor((mu + eps) k) around his bits r' for strings with
// syndrome y and outputs the unique one, or r' itself if there is none or
// more than one.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "isr/bitvec.hpp"
#include "isr/randsource.hpp"
#include "isr/stats.hpp"

namespace isr::agree {

inline constexpr std::size_t kMaxK = 64;

struct ParityMatrix {
  std::size_t ell = 0;
  std::size_t k = 0;
  std::vector<std::uint64_t> rows;  // row i: bit j is H[i][j]
  bool degenerate = false;          // ell >= k, nothing saved over sending r

  // H v as an ell-bit word. Throws std::invalid_argument if v.size() != k.
  std::uint64_t syndrome(const BitVec& v) const;
  std::uint64_t syndrome(std::uint64_t v) const;
};

// ell = min(ceil(h(mu + eps) k), k) uniform rows, deterministic in seed.
// Throws InfeasibleParameters unless 1 <= k <= 64, eps >= 0, mu >= 0, mu + eps < 1/2.
ParityMatrix gen_matrix(std::uint64_t seed, std::size_t k, double eps, double mu);
std::size_t syndrome_rows(std::size_t k, double eps, double mu);
std::size_t decode_radius(std::size_t k, double eps, double mu);

struct AliceMessage {
  BitVec wA;
  std::uint64_t syndrome = 0;
};

AliceMessage alice_step(const BitVec& r, const ParityMatrix& h);

// Strings within `radius` of r_prime whose syndrome is y, in order of
// increasing distance. Stops after `limit` solutions.
std::vector<BitVec> bounded_distance_candidates(const BitVec& r_prime, std::uint64_t y,
                                                const ParityMatrix& h, std::size_t radius,
                                                std::size_t limit = SIZE_MAX);

BitVec bob_decode(const BitVec& r_prime, std::uint64_t y, const ParityMatrix& h,
                  std::size_t radius);

struct AgreeOutcome {
  BitVec wA;
  BitVec wB;
  std::size_t sent_bits = 0;
  bool agreed = false;
};

// One run of the protocol on the correlated bit stream of `alice`
// (and its party-B view).
AgreeOutcome run_protocol(const rand::CorrelatedSource& alice, const ParityMatrix& h,
                          std::size_t radius);

// Both parties output their first k correlated bits, no communication.
AgreeOutcome first_k_baseline(const rand::CorrelatedSource& alice, std::size_t k);

struct AgreeReport {
  std::size_t k = 0;
  double rho = 0.0;
  double eps = 0.0;
  std::size_t ell = 0;
  std::size_t radius = 0;
  bool degenerate = false;
  harness::Proportion agreed;
  bool wA_always_raw = true;  // wA == r in every trial
};

// Trial t uses seed mix(seed, t) for both r and H, so the measured rate
// averages over the choice of H.
AgreeReport run_agreement(std::size_t k, double rho, double eps, std::uint64_t trials,
                          std::uint64_t seed, std::size_t jobs = 1);

harness::Proportion run_first_k(std::size_t k, double rho, std::uint64_t trials,
                                std::uint64_t seed, std::size_t jobs = 1);

struct TradeoffRow {
  std::size_t k = 0;
  double rho = 0.0;
  double eps = 0.0;
  std::size_t ell = 0;
  double rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
};

// One row per eps; empty when trials == 0. Throws std::invalid_argument on an empty grid.
std::vector<TradeoffRow> sweep_tradeoff(std::size_t k, double rho, const std::vector<double>& eps_grid,
                                        std::uint64_t trials, std::uint64_t seed,
                                        std::size_t jobs = 1);

}  // namespace isr::agree
