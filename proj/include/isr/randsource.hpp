#pragma once

// Counter-based, seed-addressed source of rho-correlated randomness.
//
// Every draw is a pure function of (master seed, address, channel). There is
// no sequential generator state, so the infinite dictionary of words is
// realised lazily, and a trial's randomness does not depend on how many
// other trials ran before it or on which thread.
//
// Generator: the SplitMix64 finaliser
//   fmix64(z) = z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//               z ^= z >> 27; z *= 0x94d049bb133111eb; z ^= z >> 31
// is chained over the address fields via mix(h, v) = fmix64(h ^ fmix64(v + phi)),
// phi = 0x9e3779b97f4a7c15. Consecutive words within one address are
// fmix64(base + (i + 1) * phi), i.e. a SplitMix64 sequence keyed by the address.
//
// Joint law of a correlated bit pair: a shared uniform bit u (bit 0 <-> +1,
// bit 1 <-> -1); party A sees u, party B sees u xor e with e ~ Bern((1-rho)/2)
// drawn from a B-side channel of the same address, so E[ab] = rho. Bits are
// produced in 64-bit blocks; the flip probability is quantised to 2^-32.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "isr/bitvec.hpp"

namespace isr::rand {

enum class Party : std::uint8_t { A, B };

inline Party other(Party p) { return p == Party::A ? Party::B : Party::A; }

enum class StreamKind : std::uint64_t {
  Bits = 1,
  Gaussian = 2,
  GaussianFromBits = 3,
  Dictionary = 4,
  Indices = 5,
  Public = 6,
  Aggregate = 7,
};

struct Address {
  StreamKind kind = StreamKind::Public;
  std::uint64_t stream = 0;
  std::uint64_t index = 0;
  std::uint64_t sub = 0;
};

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t fmix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Derived seed for sub-experiment / trial `index`.
constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  return fmix64(seed ^ fmix64(index + kGolden));
}

std::uint64_t hash_address(std::uint64_t seed, const Address& a, std::uint64_t channel);

// i-th word of the SplitMix64 sequence keyed by `base`.
constexpr std::uint64_t sequence_word(std::uint64_t base, std::uint64_t i) {
  return fmix64(base + (i + 1) * kGolden);
}

// Uniform in [0, 1) with 53 bits.
inline double to_unit(std::uint64_t w) { return static_cast<double>(w >> 11) * 0x1.0p-53; }

// Uniform integer in [0, n) by multiply-shift (bias below n / 2^64).
inline std::uint64_t to_range(std::uint64_t w, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(w) * n) >> 64);
}

// Standard normal from the two first words keyed by `key` (Box-Muller).
double standard_normal(std::uint64_t key);

// Words that both parties see identically regardless of rho.
class PublicStream {
 public:
  explicit PublicStream(std::uint64_t base) : base_(base) {}
  std::uint64_t operator()(std::uint64_t i) const { return sequence_word(base_, i); }
  double unit(std::uint64_t i) const { return to_unit((*this)(i)); }

 private:
  std::uint64_t base_;
};

class CorrelatedSource {
 public:
  // Throws std::invalid_argument unless rho in [0, 1].
  CorrelatedSource(std::uint64_t master_seed, double rho, Party party);

  std::uint64_t seed() const { return seed_; }
  double rho() const { return rho_; }
  Party party() const { return party_; }

  CorrelatedSource view(Party p) const { return CorrelatedSource(seed_, rho_, p); }
  // Source for trial / repetition `index`: seed mix(seed, index).
  CorrelatedSource derive(std::uint64_t index) const {
    return CorrelatedSource(mix(seed_, index), rho_, party_);
  }

  // 64 correlated bits at a block address, as seen by this party.
  std::uint64_t bit_block(const Address& a) const;
  std::uint64_t shared_block(const Address& a) const;
  std::uint64_t flip_block(const Address& a) const;

  // rho-correlated standard normal at an address, as seen by this party.
  double gaussian(const Address& a) const;
  // Independent normal that only party B's construction uses.
  double private_gaussian(const Address& a) const;

  PublicStream public_stream(const Address& a) const;

 private:
  std::uint64_t seed_;
  double rho_;
  Party party_;
  std::uint32_t flip_threshold_;  // round(2^32 * (1 - rho) / 2)
};

// Positions [offset, offset + count) of the correlated bit stream `stream`,
// as +1/-1 values.
std::vector<int> corr_bits(const CorrelatedSource& src, std::uint64_t offset, std::size_t count,
                           std::uint64_t stream = 0);
// Same positions in packed form (bit 1 <-> -1).
BitVec corr_bitvec(const CorrelatedSource& src, std::uint64_t offset, std::size_t count,
                   std::uint64_t stream = 0);

// Party A: g; party B: rho g + sqrt(1 - rho^2) g''.
std::vector<double> corr_gaussians_exact(const CorrelatedSource& src, std::uint64_t offset,
                                         std::size_t count, std::uint64_t stream = 0);
double corr_gaussian_exact(const CorrelatedSource& src, std::uint64_t stream, std::uint64_t index);

// Each output is sum_{i<summands} r_i / sqrt(summands) over correlated +-1 bits.
std::vector<double> corr_gaussians_from_bits(const CorrelatedSource& src, std::uint64_t offset,
                                             std::size_t count, std::size_t summands,
                                             std::uint64_t stream = 0);
double corr_gaussian_from_bits(const CorrelatedSource& src, std::uint64_t stream,
                               std::uint64_t index, std::size_t summands);

// Word w_{i,j} of the noisy dictionary (party A) or w'_{i,j} (party B).
BitVec dictionary_word(const CorrelatedSource& src, std::uint64_t message, std::size_t length);
// Hamming distance between this party's w_{i,j} and `word` (length j), stopping
// early once it exceeds `cutoff`; the returned value is then > cutoff but not exact.
std::size_t dictionary_distance(const CorrelatedSource& src, std::uint64_t message,
                                const BitVec& word, std::size_t cutoff);

// t i.i.d. uniform indices in [0, n), identical for both parties.
// Throws std::logic_error unless rho == 1 (perfectly shared randomness).
std::vector<std::uint64_t> shared_indices(const CorrelatedSource& src, std::size_t t,
                                          std::uint64_t n, std::uint64_t stream = 0);
std::uint64_t shared_index(const CorrelatedSource& src, std::uint64_t stream,
                           std::uint64_t position, std::uint64_t n);

// Accepts decimal or 0x-prefixed hexadecimal. Throws std::invalid_argument.
std::uint64_t parse_seed(const std::string& text);

}  // namespace isr::rand
