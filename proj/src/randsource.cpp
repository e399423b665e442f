#include "isr/randsource.hpp"

#include <bit>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isr::rand {

namespace {

// Channels separate the independent draws made at one address.
constexpr std::uint64_t kSharedChannel = 0x5348;   // "SH"
constexpr std::uint64_t kFlipChannel = 0x464c;     // "FL"
constexpr std::uint64_t kPrivateBChannel = 0x5042; // "PB"
constexpr std::uint64_t kPublicChannel = 0x5055;   // "PU"

}  // namespace

std::uint64_t hash_address(std::uint64_t seed, const Address& a, std::uint64_t channel) {
  std::uint64_t h = mix(seed, static_cast<std::uint64_t>(a.kind));
  h = mix(h, a.stream);
  h = mix(h, a.index);
  h = mix(h, a.sub);
  return mix(h, channel);
}

double standard_normal(std::uint64_t key) {
  // 1 - u1 lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - to_unit(sequence_word(key, 0));
  const double u2 = to_unit(sequence_word(key, 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CorrelatedSource::CorrelatedSource(std::uint64_t master_seed, double rho, Party party)
    : seed_(master_seed), rho_(rho), party_(party) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  const double mu = (1.0 - rho) / 2.0;
  flip_threshold_ = static_cast<std::uint32_t>(std::llround(mu * 4294967296.0));
}

std::uint64_t CorrelatedSource::shared_block(const Address& a) const {
  return fmix64(hash_address(seed_, a, kSharedChannel));
}

// Bit-sliced Bernoulli: lane j of the result is 1 with probability
// flip_threshold_ / 2^32. Walk the threshold's binary digits from least to
// most significant, OR-ing in a random word on a 1 digit and AND-ing on a 0.
std::uint64_t CorrelatedSource::flip_block(const Address& a) const {
  if (flip_threshold_ == 0) return 0;
  const std::uint64_t base = hash_address(seed_, a, kFlipChannel);
  const int lowest = std::countr_zero(flip_threshold_);
  std::uint64_t m = 0;
  for (int bit = lowest; bit < 32; ++bit) {
    const std::uint64_t r = sequence_word(base, static_cast<std::uint64_t>(bit));
    if ((flip_threshold_ >> bit) & 1u) {
      m |= r;
    } else {
      m &= r;
    }
  }
  return m;
}

std::uint64_t CorrelatedSource::bit_block(const Address& a) const {
  const std::uint64_t u = shared_block(a);
  return party_ == Party::A ? u : u ^ flip_block(a);
}

double CorrelatedSource::gaussian(const Address& a) const {
  const double g = standard_normal(hash_address(seed_, a, kSharedChannel));
  if (party_ == Party::A || rho_ == 1.0) return g;
  return rho_ * g + std::sqrt(1.0 - rho_ * rho_) * private_gaussian(a);
}

double CorrelatedSource::private_gaussian(const Address& a) const {
  return standard_normal(hash_address(seed_, a, kPrivateBChannel));
}

PublicStream CorrelatedSource::public_stream(const Address& a) const {
  return PublicStream(hash_address(seed_, a, kPublicChannel));
}

namespace {

// Packed bits [offset, offset + count) of a block-addressed stream.
template <typename BlockFn>
BitVec gather_bits(std::uint64_t offset, std::size_t count, BlockFn&& block) {
  BitVec out(count);
  auto words = out.words();
  const std::uint64_t shift = offset & 63;
  std::uint64_t block_index = offset >> 6;
  if (shift == 0) {
    for (std::size_t w = 0; w < words.size(); ++w) words[w] = block(block_index + w);
  } else {
    std::uint64_t lo = block(block_index);
    for (std::size_t w = 0; w < words.size(); ++w) {
      const std::uint64_t hi = block(block_index + w + 1);
      words[w] = (lo >> shift) | (hi << (64 - shift));
      lo = hi;
    }
  }
  out.trim();
  return out;
}

}  // namespace

BitVec corr_bitvec(const CorrelatedSource& src, std::uint64_t offset, std::size_t count,
                   std::uint64_t stream) {
  return gather_bits(offset, count, [&](std::uint64_t b) {
    return src.bit_block(Address{StreamKind::Bits, stream, b, 0});
  });
}

std::vector<int> corr_bits(const CorrelatedSource& src, std::uint64_t offset, std::size_t count,
                           std::uint64_t stream) {
  const BitVec bits = corr_bitvec(src, offset, count, stream);
  std::vector<int> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = bits[i] ? -1 : 1;
  return out;
}

double corr_gaussian_exact(const CorrelatedSource& src, std::uint64_t stream, std::uint64_t index) {
  return src.gaussian(Address{StreamKind::Gaussian, stream, index, 0});
}

std::vector<double> corr_gaussians_exact(const CorrelatedSource& src, std::uint64_t offset,
                                         std::size_t count, std::uint64_t stream) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = corr_gaussian_exact(src, stream, offset + i);
  return out;
}

double corr_gaussian_from_bits(const CorrelatedSource& src, std::uint64_t stream,
                               std::uint64_t index, std::size_t summands) {
  if (summands == 0) throw std::invalid_argument("corr_gaussian_from_bits: summands must be >= 1");
  std::size_t ones = 0;
  const std::size_t blocks = (summands + 63) / 64;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::uint64_t w = src.bit_block(Address{StreamKind::GaussianFromBits, stream, index, b});
    const std::size_t used = std::min<std::size_t>(64, summands - b * 64);
    if (used < 64) w &= (std::uint64_t{1} << used) - 1;
    ones += static_cast<std::size_t>(std::popcount(w));
  }
  // Each 0 bit contributes +1 and each 1 bit contributes -1.
  const double sum = static_cast<double>(summands) - 2.0 * static_cast<double>(ones);
  return sum / std::sqrt(static_cast<double>(summands));
}

std::vector<double> corr_gaussians_from_bits(const CorrelatedSource& src, std::uint64_t offset,
                                             std::size_t count, std::size_t summands,
                                             std::uint64_t stream) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = corr_gaussian_from_bits(src, stream, offset + i, summands);
  }
  return out;
}

BitVec dictionary_word(const CorrelatedSource& src, std::uint64_t message, std::size_t length) {
  if (length == 0) throw std::invalid_argument("dictionary_word: length must be >= 1");
  return gather_bits(0, length, [&](std::uint64_t b) {
    return src.bit_block(Address{StreamKind::Dictionary, message, length, b});
  });
}

std::size_t dictionary_distance(const CorrelatedSource& src, std::uint64_t message,
                                const BitVec& word, std::size_t cutoff) {
  const auto words = word.words();
  const std::size_t length = word.size();
  std::size_t dist = 0;
  for (std::size_t b = 0; b < words.size(); ++b) {
    std::uint64_t w = src.bit_block(Address{StreamKind::Dictionary, message, length, b});
    if (b + 1 == words.size() && length % 64 != 0) w &= (std::uint64_t{1} << (length % 64)) - 1;
    dist += static_cast<std::size_t>(std::popcount(w ^ words[b]));
    if (dist > cutoff) return dist;
  }
  return dist;
}

std::uint64_t shared_index(const CorrelatedSource& src, std::uint64_t stream,
                           std::uint64_t position, std::uint64_t n) {
  if (src.rho() != 1.0) {
    throw std::logic_error("shared_indices requires perfectly shared randomness (rho = 1)");
  }
  return to_range(src.shared_block(Address{StreamKind::Indices, stream, position, 0}), n);
}

std::vector<std::uint64_t> shared_indices(const CorrelatedSource& src, std::size_t t,
                                          std::uint64_t n, std::uint64_t stream) {
  if (src.rho() != 1.0) {
    throw std::logic_error("shared_indices requires perfectly shared randomness (rho = 1)");
  }
  if (n == 0 && t > 0) throw std::invalid_argument("shared_indices: empty range");
  std::vector<std::uint64_t> out(t);
  for (std::size_t i = 0; i < t; ++i) out[i] = shared_index(src, stream, i, n);
  return out;
}

std::uint64_t parse_seed(const std::string& text) {
  if (text.empty() || text[0] == '-' || text[0] == '+') {
    throw std::invalid_argument("seed must be a non-negative decimal or 0x-hex integer");
  }
  const bool hex = text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
  const std::string digits = hex ? text.substr(2) : text;
  for (char ch : digits) {
    const bool ok = hex ? std::isxdigit(static_cast<unsigned char>(ch)) != 0
                        : std::isdigit(static_cast<unsigned char>(ch)) != 0;
    if (!ok) throw std::invalid_argument("invalid seed: " + text);
  }
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    value = std::stoull(hex ? text.substr(2) : text, &used, hex ? 16 : 10);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid seed: " + text);
  }
  if (used != text.size() - (hex ? 2 : 0)) throw std::invalid_argument("invalid seed: " + text);
  return value;
}

}  // namespace isr::rand
