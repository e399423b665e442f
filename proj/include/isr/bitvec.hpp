#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace isr {

// Packed bit vector. Bit i lives in word i/64 at position i%64; bits past
// size() are always zero so popcounts over whole words are exact.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

  // Parses a string of '0'/'1' characters. Throws std::invalid_argument.
  static BitVec from_string(std::string_view s);
  static BitVec from_word(std::uint64_t w, std::size_t n);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  bool operator[](std::size_t i) const { return get(i); }
  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  // Clears the padding bits of the last word after raw word writes.
  void trim();

  std::size_t count() const;
  // First k bits packed into one word. Requires size() <= 64.
  std::uint64_t to_word() const;
  std::string to_string() const;
  // Indices of set bits, ascending.
  std::vector<std::uint32_t> support() const;

  BitVec& operator^=(const BitVec& o);
  friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
  friend bool operator==(const BitVec&, const BitVec&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Number of coordinates in which u and v differ. Throws on length mismatch.
std::size_t hamming(const BitVec& u, const BitVec& v);

// <u, v> over the integers for 0/1 vectors.
std::size_t inner_product(const BitVec& u, const BitVec& v);

}  // namespace isr
