#include "isr/bitvec.hpp"

#include <stdexcept>

namespace isr {

BitVec BitVec::from_string(std::string_view s) {
  BitVec v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      v.set(i, true);
    } else if (s[i] != '0') {
      throw std::invalid_argument("bit string may only contain '0' and '1'");
    }
  }
  return v;
}

BitVec BitVec::from_word(std::uint64_t w, std::size_t n) {
  if (n > 64) throw std::invalid_argument("from_word: n > 64");
  BitVec v(n);
  if (n > 0) {
    v.words_[0] = w;
    v.trim();
  }
  return v;
}

void BitVec::trim() {
  if (size_ % 64 != 0 && !words_.empty()) {
    words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }
}

std::size_t BitVec::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::uint64_t BitVec::to_word() const {
  if (size_ > 64) throw std::invalid_argument("to_word: more than 64 bits");
  return words_.empty() ? 0 : words_[0];
}

std::string BitVec::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

std::vector<std::uint32_t> BitVec::support() const {
  std::vector<std::uint32_t> out;
  out.reserve(count());
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      const int b = std::countr_zero(bits);
      out.push_back(static_cast<std::uint32_t>(w * 64 + b));
      bits &= bits - 1;
    }
  }
  return out;
}

BitVec& BitVec::operator^=(const BitVec& o) {
  if (o.size_ != size_) throw std::invalid_argument("BitVec xor: length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  return *this;
}

std::size_t hamming(const BitVec& u, const BitVec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("hamming: length mismatch");
  std::size_t d = 0;
  auto a = u.words();
  auto b = v.words();
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
  }
  return d;
}

std::size_t inner_product(const BitVec& u, const BitVec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("inner_product: length mismatch");
  std::size_t d = 0;
  auto a = u.words();
  auto b = v.words();
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  }
  return d;
}

}  // namespace isr
