#pragma once

// Slow, independent reference computations used only by the tests.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "isr/agree.hpp"
#include "isr/bitvec.hpp"
#include "isr/mathcore.hpp"
#include "isr/randsource.hpp"
#include "isr/strategies.hpp"

namespace oracle {

inline double entropy(double x) {
  double h = 0.0;
  if (x > 0.0) h -= x * std::log2(x);
  if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
  return h;
}

inline double prob_of(std::uint32_t x, int n, double p) {
  double w = 1.0;
  for (int i = 0; i < n; ++i) w *= ((x >> i) & 1u) ? p : 1.0 - p;
  return w;
}

// E_x E_{b ~ Bern(p)} [ (h(x) - h(x with coordinate i set to b))^2 ] / 2, which
// is E_{x^(-i)} Var_{x_i} h(x). Coordinates are 1-based.
inline double influence_by_resampling(const isr::math::BooleanFn& f, int i) {
  const int n = f.n();
  const double p = f.p();
  const std::uint32_t bit = 1u << (i - 1);
  double total = 0.0;
  for (std::uint32_t x = 0; x < (1u << n); ++x) {
    for (int b = 0; b < 2; ++b) {
      const std::uint32_t x2 = b ? (x | bit) : (x & ~bit);
      const double d = f(x) - f(x2);
      total += prob_of(x, n, p) * (b ? p : 1.0 - p) * 0.5 * d * d;
    }
  }
  return total;
}

// f^_S = E[f chi_S] by direct summation, O(4^n).
inline std::vector<double> fourier_by_projection(const isr::math::BooleanFn& f) {
  const int n = f.n();
  const double p = f.p();
  const double sigma = std::sqrt(p * (1.0 - p));
  std::vector<double> c(1u << n, 0.0);
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    for (std::uint32_t x = 0; x < (1u << n); ++x) {
      double chi = 1.0;
      for (int i = 0; i < n; ++i) {
        if ((s >> i) & 1u) chi *= ((((x >> i) & 1u) ? 1.0 : 0.0) - p) / sigma;
      }
      c[s] += prob_of(x, n, p) * f(x) * chi;
    }
  }
  return c;
}

inline double truncated_influence(const std::vector<double>& coeffs, int i, int d) {
  double total = 0.0;
  for (std::uint32_t s = 0; s < coeffs.size(); ++s) {
    if (((s >> (i - 1)) & 1u) && std::popcount(s) <= d) total += coeffs[s] * coeffs[s];
  }
  return total;
}

// (T f)(x) = sum_y P[y | x] f(y) with independent per-coordinate resampling.
inline double noise_by_enumeration(const isr::math::BooleanFn& f, double eta, std::uint32_t x) {
  const int n = f.n();
  const double p = f.p();
  double total = 0.0;
  for (std::uint32_t y = 0; y < (1u << n); ++y) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      const bool xi = (x >> i) & 1u;
      const bool yi = (y >> i) & 1u;
      w *= (xi == yi ? 1.0 - eta : 0.0) + eta * (yi ? p : 1.0 - p);
    }
    total += w * f(y);
  }
  return total;
}

// Row-by-row dot products over GF(2).
inline std::uint64_t syndrome_by_rows(const isr::agree::ParityMatrix& h, const isr::BitVec& r) {
  std::uint64_t y = 0;
  for (std::size_t i = 0; i < h.ell; ++i) {
    unsigned acc = 0;
    for (std::size_t j = 0; j < h.k; ++j) acc ^= ((h.rows[i] >> j) & 1u) & (r[j] ? 1u : 0u);
    y |= std::uint64_t{acc} << i;
  }
  return y;
}

// Every k-bit string within radius of r_prime whose syndrome is y, ascending.
inline std::vector<std::uint64_t> ball_solutions(const isr::agree::ParityMatrix& h,
                                                 const isr::BitVec& r_prime, std::uint64_t y,
                                                 std::size_t radius) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << h.k); ++v) {
    const isr::BitVec cand = isr::BitVec::from_word(v, h.k);
    if (isr::hamming(cand, r_prime) <= radius && syndrome_by_rows(h, cand) == y) out.push_back(v);
  }
  return out;
}

// Expected verdict by recursive descent through both trees.
inline double expected_verdict(const isr::strategies::StrategyTree& a,
                               const isr::strategies::StrategyTree& b) {
  std::function<double(int, std::uint64_t)> walk = [&](int j, std::uint64_t prefix) -> double {
    if (j == a.k) return (prefix & 1u) ? 1.0 : 0.0;
    const auto& owner = j % 2 == 0 ? a : b;
    const double f = owner.tables[static_cast<std::size_t>(j)][prefix];
    double v = 0.0;
    if (f > 0.0) v += f * walk(j + 1, 2 * prefix + 1);
    if (f < 1.0) v += (1.0 - f) * walk(j + 1, 2 * prefix);
    return v;
  };
  return walk(0, 0);
}

// Probability of each full transcript when the two trees interact.
inline std::vector<double> transcript_probabilities(const isr::strategies::StrategyTree& a,
                                                    const isr::strategies::StrategyTree& b) {
  std::vector<double> out(std::size_t{1} << a.k, 0.0);
  for (std::uint64_t l = 0; l < out.size(); ++l) {
    double prob = 1.0;
    for (int j = 0; j < a.k; ++j) {
      const auto& owner = j % 2 == 0 ? a : b;
      const std::uint64_t prefix = l >> (a.k - j);
      const double f = owner.tables[static_cast<std::size_t>(j)][prefix];
      prob *= ((l >> (a.k - 1 - j)) & 1u) ? f : 1.0 - f;
    }
    out[l] = prob;
  }
  return out;
}

// p(prefix) as an explicit sum over completions: each completion contributes
// its entry, halved once for every round below the prefix the party does not own.
inline double ptranscript_expanded(const isr::strategies::StrategyVector& x, std::uint64_t prefix,
                                   int length) {
  const int rest = x.k - length;
  double weight = 1.0;
  for (int j = length; j < x.k; ++j) {
    if (!isr::strategies::owns_round(x.party, j)) weight *= 0.5;
  }
  double total = 0.0;
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << rest); ++c) total += x.raw[(prefix << rest) | c];
  return total * weight;
}

// Deterministic random tree from a seed.
inline isr::strategies::StrategyTree random_tree(isr::rand::Party party, int k, std::uint64_t seed,
                                                 bool deterministic = false) {
  auto tree = isr::strategies::StrategyTree::uniform(party, k);
  isr::rand::PublicStream coins(seed);
  std::uint64_t i = 0;
  for (auto& table : tree.tables) {
    for (double& f : table) {
      const double u = coins.unit(i++);
      f = deterministic ? (u < 0.5 ? 0.0 : 1.0) : u;
    }
  }
  return tree;
}

// P[Bin(n, p) >= k] by direct summation of binomial terms.
inline double binomial_tail(int n, double p, int k) {
  double total = 0.0;
  for (int i = k; i <= n; ++i) {
    double c = 1.0;
    for (int j = 0; j < i; ++j) c = c * (n - j) / (j + 1);
    total += c * std::pow(p, i) * std::pow(1.0 - p, n - i);
  }
  return total;
}

}  // namespace oracle
