#include "isr/agree.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "isr/errors.hpp"
#include "isr/mathcore.hpp"
#include "isr/parallel.hpp"

namespace isr::agree {

namespace {

constexpr std::uint64_t kMatrixTag = 0x4d41545249580000ULL;

std::uint64_t low_mask(std::size_t bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

void check_params(std::size_t k, double eps, double mu) {
  if (k < 1 || k > kMaxK) throw InfeasibleParameters("agreement needs 1 <= k <= 64");
  if (!(eps >= 0.0) || !(mu >= 0.0)) throw InfeasibleParameters("eps and mu must be non-negative");
  if (!(mu + eps < 0.5)) throw InfeasibleParameters("agreement needs mu + eps < 1/2");
}

// Calls visit(pattern) for every k-bit word of weight w whose syndrome
// (xor of the chosen columns) equals target. Returns false once visit does.
template <typename Visit>
bool enumerate_weight(const std::vector<std::uint64_t>& columns, std::size_t w, std::size_t start,
                      std::uint64_t pattern, std::uint64_t acc, std::uint64_t target, Visit& visit) {
  if (w == 0) return acc == target ? visit(pattern) : true;
  for (std::size_t j = start; j + w <= columns.size(); ++j) {
    if (!enumerate_weight(columns, w - 1, j + 1, pattern | (std::uint64_t{1} << j),
                          acc ^ columns[j], target, visit)) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::uint64_t ParityMatrix::syndrome(std::uint64_t v) const {
  std::uint64_t y = 0;
  for (std::size_t i = 0; i < ell; ++i) {
    y |= static_cast<std::uint64_t>(std::popcount(rows[i] & v) & 1) << i;
  }
  return y;
}

std::uint64_t ParityMatrix::syndrome(const BitVec& v) const {
  if (v.size() != k) throw std::invalid_argument("syndrome: vector length differs from k");
  return syndrome(v.to_word());
}

std::size_t syndrome_rows(std::size_t k, double eps, double mu) {
  check_params(k, eps, mu);
  const double h = math::binary_entropy(mu + eps) * static_cast<double>(k);
  // Absorb rounding so an exactly integral product is not bumped up.
  const auto ell = static_cast<std::size_t>(std::max(0.0, std::ceil(h - 1e-9)));
  return std::min(ell, k);
}

std::size_t decode_radius(std::size_t k, double eps, double mu) {
  check_params(k, eps, mu);
  return static_cast<std::size_t>(std::floor((mu + eps) * static_cast<double>(k) + 1e-12));
}

ParityMatrix gen_matrix(std::uint64_t seed, std::size_t k, double eps, double mu) {
  ParityMatrix h;
  h.k = k;
  h.ell = syndrome_rows(k, eps, mu);
  h.degenerate = h.ell >= k;
  const rand::PublicStream stream(rand::mix(seed, kMatrixTag));
  h.rows.resize(h.ell);
  for (std::size_t i = 0; i < h.ell; ++i) h.rows[i] = stream(i) & low_mask(k);
  return h;
}

AliceMessage alice_step(const BitVec& r, const ParityMatrix& h) {
  return AliceMessage{r, h.syndrome(r)};
}

std::vector<BitVec> bounded_distance_candidates(const BitVec& r_prime, std::uint64_t y,
                                                const ParityMatrix& h, std::size_t radius,
                                                std::size_t limit) {
  if (r_prime.size() != h.k) throw std::invalid_argument("decode: vector length differs from k");
  std::vector<std::uint64_t> columns(h.k, 0);
  for (std::size_t i = 0; i < h.ell; ++i) {
    for (std::size_t j = 0; j < h.k; ++j) {
      if ((h.rows[i] >> j) & 1u) columns[j] |= std::uint64_t{1} << i;
    }
  }
  const std::uint64_t base = r_prime.to_word();
  const std::uint64_t target = y ^ h.syndrome(base);
  std::vector<BitVec> out;
  auto visit = [&](std::uint64_t e) {
    out.push_back(BitVec::from_word(base ^ e, h.k));
    return out.size() < limit;
  };
  for (std::size_t w = 0; w <= std::min(radius, h.k); ++w) {
    if (!enumerate_weight(columns, w, 0, 0, 0, target, visit)) break;
  }
  return out;
}

BitVec bob_decode(const BitVec& r_prime, std::uint64_t y, const ParityMatrix& h,
                  std::size_t radius) {
  auto found = bounded_distance_candidates(r_prime, y, h, radius, 2);
  return found.size() == 1 ? found.front() : r_prime;
}

AgreeOutcome run_protocol(const rand::CorrelatedSource& alice, const ParityMatrix& h,
                          std::size_t radius) {
  const BitVec r = rand::corr_bitvec(alice, 0, h.k);
  const BitVec r_prime = rand::corr_bitvec(alice.view(rand::Party::B), 0, h.k);
  const AliceMessage msg = alice_step(r, h);
  AgreeOutcome out;
  out.wA = msg.wA;
  out.wB = bob_decode(r_prime, msg.syndrome, h, radius);
  out.sent_bits = h.ell;
  out.agreed = out.wA == out.wB;
  return out;
}

AgreeOutcome first_k_baseline(const rand::CorrelatedSource& alice, std::size_t k) {
  AgreeOutcome out;
  out.wA = rand::corr_bitvec(alice, 0, k);
  out.wB = rand::corr_bitvec(alice.view(rand::Party::B), 0, k);
  out.agreed = out.wA == out.wB;
  return out;
}

AgreeReport run_agreement(std::size_t k, double rho, double eps, std::uint64_t trials,
                          std::uint64_t seed, std::size_t jobs) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw InfeasibleParameters("rho must lie in [0, 1]");
  const double mu = (1.0 - rho) / 2.0;
  AgreeReport report;
  report.k = k;
  report.rho = rho;
  report.eps = eps;
  report.ell = syndrome_rows(k, eps, mu);
  report.radius = decode_radius(k, eps, mu);
  report.degenerate = report.ell >= k;
  report.agreed.trials = trials;

  struct Trial {
    bool agreed = false;
    bool raw = true;
  };
  const auto results = harness::parallel_map(trials, jobs, [&](std::size_t t) {
    const std::uint64_t trial_seed = rand::mix(seed, t);
    const rand::CorrelatedSource alice(trial_seed, rho, rand::Party::A);
    const ParityMatrix h = gen_matrix(trial_seed, k, eps, mu);
    const AgreeOutcome o = run_protocol(alice, h, report.radius);
    return Trial{o.agreed, o.wA == rand::corr_bitvec(alice, 0, k)};
  });
  for (const auto& r : results) {
    if (r.agreed) ++report.agreed.successes;
    if (!r.raw) report.wA_always_raw = false;
  }
  return report;
}

harness::Proportion run_first_k(std::size_t k, double rho, std::uint64_t trials,
                                std::uint64_t seed, std::size_t jobs) {
  const auto results = harness::parallel_map(trials, jobs, [&](std::size_t t) {
    const rand::CorrelatedSource alice(rand::mix(seed, t), rho, rand::Party::A);
    return first_k_baseline(alice, k).agreed ? 1 : 0;
  });
  harness::Proportion p;
  p.trials = trials;
  for (int r : results) p.successes += static_cast<std::uint64_t>(r);
  return p;
}

std::vector<TradeoffRow> sweep_tradeoff(std::size_t k, double rho, const std::vector<double>& eps_grid,
                                        std::uint64_t trials, std::uint64_t seed,
                                        std::size_t jobs) {
  if (eps_grid.empty()) throw std::invalid_argument("sweep_tradeoff: empty eps grid");
  std::vector<TradeoffRow> rows;
  if (trials == 0) return rows;
  for (std::size_t g = 0; g < eps_grid.size(); ++g) {
    const AgreeReport r = run_agreement(k, rho, eps_grid[g], trials, rand::mix(seed, g), jobs);
    const auto ci = r.agreed.wilson();
    rows.push_back({k, rho, eps_grid[g], r.ell, r.agreed.rate(), ci.lo, ci.hi});
  }
  return rows;
}

}  // namespace isr::agree
