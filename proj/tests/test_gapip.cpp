#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "isr/errors.hpp"
#include "isr/gapip.hpp"
#include "oracles.hpp"

using namespace isr::gapip;
using isr::BitVec;
using isr::rand::CorrelatedSource;
using isr::rand::Party;

namespace {

BitVec ones(std::size_t n) {
  BitVec v(n);
  for (std::size_t i = 0; i < n; ++i) v.set(i, true);
  return v;
}

BitVec with_weight(std::size_t n, std::size_t w) {
  BitVec v(n);
  for (std::size_t i = 0; i < w; ++i) v.set(i, true);
  return v;
}

GaussianParams small_params(double q, Engine engine) {
  GaussianParams p;
  p.c = default_c(q);
  p.s = default_s(q);
  p.t = 64;
  p.engine = engine;
  return p;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments statistic_moments(const GaussianParams& params, double q, std::size_t n, double rho,
                          int trials, std::uint64_t seed) {
  std::vector<double> v;
  for (int t = 0; t < trials; ++t) {
    const auto [x, y] = sample_pair_dist(yes_dist(q), n, isr::rand::mix(seed, t));
    const CorrelatedSource a(isr::rand::mix(seed + 1, t), rho, Party::A);
    v.push_back(gaussian_isr_protocol(x, y, a, a.view(Party::B), params).statistic);
  }
  Moments m;
  for (double s : v) m.mean += s;
  m.mean /= v.size();
  for (double s : v) m.var += (s - m.mean) * (s - m.mean);
  m.var /= (v.size() - 1);
  return m;
}

}  // namespace

TEST(Classify, Examples) {
  const auto all = classify(ones(64), ones(64), 1.0, 1.0, 0.5);
  EXPECT_EQ(all.label, Label::Yes);
  EXPECT_EQ(all.inner, 64u);
  const auto zero = classify(BitVec(64), ones(64), 16.0, 0.9 / 16, 0.6 / 16);
  EXPECT_EQ(zero.label, Label::No);
  EXPECT_TRUE(zero.sparse_ok);
  EXPECT_FALSE(classify(ones(64), ones(64), 2.0, 0.9, 0.5).sparse_ok);
  EXPECT_THROW(classify(BitVec(3), BitVec(4), 1.0, 0.5, 0.2), std::invalid_argument);
}

TEST(Classify, ExactThresholds) {
  // n = 100, c n = 30, s n = 20.
  EXPECT_EQ(classify(with_weight(100, 30), ones(100), 1.0, 0.3, 0.2).label, Label::Yes);
  EXPECT_EQ(classify(with_weight(100, 29), ones(100), 1.0, 0.3, 0.2).label, Label::Neither);
  EXPECT_EQ(classify(with_weight(100, 20), ones(100), 1.0, 0.3, 0.2).label, Label::Neither);
  EXPECT_EQ(classify(with_weight(100, 19), ones(100), 1.0, 0.3, 0.2).label, Label::No);
  // |x|^2 <= n / q exactly at the boundary.
  EXPECT_TRUE(classify(with_weight(100, 25), BitVec(100), 4.0, 0.3, 0.2).sparse_ok);
  EXPECT_FALSE(classify(with_weight(100, 26), BitVec(100), 4.0, 0.3, 0.2).sparse_ok);
}

TEST(PairDistribution, YesCellsAtQ10) {
  const auto d = yes_dist(10);
  EXPECT_NEAR(d.prob(0, 1), 0.4025, 1e-15);
  EXPECT_NEAR(d.prob(0, 0), 0.4975, 1e-15);
  EXPECT_NEAR(d.prob(1, 1), 0.0975, 1e-15);
  EXPECT_NEAR(d.prob(1, 0), 0.0025, 1e-15);
}

TEST(PairDistribution, MomentIdentities) {
  for (double q : {4.0, 10.0, 16.0}) {
    for (const auto& d : {yes_dist(q), no_dist(q)}) {
      double sum = 0.0;
      for (double p : d.cells) {
        EXPECT_GE(p, 0.0);
        sum += p;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      EXPECT_NEAR(d.mean_x(), 1.0 / q, 1e-12);
      EXPECT_NEAR(d.mean_y(), 0.5, 1e-12);
    }
    EXPECT_NEAR(yes_dist(q).mean_xy(), 1.95 / (2 * q), 1e-12);
    EXPECT_NEAR(no_dist(q).mean_xy(), 1.0 / (2 * q), 1e-12);
  }
}

TEST(PairDistribution, InfeasibleQ) {
  EXPECT_THROW(yes_dist(1.9), isr::InfeasibleParameters);
  EXPECT_NO_THROW(yes_dist(1.95));
  EXPECT_THROW(no_dist(0.5), isr::InfeasibleParameters);
  EXPECT_THROW(general_dist(0.9, 0.9, -0.9), isr::InfeasibleParameters);
}

TEST(PairDistribution, GeneralMoments) {
  for (double p1 : {-0.2, 0.0, 0.3}) {
    for (double p2 : {-0.2, 0.0, 0.4}) {
      for (double theta : {-0.1, 0.0, 0.2}) {
        const auto d = general_dist(p1, p2, theta);
        // Bit 1 is +1, bit 0 is -1.
        const double ex = d.prob(1, 0) + d.prob(1, 1) - d.prob(0, 0) - d.prob(0, 1);
        const double ey = d.prob(0, 1) + d.prob(1, 1) - d.prob(0, 0) - d.prob(1, 0);
        const double exy = d.prob(0, 0) + d.prob(1, 1) - d.prob(0, 1) - d.prob(1, 0);
        EXPECT_NEAR(ex, p1, 1e-12);
        EXPECT_NEAR(ey, p2, 1e-12);
        EXPECT_NEAR(exy, theta, 1e-12);
      }
    }
  }
}

TEST(Sampler, NoDistributionProductMoment) {
  const double q = 10.0;
  const auto [x, y] = sample_pair_dist(no_dist(q), 1'000'000, 5);
  EXPECT_NEAR(static_cast<double>(isr::inner_product(x, y)) / 1e6, 1.0 / (2 * q), 0.003);
  EXPECT_NEAR(static_cast<double>(x.count()) / 1e6, 1.0 / q, 0.003);
  EXPECT_NEAR(static_cast<double>(y.count()) / 1e6, 0.5, 0.003);
}

TEST(Sampler, ZeroCorrelationIsIndependent) {
  // theta = p1 p2 on the +-1 scale is independence; chi-square on the 2x2 table.
  const double p1 = 0.2, p2 = -0.4;
  const auto d = general_dist(p1, p2, p1 * p2);
  const std::size_t n = 200'000;
  const auto [x, y] = sample_pair_dist(d, n, 9);
  double counts[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) counts[2 * x[i] + y[i]] += 1;
  const double px = (1 + p1) / 2, py = (1 + p2) / 2;
  double chi2 = 0.0;
  for (int cell = 0; cell < 4; ++cell) {
    const double e = n * ((cell & 2) ? px : 1 - px) * ((cell & 1) ? py : 1 - py);
    chi2 += (counts[cell] - e) * (counts[cell] - e) / e;
  }
  EXPECT_LT(chi2, 16.27);  // chi-square(3) at 0.999
  const auto d0 = general_dist(0.0, 0.0, 0.0);
  for (double p : d0.cells) EXPECT_NEAR(p, 0.25, 1e-15);
}

TEST(Sampler, DeterministicInSeed) {
  EXPECT_EQ(sample_pair_dist(yes_dist(4), 1000, 3), sample_pair_dist(yes_dist(4), 1000, 3));
  EXPECT_NE(sample_pair_dist(yes_dist(4), 1000, 3), sample_pair_dist(yes_dist(4), 1000, 4));
}

TEST(Sampler, YesInstancesClassifyAsYes) {
  const double q = 16.0;
  const std::size_t n = 1 << 16;
  int yes = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    auto [x, y] = sample_pair_dist(yes_dist(q), n, 100 + t);
    yes += classify(std::move(x), std::move(y), q, default_c(q), default_s(q)).label == Label::Yes;
  }
  EXPECT_GE(yes, 99);
}

TEST(YesPrime, ExtremesMatchPureDistributions) {
  const std::size_t n = 5000;
  EXPECT_EQ(sample_yes_prime(16, n, {}, 7), sample_pair_dist(yes_dist(16), n, 7));
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  EXPECT_EQ(sample_yes_prime(16, n, all, 7), sample_pair_dist(no_dist(16), n, 7));
  const std::vector<std::uint32_t> outside{static_cast<std::uint32_t>(n)};
  EXPECT_THROW(sample_yes_prime(16, n, outside, 7), std::invalid_argument);
}

TEST(YesPrime, FewBadCoordinatesKeepCorrelation) {
  const double q = 16.0;
  const std::size_t n = 1 << 16;
  std::vector<std::uint32_t> bad;
  for (std::uint32_t i = 0; i < n / 100; ++i) bad.push_back(i * 100);
  double total = 0.0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const auto [x, y] = sample_yes_prime(q, n, bad, 300 + t);
    total += static_cast<double>(isr::inner_product(x, y));
  }
  const double per_coord = total / (static_cast<double>(n) * trials);
  const double se = std::sqrt(per_coord * (1 - per_coord) / (static_cast<double>(n) * trials));
  EXPECT_GE(per_coord, 0.93 / q - 3 * se);
}

TEST(Buckets, HalfOpenIntervals) {
  // w = (c - s) n / 100 = 1 for n = 1000, c - s = 0.1.
  EXPECT_EQ(norm_bucket(0, 1000, 0.3, 0.2), 0u);
  EXPECT_EQ(norm_bucket(1, 1000, 0.3, 0.2), 1u);
  EXPECT_EQ(norm_bucket(2, 1000, 0.3, 0.2), 2u);
  EXPECT_EQ(norm_bucket(1000, 1000, 0.3, 0.2), 1000u);
  EXPECT_EQ(max_bucket(0.3, 0.2), 1000u);
  EXPECT_TRUE(bucket_large_enough(300, 0.3, 0.2));
  EXPECT_FALSE(bucket_large_enough(299, 0.3, 0.2));
  EXPECT_EQ(bits_for(1), 0u);
  EXPECT_EQ(bits_for(2), 1u);
  EXPECT_EQ(bits_for(1024), 10u);
  EXPECT_EQ(bits_for(1025), 11u);
}

TEST(GaussianProtocol, BitsPerShot) {
  GaussianParams p;
  p.c = default_c(4);
  p.s = default_s(4);
  p.t = 1024;
  EXPECT_EQ(max_bucket(p.c, p.s), 1334u);
  EXPECT_EQ(p.bits_per_shot(), 10u + 11u);
}

TEST(GaussianProtocol, Validation) {
  GaussianParams p = small_params(4, Engine::Explicit);
  p.t = 1;
  EXPECT_THROW(validate(p), isr::InfeasibleParameters);
  p = small_params(4, Engine::Explicit);
  p.s = p.c;
  EXPECT_THROW(validate(p), isr::InfeasibleParameters);
  const CorrelatedSource a(1, 1.0, Party::A);
  EXPECT_THROW(gaussian_isr_protocol(BitVec(4), BitVec(4), a, a, small_params(4, Engine::Explicit)),
               std::invalid_argument);
}

TEST(GaussianProtocol, EmptyXRejects) {
  const CorrelatedSource a(2, 0.9, Party::A);
  for (Engine e : {Engine::Explicit, Engine::Aggregate}) {
    for (ThresholdMode mode : {ThresholdMode::Literal, ThresholdMode::Calibrated}) {
      auto p = small_params(4, e);
      p.mode = mode;
      p.threshold = -1e300;
      const auto r = gaussian_isr_protocol(BitVec(4096), ones(4096), a, a.view(Party::B), p);
      EXPECT_FALSE(r.accept);
      EXPECT_EQ(r.m, 0u);
    }
  }
}

TEST(GaussianProtocol, RaisingThresholdNeverAccepts) {
  const double q = 4.0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto [x, y] = sample_pair_dist(seed % 2 ? yes_dist(q) : no_dist(q), 4096, seed);
    const CorrelatedSource a(seed, 0.9, Party::A);
    bool rejected = false;
    for (double th = -50; th <= 50; th += 2.5) {
      auto p = small_params(q, Engine::Aggregate);
      p.threshold = th;
      const bool acc = gaussian_isr_protocol(x, y, a, a.view(Party::B), p).accept;
      if (rejected) {
        EXPECT_FALSE(acc) << "seed " << seed << " threshold " << th;
      }
      rejected = rejected || !acc;
    }
    bool lit_rejected = false;
    for (double alpha = 0.0; alpha <= 3.0; alpha += 0.1) {
      auto p = small_params(q, Engine::Aggregate);
      p.mode = ThresholdMode::Literal;
      p.alpha = alpha;
      const bool acc = gaussian_isr_protocol(x, y, a, a.view(Party::B), p).accept;
      if (lit_rejected) {
        EXPECT_FALSE(acc);
      }
      lit_rejected = lit_rejected || !acc;
    }
  }
}

TEST(GaussianProtocol, PermutationReplayGivesIdenticalDecisions) {
  const double q = 4.0;
  const std::size_t n = 512;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [x, y] = sample_pair_dist(yes_dist(q), n, 40 + seed);
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    isr::rand::PublicStream coins(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[isr::rand::to_range(coins(i), i + 1)]);
    BitVec px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
      px.set(i, x[perm[i]]);
      py.set(i, y[perm[i]]);
    }
    const CorrelatedSource a(seed, 0.9, Party::A);
    auto p = small_params(q, Engine::Explicit);
    p.threshold = 0.0;
    const auto base = gaussian_isr_protocol(x, y, a, a.view(Party::B), p);
    const auto moved = gaussian_isr_protocol(px, py, a, a.view(Party::B), p, 0, perm);
    EXPECT_EQ(base.accept, moved.accept);
    EXPECT_EQ(base.ell, moved.ell);
    EXPECT_EQ(base.m, moved.m);
    EXPECT_NEAR(base.statistic, moved.statistic, 1e-9);
  }
}

TEST(GaussianProtocol, AggregateEngineMatchesExplicitInLaw) {
  const double q = 4.0;
  const std::size_t n = 1024;
  const int trials = 600;
  for (double rho : {1.0, 0.7}) {
    const auto e = statistic_moments(small_params(q, Engine::Explicit), q, n, rho, trials, 11);
    const auto g = statistic_moments(small_params(q, Engine::Aggregate), q, n, rho, trials, 12);
    const double se = std::sqrt(e.var / trials + g.var / trials);
    EXPECT_NEAR(e.mean, g.mean, 4 * se) << rho;
    EXPECT_NEAR(e.var / g.var, 1.0, 0.3) << rho;
  }
}

TEST(GaussianProtocol, CltEngineRuns) {
  const double q = 4.0;
  auto p = small_params(q, Engine::Explicit);
  p.summands = 64;
  const auto m = statistic_moments(p, q, 1024, 1.0, 200, 13);
  const auto exact = statistic_moments(small_params(q, Engine::Explicit), q, 1024, 1.0, 200, 13);
  EXPECT_GT(m.mean, 0.0);
  EXPECT_NEAR(m.mean, exact.mean, 4 * std::sqrt(m.var / 200 + exact.var / 200));
}

TEST(GaussianProtocol, CalibratedGapAtSmallScale) {
  const double q = 4.0;
  const std::size_t n = 4096;
  auto p = small_params(q, Engine::Aggregate);
  const auto cal = calibrate_threshold(p, q, n, 1.0, 300, 21);
  EXPECT_GT(cal.yes_mean, cal.no_mean);
  EXPECT_DOUBLE_EQ(cal.threshold, 0.5 * (cal.yes_mean + cal.no_mean));
  p.threshold = cal.threshold;
  const auto r = run_gaussian_experiment(p, q, n, 1.0, 500, 22);
  EXPECT_GT(r.yes_accept.rate(), r.no_accept.rate());
  ASSERT_EQ(r.rows.size(), 1000u);
  EXPECT_TRUE(r.rows.front().from_yes);
  EXPECT_FALSE(r.rows.back().from_yes);
  const auto r0 = run_gaussian_experiment(p, q, n, 1.0, 0, 22);
  EXPECT_TRUE(r0.rows.empty());
}

TEST(Amplified, SingleRepetitionIsSingleShot) {
  const double q = 4.0;
  auto p = small_params(q, Engine::Aggregate);
  p.threshold = 5.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto [x, y] = sample_pair_dist(yes_dist(q), 4096, seed);
    const CorrelatedSource a(seed, 0.9, Party::A);
    const auto one = gaussian_isr_amplified(x, y, a, a.view(Party::B), p, 1);
    const auto shot = gaussian_isr_protocol(x, y, a, a.view(Party::B), p, 0);
    EXPECT_EQ(one.accept, shot.accept);
    EXPECT_EQ(one.bits_sent, shot.bits_sent);
  }
  const CorrelatedSource a(1, 0.9, Party::A);
  EXPECT_THROW(gaussian_isr_amplified(BitVec(8), BitVec(8), a, a.view(Party::B), p, 2), std::invalid_argument);
}

TEST(Amplified, AlwaysAcceptingShotsGiveAcceptingMajority) {
  auto p = small_params(4, Engine::Aggregate);
  p.threshold = -1e300;
  const auto x = with_weight(4096, 1024);
  const CorrelatedSource a(3, 0.5, Party::A);
  const auto r = gaussian_isr_amplified(x, ones(4096), a, a.view(Party::B), p, 33);
  EXPECT_TRUE(r.accept);
  EXPECT_EQ(r.accepts, 33u);
  EXPECT_EQ(r.bits_sent, 33 * p.bits_per_shot());
}

TEST(Amplified, MajorityMatchesBinomialTail) {
  const double q = 4.0;
  const auto [x, y] = sample_pair_dist(yes_dist(q), 4096, 77);
  auto p = small_params(q, Engine::Aggregate);
  // Put the threshold near the statistic's median so single shots are noisy.
  std::vector<double> stats;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const CorrelatedSource a(isr::rand::mix(900, s), 0.9, Party::A);
    stats.push_back(gaussian_isr_protocol(x, y, a, a.view(Party::B), p).statistic);
  }
  std::nth_element(stats.begin(), stats.begin() + 80, stats.end());
  p.threshold = stats[80];

  const int reps = 33;
  const int seeds = 400;
  std::uint64_t shots = 0, shot_accepts = 0, majority = 0;
  for (int s = 0; s < seeds; ++s) {
    const CorrelatedSource a(isr::rand::mix(901, s), 0.9, Party::A);
    shot_accepts += gaussian_isr_amplified(x, y, a, a.view(Party::B), p, reps).accepts;
    shots += reps;
    const CorrelatedSource b(isr::rand::mix(902, s), 0.9, Party::A);
    majority += gaussian_isr_amplified(x, y, b, b.view(Party::B), p, reps).accept;
  }
  const double rate = static_cast<double>(shot_accepts) / shots;
  const double predicted = oracle::binomial_tail(reps, rate, reps / 2 + 1);
  const auto ci = isr::harness::wilson_interval(majority, seeds, 3.0);
  EXPECT_GE(predicted, ci.lo - 0.04);
  EXPECT_LE(predicted, ci.hi + 0.04);
}

TEST(Sparse, IndexCountAndClamp) {
  SparseParams p{16.0, default_c(16), default_s(16)};
  EXPECT_NEAR(p.gamma(), 1.0 / 9.0, 1e-12);
  EXPECT_EQ(p.num_indices(), 38u);
  SparseParams full{1.0, 1.0, 0.5};
  EXPECT_EQ(full.num_indices(), 1u);
  SparseParams tiny{1000.0, 0.0011, 0.001};
  EXPECT_LE(tiny.num_indices(), 64u * static_cast<std::size_t>(std::ceil(1.0 / tiny.c)));
  EXPECT_GE(tiny.num_indices(), 1u);
  EXPECT_THROW(validate(SparseParams{16.0, 0.01, 0.02}), isr::InfeasibleParameters);
}

TEST(Sparse, FullDensityPicksFirstIndex) {
  SparseParams full{1.0, 1.0, 0.5};
  const CorrelatedSource src(4, 1.0, Party::A);
  const auto r = sparse_psr_oneway(ones(100), ones(100), src, full);
  EXPECT_EQ(r.ell, 1u);
}

TEST(Sparse, EmptyXSendsEscape) {
  SparseParams p{16.0, default_c(16), default_s(16)};
  const CorrelatedSource src(5, 1.0, Party::A);
  const auto r = sparse_psr_oneway(BitVec(4096), ones(4096), src, p);
  EXPECT_EQ(r.ell, 0u);
  EXPECT_EQ(r.m, 0u);
  EXPECT_FALSE(r.accept);
  EXPECT_FALSE(sparse_psr_repeated(BitVec(4096), ones(4096), src, p).accept);
}

TEST(Sparse, NeedsPerfectSharing) {
  SparseParams p{16.0, default_c(16), default_s(16)};
  const CorrelatedSource src(5, 0.9, Party::A);
  EXPECT_THROW(sparse_psr_oneway(ones(64), ones(64), src, p), std::logic_error);
}

TEST(Sparse, AtomicRoundSeparatesClasses) {
  SparseParams p{16.0, default_c(16), default_s(16)};
  const auto r = run_sparse_experiment(p, 1 << 16, 1000, 31);
  std::uint64_t m_sum = 0;
  for (const auto& row : r.rows) m_sum += row.m;
  const double m = static_cast<double>(m_sum) / r.rows.size();
  const auto yes = r.yes_accept.wilson();
  const auto no = r.no_accept.wilson();
  EXPECT_GT(yes.lo, no.hi);
  EXPECT_GE(r.yes_accept.rate() - r.no_accept.rate(), 100.0 / (6.0 * m));
}

TEST(Sparse, SingleRepetitionIsAtomic) {
  SparseParams p{16.0, default_c(16), default_s(16)};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto [x, y] = sample_pair_dist(yes_dist(16), 1 << 14, seed);
    const CorrelatedSource src(seed, 1.0, Party::A);
    EXPECT_EQ(sparse_psr_repeated(x, y, src, p, 1).accept, sparse_psr_oneway(x, y, src, p).accept);
  }
}

TEST(Sparse, RepeatedProtocolDecidesCorrectly) {
  SparseParams p{16.0, default_c(16), default_s(16)};
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    const auto [xy, yy] = sample_pair_dist(yes_dist(16), 1 << 16, 50 + seed);
    const auto [xn, yn] = sample_pair_dist(no_dist(16), 1 << 16, 60 + seed);
    const CorrelatedSource src(seed, 1.0, Party::A);
    const auto ry = sparse_psr_repeated(xy, yy, src, p);
    EXPECT_EQ(ry.reps, static_cast<std::uint64_t>(std::ceil(9.0 * ry.m * ry.m)));
    EXPECT_TRUE(ry.accept);
    EXPECT_FALSE(sparse_psr_repeated(xn, yn, src, p).accept);
  }
}

TEST(EqualityCode, Parameters) {
  const EqualityCode code(128);
  EXPECT_EQ(code.k, 16u);
  EXPECT_EQ(code.n_symbols, 64u);
  EXPECT_EQ(code.encoded_bits(), 64u * 256u);
  EXPECT_NEAR(code.c(), 1.0 / 256.0, 1e-15);
  EXPECT_GT(code.c(), code.s());
  // Symbol rate K / N >= 1/4 and relative distance (N - K + 1) / N >= 1/4.
  for (std::size_t bits : {1u, 8u, 100u, 512u, 1536u}) {
    const EqualityCode c(bits);
    EXPECT_GE(4 * c.k, c.n_symbols);
    EXPECT_GE(4 * (c.n_symbols - c.k + 1), c.n_symbols);
  }
  EXPECT_THROW(EqualityCode(1537), std::invalid_argument);
  EXPECT_THROW(EqualityCode(0), std::invalid_argument);
}

TEST(EqualityCode, MinimumDistanceByEnumeration) {
  // Linear code: the minimum distance is the minimum weight of a nonzero codeword.
  const EqualityCode code(16);
  std::size_t min_weight = code.n_symbols;
  for (std::uint64_t v = 1; v < (1u << 16); ++v) {
    const auto sym = code.encode_symbols(BitVec::from_word(v, 16));
    std::size_t w = 0;
    for (auto s : sym) w += s != 0;
    min_weight = std::min(min_weight, w);
  }
  EXPECT_EQ(min_weight, code.n_symbols - code.k + 1);
}

TEST(EqualityCode, InnerProductCountsAgreements) {
  const EqualityCode code(128);
  isr::rand::PublicStream coins(3);
  for (int t = 0; t < 50; ++t) {
    BitVec a(128);
    for (std::size_t i = 0; i < 128; ++i) a.set(i, coins(t * 128 + i) & 1);
    BitVec b = a;
    b.flip(static_cast<std::size_t>(coins(10'000 + t) % 128));
    EXPECT_EQ(isr::inner_product(code.encode(a), code.encode(a)), code.n_symbols);
    const auto sa = code.encode_symbols(a);
    const auto sb = code.encode_symbols(b);
    std::size_t agree = 0;
    for (std::size_t j = 0; j < sa.size(); ++j) agree += sa[j] == sb[j];
    EXPECT_EQ(isr::inner_product(code.encode(a), code.encode(b)), agree);
    EXPECT_LE(agree, code.k - 1);
  }
}

TEST(EqualityDemo, SeparatesEqualAndUnequal) {
  isr::rand::PublicStream coins(8);
  int correct = 0;
  const int pairs = 12;
  for (int t = 0; t < pairs; ++t) {
    BitVec a(128);
    for (std::size_t i = 0; i < 128; ++i) a.set(i, coins(t * 128 + i) & 1);
    BitVec b = a;
    b.flip(static_cast<std::size_t>(t * 7 % 128));
    const CorrelatedSource src(isr::rand::mix(17, t), 0.9, Party::A);
    correct += equality_demo(a, a, src, src.view(Party::B)).accept;
    correct += !equality_demo(a, b, src, src.view(Party::B)).accept;
  }
  EXPECT_GE(correct, 2 * (2 * pairs) / 3 + 1);
  const CorrelatedSource src(1, 0.9, Party::A);
  EXPECT_THROW(equality_demo(BitVec(8), BitVec(9), src, src.view(Party::B)), std::invalid_argument);
}

TEST(ExpectedMaxNormal, KnownValues) {
  EXPECT_NEAR(expected_max_normal(1), 0.0, 1e-12);
  EXPECT_NEAR(expected_max_normal(2), 1.0 / std::sqrt(std::numbers::pi), 1e-9);
  EXPECT_NEAR(expected_max_normal(3), 1.5 / std::sqrt(std::numbers::pi), 1e-9);
}
