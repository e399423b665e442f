#include "isr/gapip.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>
#include <string>

#include "isr/errors.hpp"
#include "isr/parallel.hpp"

namespace isr::gapip {

using rand::Address;
using rand::CorrelatedSource;
using rand::Party;
using rand::StreamKind;

namespace {

constexpr std::uint64_t kInstanceTag = 0x494e5354;
constexpr std::uint64_t kCalibrationTag = 0x43414c49;
constexpr unsigned kGaussianIndexBits = 20;

PairDistribution with_cells(PairDistribution d, std::array<double, 4> cells) {
  double sum = 0.0;
  for (double& p : cells) {
    if (p < -1e-12) throw InfeasibleParameters("pair distribution has a negative cell probability");
    p = std::max(p, 0.0);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InfeasibleParameters("pair distribution cells do not sum to 1");
  d.cells = cells;
  return d;
}

// Cumulative cell boundaries scaled to 2^64, for integer comparisons.
std::array<std::uint64_t, 3> cell_thresholds(const std::array<double, 4>& cells) {
  std::array<std::uint64_t, 3> th{};
  double acc = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    acc += cells[k];
    const long double scaled = static_cast<long double>(acc) * 18446744073709551616.0L;
    th[k] = scaled >= 18446744073709551615.0L ? std::numeric_limits<std::uint64_t>::max()
                                              : static_cast<std::uint64_t>(scaled);
  }
  return th;
}

inline unsigned pick_cell(std::uint64_t w, const std::array<std::uint64_t, 3>& th) {
  return static_cast<unsigned>(w >= th[0]) + static_cast<unsigned>(w >= th[1]) +
         static_cast<unsigned>(w >= th[2]);
}

std::uint64_t gaussian_stream_key(std::uint64_t rep, std::uint64_t i) {
  return (rep << kGaussianIndexBits) | i;
}

// f n, rounded to the nearest integer when within 1e-9 relative of it, so a
// threshold like 0.2 * 100 means exactly 20 rather than the double's 20.000...01.
long double snapped(double f, long double n) {
  const long double v = static_cast<long double>(f) * n;
  const long double r = std::round(v);
  return std::abs(v - r) <= 1e-9L * std::max(1.0L, std::abs(v)) ? r : v;
}

void check_views(const CorrelatedSource& a, const CorrelatedSource& b) {
  if (a.party() != Party::A || b.party() != Party::B) {
    throw std::invalid_argument("protocol needs party A's and party B's views, in that order");
  }
}

}  // namespace

const char* to_string(Label l) {
  switch (l) {
    case Label::Yes:
      return "yes";
    case Label::No:
      return "no";
    case Label::Neither:
      break;
  }
  return "neither";
}

GapIPInstance classify(BitVec x, BitVec y, double q, double c, double s) {
  GapIPInstance out;
  out.inner = inner_product(x, y);
  out.n = x.size();
  out.q = q;
  out.c = c;
  out.s = s;
  const long double ip = static_cast<long double>(out.inner);
  const long double n = static_cast<long double>(out.n);
  if (ip >= snapped(c, n)) {
    out.label = Label::Yes;
  } else if (ip < snapped(s, n)) {
    out.label = Label::No;
  } else {
    out.label = Label::Neither;
  }
  out.sparse_ok = static_cast<long double>(x.count()) * static_cast<long double>(q) <= n;
  out.x = std::move(x);
  out.y = std::move(y);
  return out;
}

PairDistribution no_dist(double q) {
  if (!(q >= 1.0)) throw InfeasibleParameters("B_N needs q >= 1");
  PairDistribution d;
  d.kind = PairDistribution::Kind::No;
  d.q = q;
  const double a = 1.0 / (2.0 * q);
  return with_cells(d, {0.5 - a, 0.5 - a, a, a});
}

PairDistribution yes_dist(double q) {
  if (!(q >= 1.95)) throw InfeasibleParameters("B_Y needs q >= 1.95");
  PairDistribution d;
  d.kind = PairDistribution::Kind::Yes;
  d.q = q;
  return with_cells(d, {0.5 * (1.0 - 0.05 / q), 0.5 * (1.0 - 1.95 / q), 0.05 / (2.0 * q),
                        1.95 / (2.0 * q)});
}

PairDistribution general_dist(double p1, double p2, double theta) {
  PairDistribution d;
  d.kind = PairDistribution::Kind::General;
  d.p1 = p1;
  d.p2 = p2;
  d.theta = theta;
  const double pp = (1.0 + theta) / 4.0;
  const double pm = (1.0 - theta) / 4.0;
  // Index 2x + y with bit 1 <-> +1.
  return with_cells(d, {pp - (p1 + p2) / 4.0, pm - (p1 - p2) / 4.0, pm + (p1 - p2) / 4.0,
                        pp + (p1 + p2) / 4.0});
}

std::pair<BitVec, BitVec> sample_pair_dist(const PairDistribution& d, std::size_t n,
                                           std::uint64_t seed) {
  const auto th = cell_thresholds(d.cells);
  const rand::PublicStream stream(rand::mix(seed, kInstanceTag));
  BitVec x(n);
  BitVec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned cell = pick_cell(stream(i), th);
    if (cell & 2u) x.set(i, true);
    if (cell & 1u) y.set(i, true);
  }
  return {std::move(x), std::move(y)};
}

std::pair<BitVec, BitVec> sample_yes_prime(double q, std::size_t n,
                                           std::span<const std::uint32_t> bad_set,
                                           std::uint64_t seed) {
  const auto yes = cell_thresholds(yes_dist(q).cells);
  const auto no = cell_thresholds(no_dist(q).cells);
  std::vector<bool> bad(n, false);
  for (auto i : bad_set) {
    if (i >= n) throw std::invalid_argument("sample_yes_prime: bad index outside [n]");
    bad[i] = true;
  }
  const rand::PublicStream stream(rand::mix(seed, kInstanceTag));
  BitVec x(n);
  BitVec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned cell = pick_cell(stream(i), bad[i] ? no : yes);
    if (cell & 2u) x.set(i, true);
    if (cell & 1u) y.set(i, true);
  }
  return {std::move(x), std::move(y)};
}

std::uint64_t norm_bucket(std::size_t weight, std::size_t n, double c, double s) {
  if (weight == 0) return 0;
  const long double width = static_cast<long double>(c - s) * static_cast<long double>(n) / 100.0L;
  // A weight on a bucket edge (up to rounding in c - s) belongs to the lower bucket.
  const long double ratio = static_cast<long double>(weight) / width;
  return static_cast<std::uint64_t>(std::ceil(ratio * (1.0L - 1e-12L)));
}

bool bucket_large_enough(std::uint64_t m, double c, double s) {
  const double floor_value = 100.0 * c / (c - s);
  return static_cast<double>(m) >= floor_value * (1.0 - 1e-12);
}

std::uint64_t max_bucket(double c, double s) {
  return static_cast<std::uint64_t>(std::ceil(100.0 / (c - s) * (1.0 - 1e-12)));
}

std::size_t bits_for(std::uint64_t values) {
  return values <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(values - 1));
}

double expected_max_normal(std::size_t t) {
  if (t == 0) throw std::invalid_argument("expected_max_normal: t must be >= 1");
  if (t == 1) return 0.0;
  // Simpson's rule for the integral of x t phi(x) Phi(x)^(t-1).
  const double lo = -12.0;
  const double hi = 12.0;
  const int steps = 24000;
  const double h = (hi - lo) / steps;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto f = [&](double x) {
    const double phi = inv_sqrt_2pi * std::exp(-0.5 * x * x);
    const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    return x * static_cast<double>(t) * phi * std::pow(cdf, static_cast<double>(t - 1));
  };
  double sum = f(lo) + f(hi);
  for (int k = 1; k < steps; ++k) sum += f(lo + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

double GaussianParams::literal_threshold(double rho, std::uint64_t m, std::size_t n) const {
  if (m == 0) return std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  return alpha * rho * std::sqrt(std::log2(static_cast<double>(t))) * (c + s) * nn /
         (2.0 * std::sqrt(static_cast<double>(m) * (c - s) * nn / 100.0));
}

void validate(const GaussianParams& p) {
  if (!(p.s > 0.0 && p.c > p.s && p.c <= 1.0)) {
    throw InfeasibleParameters("Gaussian protocol needs 0 < s < c <= 1");
  }
  if (p.t < 2 || p.t >= (std::size_t{1} << kGaussianIndexBits)) {
    throw InfeasibleParameters("Gaussian protocol needs 2 <= t < 2^20");
  }
}

ProtocolReport gaussian_isr_protocol(const BitVec& x, const BitVec& y, const CorrelatedSource& src_a,
                                     const CorrelatedSource& src_b, const GaussianParams& params,
                                     std::uint64_t rep, std::span<const std::uint32_t> labels) {
  validate(params);
  check_views(src_a, src_b);
  if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
  if (!labels.empty() && labels.size() != x.size()) {
    throw std::invalid_argument("coordinate labels must cover every position");
  }
  const std::size_t n = x.size();
  ProtocolReport out;
  out.bits_sent = params.bits_per_shot();
  out.m = norm_bucket(x.count(), n, params.c, params.s);

  double best = -std::numeric_limits<double>::infinity();
  if (params.engine == Engine::Explicit) {
    auto label_of = [&](std::uint32_t j) -> std::uint64_t { return labels.empty() ? j : labels[j]; };
    auto g = [&](const CorrelatedSource& src, std::uint64_t i, std::uint64_t coord) {
      const std::uint64_t key = gaussian_stream_key(rep, i);
      return params.summands == 0 ? rand::corr_gaussian_exact(src, key, coord)
                                  : rand::corr_gaussian_from_bits(src, key, coord, params.summands);
    };
    const auto xs = x.support();
    for (std::uint64_t i = 1; i <= params.t; ++i) {
      double proj = 0.0;
      for (auto j : xs) proj += g(src_a, i, label_of(j));
      if (proj > best) {
        best = proj;
        out.ell = i;
      }
    }
    double stat = 0.0;
    for (auto j : y.support()) stat += g(src_b, out.ell, label_of(j));
    out.statistic = stat;
  } else {
    const std::size_t n11 = inner_product(x, y);
    const double r11 = std::sqrt(static_cast<double>(n11));
    const double r10 = std::sqrt(static_cast<double>(x.count() - n11));
    const double r01 = std::sqrt(static_cast<double>(y.count() - n11));
    auto cell = [&](const CorrelatedSource& src, std::uint64_t i, std::uint64_t which) {
      return src.gaussian(Address{StreamKind::Aggregate, rep, i, which});
    };
    for (std::uint64_t i = 1; i <= params.t; ++i) {
      double proj = 0.0;
      if (r11 > 0.0) proj += r11 * cell(src_a, i, 0);
      if (r10 > 0.0) proj += r10 * cell(src_a, i, 1);
      if (proj > best) {
        best = proj;
        out.ell = i;
      }
    }
    double stat = 0.0;
    if (r11 > 0.0) stat += r11 * cell(src_b, out.ell, 0);
    if (r01 > 0.0) stat += r01 * cell(src_b, out.ell, 2);
    out.statistic = stat;
  }

  const double threshold = params.mode == ThresholdMode::Literal
                               ? params.literal_threshold(src_b.rho(), out.m, n)
                               : params.threshold;
  out.accept = bucket_large_enough(out.m, params.c, params.s) && out.statistic >= threshold;
  return out;
}

AmplifiedReport gaussian_isr_amplified(const BitVec& x, const BitVec& y, const CorrelatedSource& src_a,
                                       const CorrelatedSource& src_b, const GaussianParams& params,
                                       std::size_t reps) {
  if (reps % 2 == 0) throw std::invalid_argument("amplification needs an odd number of repetitions");
  AmplifiedReport out;
  out.reps = reps;
  for (std::size_t r = 0; r < reps; ++r) {
    const ProtocolReport shot = gaussian_isr_protocol(x, y, src_a, src_b, params, r);
    out.bits_sent += shot.bits_sent;
    if (shot.accept) ++out.accepts;
  }
  out.accept = 2 * out.accepts > reps;
  return out;
}

Calibration calibrate_threshold(const GaussianParams& params, double q, std::size_t n, double rho,
                                std::uint64_t trials, std::uint64_t seed, std::size_t jobs) {
  validate(params);
  Calibration out;
  if (trials == 0) return out;
  const PairDistribution dists[2] = {yes_dist(q), no_dist(q)};
  double means[2] = {0.0, 0.0};
  for (int cls = 0; cls < 2; ++cls) {
    const std::uint64_t class_seed = rand::mix(rand::mix(seed, kCalibrationTag), cls);
    const auto stats = harness::parallel_map(trials, jobs, [&](std::size_t t) {
      const std::uint64_t trial_seed = rand::mix(class_seed, t);
      const auto [x, y] = sample_pair_dist(dists[cls], n, trial_seed);
      const CorrelatedSource a(trial_seed, rho, Party::A);
      return gaussian_isr_protocol(x, y, a, a.view(Party::B), params).statistic;
    });
    for (double v : stats) means[cls] += v;
    means[cls] /= static_cast<double>(trials);
  }
  out.yes_mean = means[0];
  out.no_mean = means[1];
  out.threshold = 0.5 * (means[0] + means[1]);
  return out;
}

std::size_t SparseParams::num_indices() const {
  const std::size_t cap = 64 * static_cast<std::size_t>(std::ceil(1.0 / c));
  if (c >= 1.0) return 1;
  const double t = std::ceil(std::log(1.0 / gamma()) / -std::log1p(-c) - 1e-9);
  if (!(t >= 1.0)) return 1;
  return std::min(cap, static_cast<std::size_t>(t));
}

double SparseParams::yes_bound(std::uint64_t m) const {
  return (1.0 - gamma()) * (c / (c - s)) * (100.0 / static_cast<double>(m));
}

double SparseParams::no_bound(std::uint64_t m) const {
  return (s / (c - s)) * (100.0 / (static_cast<double>(m) - 1.0));
}

std::size_t SparseParams::bits_per_round() const {
  return bits_for(num_indices() + 1) + bits_for(max_bucket(c, s) + 1);
}

void validate(const SparseParams& p) {
  if (!(p.q >= 1.0)) throw InfeasibleParameters("sparse protocol needs q >= 1");
  if (!(p.s > 0.0 && p.c > p.s && p.c <= 1.0)) {
    throw InfeasibleParameters("sparse protocol needs 0 < s < c <= 1");
  }
}

namespace {

// One atomic round given Alice's bucket m.
ProtocolReport sparse_round(const BitVec& x, const BitVec& y, const CorrelatedSource& src,
                            const SparseParams& params, std::uint64_t m, std::size_t t,
                            std::uint64_t rep) {
  ProtocolReport out;
  out.bits_sent = params.bits_per_round();
  const std::size_t n = x.size();
  if (n == 0) return out;
  std::uint64_t picked = 0;
  for (std::size_t p = 0; p < t; ++p) {
    const std::uint64_t idx = rand::shared_index(src, rep, p, n);
    if (x[idx]) {
      out.ell = p + 1;
      picked = idx;
      break;
    }
  }
  if (out.ell == 0) return out;  // escape message (0, 0)
  out.m = m;
  out.accept = bucket_large_enough(m, params.c, params.s) && y[picked];
  return out;
}

}  // namespace

ProtocolReport sparse_psr_oneway(const BitVec& x, const BitVec& y, const CorrelatedSource& src,
                                 const SparseParams& params, std::uint64_t rep) {
  validate(params);
  if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
  const std::uint64_t m = norm_bucket(x.count(), x.size(), params.c, params.s);
  return sparse_round(x, y, src, params, m, params.num_indices(), rep);
}

RepeatedReport sparse_psr_repeated(const BitVec& x, const BitVec& y, const CorrelatedSource& src,
                                   const SparseParams& params, std::uint64_t reps) {
  validate(params);
  if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
  RepeatedReport out;
  out.m = norm_bucket(x.count(), x.size(), params.c, params.s);
  out.reps = reps != 0 ? reps
                       : static_cast<std::uint64_t>(std::ceil(9.0 * static_cast<double>(out.m) *
                                                              static_cast<double>(out.m)));
  if (out.reps == 0) out.reps = 1;
  // Below the floor every round rejects, and the midpoint is undefined at m <= 1.
  if (!bucket_large_enough(out.m, params.c, params.s) || out.m < 2) {
    out.threshold = std::numeric_limits<double>::infinity();
    return out;
  }
  out.threshold = static_cast<double>(out.reps) * 0.5 * (params.yes_bound(out.m) + params.no_bound(out.m));
  const std::size_t t = params.num_indices();
  for (std::uint64_t r = 0; r < out.reps; ++r) {
    if (sparse_round(x, y, src, params, out.m, t, r).accept) ++out.accepts;
  }
  out.accept = static_cast<double>(out.accepts) >= out.threshold;
  return out;
}

namespace {

template <typename RunTrial>
ExperimentResult run_yes_no(double q, std::size_t n, std::uint64_t trials, std::uint64_t seed,
                            std::size_t jobs, RunTrial&& run_trial) {
  const PairDistribution dists[2] = {yes_dist(q), no_dist(q)};
  ExperimentResult out;
  out.yes_accept.trials = trials;
  out.no_accept.trials = trials;
  for (int cls = 0; cls < 2; ++cls) {
    const std::uint64_t class_seed = rand::mix(seed, cls);
    auto rows = harness::parallel_map(trials, jobs, [&](std::size_t t) {
      const std::uint64_t trial_seed = rand::mix(class_seed, t);
      auto [x, y] = sample_pair_dist(dists[cls], n, trial_seed);
      TrialRow row = run_trial(x, y, trial_seed);
      row.from_yes = cls == 0;
      return row;
    });
    for (auto& row : rows) {
      if (row.accept) ++(cls == 0 ? out.yes_accept : out.no_accept).successes;
      out.rows.push_back(row);
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_gaussian_experiment(const GaussianParams& params, double q, std::size_t n,
                                         double rho, std::uint64_t trials, std::uint64_t seed,
                                         std::size_t reps, std::size_t jobs) {
  validate(params);
  if (reps % 2 == 0) throw std::invalid_argument("amplification needs an odd number of repetitions");
  return run_yes_no(q, n, trials, seed, jobs, [&](const BitVec& x, const BitVec& y, std::uint64_t ts) {
    const CorrelatedSource a(ts, rho, Party::A);
    const CorrelatedSource b = a.view(Party::B);
    const ProtocolReport first = gaussian_isr_protocol(x, y, a, b, params, 0);
    TrialRow row;
    row.label = classify(x, y, q, params.c, params.s).label;
    row.ell = first.ell;
    row.m = first.m;
    row.statistic = first.statistic;
    if (reps == 1) {
      row.accept = first.accept;
      row.bits = first.bits_sent;
    } else {
      const AmplifiedReport vote = gaussian_isr_amplified(x, y, a, b, params, reps);
      row.accept = vote.accept;
      row.bits = vote.bits_sent;
    }
    return row;
  });
}

ExperimentResult run_sparse_experiment(const SparseParams& params, std::size_t n,
                                       std::uint64_t trials, std::uint64_t seed, std::uint64_t reps,
                                       std::size_t jobs) {
  validate(params);
  return run_yes_no(params.q, n, trials, seed, jobs,
                    [&](const BitVec& x, const BitVec& y, std::uint64_t ts) {
                      const CorrelatedSource src(ts, 1.0, Party::A);
                      TrialRow row;
                      row.label = classify(x, y, params.q, params.c, params.s).label;
                      const ProtocolReport first = sparse_psr_oneway(x, y, src, params, 0);
                      row.ell = first.ell;
                      row.m = first.m;
                      if (reps == 1) {
                        row.accept = first.accept;
                        row.bits = first.bits_sent;
                      } else {
                        const RepeatedReport rr = sparse_psr_repeated(x, y, src, params, reps);
                        row.accept = rr.accept;
                        row.bits = static_cast<std::size_t>(rr.reps) * params.bits_per_round();
                      }
                      return row;
                    });
}

namespace {

struct Gf256 {
  std::array<std::uint8_t, 512> exp{};
  std::array<int, 256> log{};

  Gf256() {
    unsigned v = 1;
    for (int i = 0; i < 255; ++i) {
      exp[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
      log[v] = i;
      v <<= 1;
      if (v & 0x100u) v ^= 0x11du;
    }
    for (std::size_t i = 255; i < 512; ++i) exp[i] = exp[i - 255];
  }

  std::uint8_t mul(std::uint8_t a, std::uint8_t b) const {
    if (a == 0 || b == 0) return 0;
    return exp[static_cast<std::size_t>(log[a] + log[b])];
  }
};

const Gf256& field() {
  static const Gf256 f;
  return f;
}

}  // namespace

EqualityCode::EqualityCode(std::size_t bits) : length(bits) {
  if (bits == 0) throw std::invalid_argument("equality code needs at least one bit");
  k = (bits + 7) / 8;
  n_symbols = std::min<std::size_t>(255, 4 * k);
  // Keeps the relative distance (N - K + 1) / N at least 1/4.
  if (4 * (n_symbols - k + 1) < n_symbols || k > n_symbols) {
    throw std::invalid_argument("equality code supports at most 1536 bits");
  }
}

std::vector<std::uint8_t> EqualityCode::encode_symbols(const BitVec& a) const {
  if (a.size() != length) throw std::invalid_argument("equality code: wrong input length");
  std::vector<std::uint8_t> coeffs(k, 0);
  for (std::size_t i = 0; i < length; ++i) {
    if (a[i]) coeffs[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  const Gf256& f = field();
  std::vector<std::uint8_t> out(n_symbols);
  for (std::size_t j = 0; j < n_symbols; ++j) {
    const std::uint8_t point = f.exp[j];
    std::uint8_t acc = 0;
    for (std::size_t d = k; d-- > 0;) acc = static_cast<std::uint8_t>(f.mul(acc, point) ^ coeffs[d]);
    out[j] = acc;
  }
  return out;
}

BitVec EqualityCode::encode(const BitVec& a) const {
  const auto symbols = encode_symbols(a);
  BitVec out(encoded_bits());
  for (std::size_t j = 0; j < symbols.size(); ++j) out.set(256 * j + symbols[j], true);
  return out;
}

double EqualityCode::c() const {
  return static_cast<double>(n_symbols) / static_cast<double>(encoded_bits());
}

double EqualityCode::s() const {
  return static_cast<double>(k) / static_cast<double>(encoded_bits());
}

EqualityReport equality_demo(const BitVec& a, const BitVec& b, const CorrelatedSource& src_a,
                             const CorrelatedSource& src_b, std::size_t t, std::size_t reps) {
  if (a.size() != b.size()) throw std::invalid_argument("equality_demo: strings differ in length");
  const EqualityCode code(a.size());
  const BitVec x = code.encode(a);
  const BitVec y = code.encode(b);
  GaussianParams params;
  params.c = code.c();
  params.s = code.s();
  params.t = t;
  params.mode = ThresholdMode::Literal;
  params.alpha = expected_max_normal(t) / std::sqrt(std::log2(static_cast<double>(t)));
  params.engine = Engine::Explicit;
  EqualityReport out;
  out.agreements = inner_product(x, y);
  out.vote = gaussian_isr_amplified(x, y, src_a, src_b, params, reps);
  out.accept = out.vote.accept;
  return out;
}

}  // namespace isr::gapip
