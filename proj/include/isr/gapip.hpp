#pragma once

// Gap inner-product instances, their samplers, and the two one-way protocols:
// the Gaussian sketch under imperfectly shared randomness and the sparse
// index-sampling protocol under perfectly shared randomness.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "isr/bitvec.hpp"
#include "isr/randsource.hpp"
#include "isr/stats.hpp"

namespace isr::gapip {

enum class Label { Yes, No, Neither };

const char* to_string(Label l);

struct GapIPInstance {
  BitVec x;
  BitVec y;
  std::size_t n = 0;
  double q = 1.0;
  double c = 0.0;
  double s = 0.0;
  std::size_t inner = 0;
  Label label = Label::Neither;
  bool sparse_ok = false;  // |x|^2 <= n / q
};

// Yes iff <x,y> >= c n, No iff <x,y> < s n, where c n and s n within 1e-9
// (relative) of an integer count as that integer. Throws std::invalid_argument
// on length mismatch.
GapIPInstance classify(BitVec x, BitVec y, double q, double c, double s);

// Default thresholds for the sparse family: c = 0.9 / q, s = 0.6 / q.
inline double default_c(double q) { return 0.9 / q; }
inline double default_s(double q) { return 0.6 / q; }

// Distribution of one coordinate pair (x_i, y_i) in {0,1}^2.
struct PairDistribution {
  enum class Kind { No, Yes, General };
  Kind kind = Kind::No;
  double q = 0.0;                       // No / Yes
  double p1 = 0.0, p2 = 0.0, theta = 0.0;  // General, on the +-1 scale with bit 1 <-> +1
  std::array<double, 4> cells{};        // index 2 x + y

  double prob(int x, int y) const { return cells[static_cast<std::size_t>(2 * x + y)]; }
  double mean_x() const { return prob(1, 0) + prob(1, 1); }
  double mean_y() const { return prob(0, 1) + prob(1, 1); }
  double mean_xy() const { return prob(1, 1); }
};

// B_N: x ~ Bern(1/q), y uniform and independent. Needs q >= 1.
PairDistribution no_dist(double q);
// B_Y: same marginals, P[(1,1)] = 1.95 / (2q). Needs q >= 1.95.
PairDistribution yes_dist(double q);
// N_{p1,p2,theta}: E[x] = p1, E[y] = p2, E[xy] = theta on +-1 values.
PairDistribution general_dist(double p1, double p2, double theta);

// n i.i.d. pairs, deterministic in seed.
std::pair<BitVec, BitVec> sample_pair_dist(const PairDistribution& d, std::size_t n,
                                           std::uint64_t seed);
// Coordinates in bad_set follow B_N, all others B_Y.
std::pair<BitVec, BitVec> sample_yes_prime(double q, std::size_t n,
                                           std::span<const std::uint32_t> bad_set,
                                           std::uint64_t seed);

struct ProtocolReport {
  bool accept = false;
  std::uint64_t ell = 0;  // 1-based; 0 is the empty message
  std::uint64_t m = 0;
  std::size_t bits_sent = 0;
  double statistic = 0.0;  // Bob's <Y, g'_ell> (Gaussian protocol only)
};

// Bucket m with |x|^2 in ((m - 1) w, m w], w = (c - s) n / 100; 0 when x = 0.
std::uint64_t norm_bucket(std::size_t weight, std::size_t n, double c, double s);
// Bob's floor test m >= 100 c / (c - s).
bool bucket_large_enough(std::uint64_t m, double c, double s);
// Largest bucket any x of length n can produce: ceil(100 / (c - s)).
std::uint64_t max_bucket(double c, double s);
std::size_t bits_for(std::uint64_t values);  // ceil(log2(values)), 0 for values <= 1

// E[max of t i.i.d. standard normals], by quadrature.
double expected_max_normal(std::size_t t);

enum class ThresholdMode { Literal, Calibrated };

// How the t Gaussian projections are simulated.
//   Explicit:  one correlated Gaussian per (repetition, i, coordinate), either
//              exact or a normalised sum of `summands` correlated bits.
//   Aggregate: the projections only depend on x and y through the cell sums
//              over x&y, x&~y and ~x&y, so each cell sum is drawn directly as
//              sqrt(count) times one correlated normal. Same joint law as the
//              exact Explicit engine, at O(t) cost instead of O(t |x|).
enum class Engine { Explicit, Aggregate };

struct GaussianParams {
  double c = 0.0;
  double s = 0.0;
  std::size_t t = 1024;
  ThresholdMode mode = ThresholdMode::Calibrated;
  double alpha = std::sqrt(2.0 * std::numbers::ln2);
  double threshold = 0.0;  // Calibrated mode
  Engine engine = Engine::Explicit;
  std::size_t summands = 0;  // Explicit engine: 0 for exact Gaussians

  std::size_t bits_per_shot() const { return bits_for(t) + bits_for(max_bucket(c, s) + 1); }
  // alpha rho sqrt(log2 t) (c + s) n / (2 sqrt(m (c - s) n / 100)).
  double literal_threshold(double rho, std::uint64_t m, std::size_t n) const;
};

// Throws InfeasibleParameters unless 0 < s < c and t >= 2.
void validate(const GaussianParams& p);

// One shot using the randomness of repetition `rep`. src_a / src_b are the two
// parties' views. `labels`, when given, names the Gaussian coordinate used for
// each position of x and y (Explicit engine only); relabeling x, y and the
// streams together leaves every decision unchanged.
ProtocolReport gaussian_isr_protocol(const BitVec& x, const BitVec& y,
                                     const rand::CorrelatedSource& src_a,
                                     const rand::CorrelatedSource& src_b,
                                     const GaussianParams& params, std::uint64_t rep = 0,
                                     std::span<const std::uint32_t> labels = {});

struct AmplifiedReport {
  bool accept = false;
  std::size_t accepts = 0;
  std::size_t reps = 0;
  std::size_t bits_sent = 0;
};

// Majority over repetitions 0..reps-1. Throws std::invalid_argument unless reps is odd.
AmplifiedReport gaussian_isr_amplified(const BitVec& x, const BitVec& y,
                                       const rand::CorrelatedSource& src_a,
                                       const rand::CorrelatedSource& src_b,
                                       const GaussianParams& params, std::size_t reps);

struct Calibration {
  double yes_mean = 0.0;
  double no_mean = 0.0;
  double threshold = 0.0;  // midpoint
};

// Mean statistic on `trials` instances from B_Y and from B_N each.
Calibration calibrate_threshold(const GaussianParams& params, double q, std::size_t n, double rho,
                                std::uint64_t trials, std::uint64_t seed, std::size_t jobs = 1);

// Sparse protocol under perfectly shared randomness.
struct SparseParams {
  double q = 16.0;
  double c = 0.0;
  double s = 0.0;

  double gamma() const { return (c - s) / (3.0 * c); }
  // ceil(ln(1/gamma) / -ln(1 - c)), clamped to [1, 64 ceil(1/c)].
  std::size_t num_indices() const;
  double yes_bound(std::uint64_t m) const;  // (1 - gamma) c/(c - s) 100/m
  double no_bound(std::uint64_t m) const;   // s/(c - s) 100/(m - 1)
  std::size_t bits_per_round() const;
};

void validate(const SparseParams& p);

// One atomic round with the shared indices of repetition `rep`. src must have rho = 1.
ProtocolReport sparse_psr_oneway(const BitVec& x, const BitVec& y, const rand::CorrelatedSource& src,
                                 const SparseParams& params, std::uint64_t rep = 0);

struct RepeatedReport {
  bool accept = false;
  std::uint64_t m = 0;
  std::uint64_t reps = 0;
  std::uint64_t accepts = 0;
  double threshold = 0.0;  // reps * midpoint of the two bounds
};

// reps == 0 selects ceil(9 m^2).
RepeatedReport sparse_psr_repeated(const BitVec& x, const BitVec& y,
                                   const rand::CorrelatedSource& src, const SparseParams& params,
                                   std::uint64_t reps = 0);

// Trial rows of a yes/no experiment: the first `trials` instances are drawn
// from B_Y, the next `trials` from B_N.
struct TrialRow {
  bool from_yes = true;
  Label label = Label::Neither;
  bool accept = false;
  std::uint64_t ell = 0;
  std::uint64_t m = 0;
  std::size_t bits = 0;
  double statistic = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRow> rows;
  harness::Proportion yes_accept;
  harness::Proportion no_accept;
};

// reps == 1 runs single shots; larger odd reps runs the majority vote.
ExperimentResult run_gaussian_experiment(const GaussianParams& params, double q, std::size_t n,
                                         double rho, std::uint64_t trials, std::uint64_t seed,
                                         std::size_t reps = 1, std::size_t jobs = 1);
// reps == 1 runs atomic rounds; 0 selects ceil(9 m^2) per instance.
ExperimentResult run_sparse_experiment(const SparseParams& params, std::size_t n,
                                       std::uint64_t trials, std::uint64_t seed,
                                       std::uint64_t reps = 1, std::size_t jobs = 1);

// Equality testing through a public Reed-Solomon code over GF(256).
//
// A bit string of length L is split into K = ceil(L / 8) bytes, read as the
// coefficients of a polynomial of degree < K, and evaluated at alpha^0 ..
// alpha^(N-1) with N = min(255, 4K) (alpha = 2, field polynomial 0x11d). Each
// symbol becomes a one-hot block of 256 bits, so <X, Y> counts agreeing
// symbols: N for equal strings and at most K - 1 otherwise.
struct EqualityCode {
  std::size_t length = 0;  // L
  std::size_t k = 0;
  std::size_t n_symbols = 0;

  explicit EqualityCode(std::size_t bits);
  std::size_t encoded_bits() const { return 256 * n_symbols; }
  std::vector<std::uint8_t> encode_symbols(const BitVec& a) const;
  BitVec encode(const BitVec& a) const;
  // Gap thresholds on the encodings: c = N / n, s = K / n.
  double c() const;
  double s() const;
};

struct EqualityReport {
  bool accept = false;
  std::size_t agreements = 0;  // symbols where the encodings agree
  AmplifiedReport vote;
};

// Literal threshold with alpha = E[max of t normals] / sqrt(log2 t).
EqualityReport equality_demo(const BitVec& a, const BitVec& b, const rand::CorrelatedSource& src_a,
                             const rand::CorrelatedSource& src_b, std::size_t t = 256,
                             std::size_t reps = 33);

}  // namespace isr::gapip
