#include "isr/compress.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "isr/errors.hpp"
#include "isr/mathcore.hpp"
#include "isr/parallel.hpp"

namespace isr::compress {

using rand::CorrelatedSource;
using rand::Party;

ProbVec::ProbVec(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("ProbVec: empty distribution");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("ProbVec: negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("ProbVec: probabilities must sum to 1");
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
  entropy_ = math::entropy_bits(probs_);
  order_.resize(probs_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [this](std::size_t a, std::size_t b) { return probs_[a] > probs_[b]; });
}

std::size_t ProbVec::sample(double u) const {
  const double target = u * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  if (i >= probs_.size()) i = probs_.size() - 1;
  // Never return a zero-probability message.
  while (probs_[i] == 0.0 && i > 0) --i;
  return i;
}

ProbVec load_prob_vec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open distribution file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<double> probs;
  if (first != std::string::npos && text[first] == '[') {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_array()) throw std::invalid_argument("distribution file must hold a JSON array");
    for (const auto& v : j) {
      if (!v.is_number()) throw std::invalid_argument("distribution entries must be numbers");
      probs.push_back(v.get<double>());
    }
  } else {
    std::istringstream ss(text);
    std::string token;
    while (ss >> token) {
      std::size_t used = 0;
      probs.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument("bad number in distribution file: " + token);
    }
  }
  return ProbVec(std::move(probs));
}

ProbVec geometric_prob_vec(std::size_t n, double ratio) {
  if (n == 0 || !(ratio > 0.0)) throw std::invalid_argument("geometric_prob_vec: need n >= 1, ratio > 0");
  std::vector<double> p(n);
  double w = 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = w;
    sum += w;
    w *= ratio;
  }
  for (double& x : p) x /= sum;
  return ProbVec(std::move(p));
}

double max_log_ratio(const ProbVec& p, const ProbVec& q) {
  if (p.size() != q.size()) throw std::invalid_argument("max_log_ratio: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0 && q[i] == 0.0) continue;
    if (p[i] == 0.0 || q[i] == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(std::log2(p[i] / q[i])));
  }
  return worst;
}

double solve_epsilon_prime(double eps, double mu) {
  if (!(eps > 0.0)) throw InfeasibleParameters("epsilon must be positive");
  if (!(mu >= 0.0 && mu < 0.5)) throw InfeasibleParameters("mu must lie in [0, 1/2)");
  const double h_mu = math::binary_entropy(mu);
  if (h_mu >= 1.0) throw InfeasibleParameters("h(mu) >= 1: no compression possible");
  const double target = 1.0 - (1.0 - h_mu) / (1.0 + eps);
  if (target >= 1.0) throw InfeasibleParameters("required h(mu + eps') >= 1");
  // h is increasing on [0, 1/2], so bisect on the entropy form of the equation.
  double lo = 0.0;
  double hi = 0.5 - mu;
  for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (math::binary_entropy(mu + mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

CompressParams CompressParams::make(double rho, double eps, double delta, double Delta,
                                    double kappa) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InfeasibleParameters("compression needs rho in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw InfeasibleParameters("delta must lie in (0, 1)");
  if (!(Delta >= 0.0)) throw InfeasibleParameters("Delta must be non-negative");
  if (!(kappa > 0.0)) throw InfeasibleParameters("kappa must be positive");
  CompressParams out;
  out.rho = rho;
  out.eps = eps;
  out.delta = delta;
  out.Delta = Delta;
  out.kappa = kappa;
  out.mu = (1.0 - rho) / 2.0;
  out.eps_prime = solve_epsilon_prime(eps, out.mu);
  const double c = std::ceil(kappa / (out.eps_prime * out.eps_prime) * std::log(2.0 / delta));
  out.c = static_cast<std::size_t>(c);
  return out;
}

double CompressParams::length_factor() const {
  return (1.0 + eps) / (1.0 - math::binary_entropy(mu));
}

std::size_t codeword_length(const ProbVec& p, std::size_t message, const CompressParams& params) {
  if (message >= p.size() || p[message] == 0.0) {
    throw std::invalid_argument("encode: message outside the support of P");
  }
  const double bits = std::log2(1.0 / p[message]) + 2.0 * params.Delta + std::log2(1.0 / params.delta);
  // Absorb rounding so an exactly integral formula value is not bumped up.
  const double j = std::ceil(params.length_factor() * bits - 1e-9);
  return std::max(params.c, static_cast<std::size_t>(std::max(1.0, j)));
}

BitVec encode(const ProbVec& p, std::size_t message, const CompressParams& params,
              const CorrelatedSource& src) {
  if (src.party() != Party::A) throw std::invalid_argument("encode: source must be party A's view");
  const std::size_t j = codeword_length(p, message, params);
  return rand::dictionary_word(src, message, j);
}

namespace {

std::size_t radius_cutoff(const CompressParams& params, std::size_t j) {
  return static_cast<std::size_t>(std::floor(params.radius_fraction() * static_cast<double>(j) + 1e-12));
}

}  // namespace

std::vector<std::size_t> decode_candidates(const ProbVec& q, const BitVec& word,
                                           const CompressParams& params,
                                           const CorrelatedSource& src) {
  if (src.party() != Party::B) throw std::invalid_argument("decode: source must be party B's view");
  if (word.empty()) throw std::invalid_argument("decode: empty word");
  const std::size_t cutoff = radius_cutoff(params, word.size());
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < q.size(); ++m) {
    if (rand::dictionary_distance(src, m, word, cutoff) <= cutoff) out.push_back(m);
  }
  return out;
}

// Scanning messages in decreasing-Q order (ties by index) makes the first
// survivor the argmax, so the scan usually stops early.
std::optional<std::size_t> decode(const ProbVec& q, const BitVec& word,
                                  const CompressParams& params, const CorrelatedSource& src) {
  if (src.party() != Party::B) throw std::invalid_argument("decode: source must be party B's view");
  if (word.empty()) throw std::invalid_argument("decode: empty word");
  const std::size_t cutoff = radius_cutoff(params, word.size());
  for (std::size_t m : q.by_likelihood()) {
    if (rand::dictionary_distance(src, m, word, cutoff) <= cutoff) return m;
  }
  return std::nullopt;
}

CompressionReport run_compression_experiment(const ProbVec& p, const ProbVec& q,
                                             const CompressParams& params, std::uint64_t trials,
                                             std::uint64_t master_seed, std::size_t jobs) {
  if (p.size() != q.size()) throw std::invalid_argument("P and Q must have the same universe");
  CompressionReport report;
  report.promise_ok = max_log_ratio(p, q) <= params.Delta + 1e-12;
  report.length_bound = params.length_factor() * (p.entropy() + 2.0 * params.Delta + static_cast<double>(params.c));
  report.trials = trials;
  if (trials == 0) return report;

  struct TrialResult {
    std::size_t length = 0;
    bool success = false;
    bool empty = false;
    bool length_ok = true;
  };
  const auto results = harness::parallel_map(trials, jobs, [&](std::size_t t) {
    const CorrelatedSource alice(rand::mix(master_seed, t), params.rho, Party::A);
    const CorrelatedSource bob = alice.view(Party::B);
    const double u = alice.public_stream(rand::Address{rand::StreamKind::Public, 0, 0, 0}).unit(0);
    const std::size_t m = p.sample(u);
    const BitVec x = encode(p, m, params, alice);
    const auto decoded = decode(q, x, params, bob);
    TrialResult r;
    r.length = x.size();
    r.success = decoded.has_value() && *decoded == m;
    r.empty = !decoded.has_value();
    r.length_ok = x.size() == codeword_length(p, m, params);
    return r;
  });

  double total_length = 0.0;
  for (const auto& r : results) {
    total_length += static_cast<double>(r.length);
    if (r.success) ++report.successes;
    if (r.empty) ++report.failures_empty;
    if (!r.length_ok) ++report.max_length_formula_mismatch;
  }
  report.success_rate = static_cast<double>(report.successes) / static_cast<double>(trials);
  report.mean_length = total_length / static_cast<double>(trials);
  report.ci = harness::wilson_interval(report.successes, trials);
  return report;
}

}  // namespace isr::compress
