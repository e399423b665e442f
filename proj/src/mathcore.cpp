#include "isr/mathcore.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace isr::math {

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: x outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

namespace {

double basis_scale(double p) { return std::sqrt(p * (1.0 - p)); }

}  // namespace

double FourierExpansion::evaluate(std::uint32_t x) const {
  const double sigma = basis_scale(p);
  const double chi0 = -p / sigma;
  const double chi1 = (1.0 - p) / sigma;
  double acc = 0.0;
  for (std::uint32_t s = 0; s < coeffs.size(); ++s) {
    double term = coeffs[s];
    for (std::uint32_t rest = s; rest && term != 0.0; rest &= rest - 1) {
      const std::uint32_t bit = rest & (~rest + 1);
      term *= (x & bit) ? chi1 : chi0;
    }
    acc += term;
  }
  return acc;
}

BooleanFn::BooleanFn(int n, std::vector<double> values, double p)
    : n_(n), p_(p), values_(std::move(values)) {
  if (n < 1 || n > kMaxBooleanFnVars) throw std::invalid_argument("BooleanFn: n must be in [1, 20]");
  if (values_.size() != (std::size_t{1} << n)) {
    throw std::invalid_argument("BooleanFn: table length must be 2^n");
  }
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("BooleanFn: p must be in (0,1)");
}

double BooleanFn::weight(std::uint32_t x) const {
  const int ones = std::popcount(x);
  return std::pow(p_, ones) * std::pow(1.0 - p_, n_ - ones);
}

double BooleanFn::mean() const {
  double m = 0.0;
  for (std::uint32_t x = 0; x < values_.size(); ++x) m += weight(x) * values_[x];
  return m;
}

double BooleanFn::second_moment() const {
  double m = 0.0;
  for (std::uint32_t x = 0; x < values_.size(); ++x) m += weight(x) * values_[x] * values_[x];
  return m;
}

bool BooleanFn::in_range(double lo, double hi) const {
  for (double v : values_) {
    if (v < lo || v > hi) return false;
  }
  return true;
}

const FourierExpansion& BooleanFn::fourier() const {
  std::call_once(cache_->once, [this] { cache_->expansion = fourier_expand(*this); });
  return cache_->expansion;
}

// In-place butterfly, one coordinate at a time. For a pair (f0, f1) along a
// coordinate: c_0 = (1-p) f0 + p f1 and c_1 = sigma (f1 - f0).
FourierExpansion fourier_expand(const BooleanFn& f) {
  const double p = f.p();
  const double sigma = basis_scale(p);
  std::vector<double> a(f.values().begin(), f.values().end());
  const std::size_t size = a.size();
  for (int i = 0; i < f.n(); ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t x = 0; x < size; ++x) {
      if (x & bit) continue;
      const double f0 = a[x];
      const double f1 = a[x | bit];
      a[x] = (1.0 - p) * f0 + p * f1;
      a[x | bit] = sigma * (f1 - f0);
    }
  }
  return FourierExpansion{f.n(), p, std::move(a)};
}

BooleanFn reconstruct(const FourierExpansion& e) {
  const double p = e.p;
  const double sigma = basis_scale(p);
  std::vector<double> a = e.coeffs;
  const std::size_t size = a.size();
  for (int i = 0; i < e.n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t x = 0; x < size; ++x) {
      if (x & bit) continue;
      const double c0 = a[x];
      const double c1 = a[x | bit];
      a[x] = c0 - c1 * p / sigma;
      a[x | bit] = c0 + c1 * (1.0 - p) / sigma;
    }
  }
  return BooleanFn(e.n, std::move(a), p);
}

namespace {

void check_coordinate(const BooleanFn& f, int i) {
  if (i < 1 || i > f.n()) throw std::out_of_range("coordinate out of range");
}

}  // namespace

double influence(const BooleanFn& f, int i) {
  check_coordinate(f, i);
  return low_degree_influence(f, i, f.n());
}

double low_degree_influence(const BooleanFn& f, int i, int d) {
  check_coordinate(f, i);
  if (d < 1) throw std::invalid_argument("low_degree_influence: d must be >= 1");
  const auto& e = f.fourier();
  const std::uint32_t bit = std::uint32_t{1} << (i - 1);
  double sum = 0.0;
  for (std::uint32_t s = 0; s < e.coeffs.size(); ++s) {
    if ((s & bit) && std::popcount(s) <= d) sum += e.coeffs[s] * e.coeffs[s];
  }
  return sum;
}

std::size_t count_influential(const BooleanFn& f, double tau, int d) {
  if (!(tau > 0.0)) throw std::invalid_argument("count_influential: tau must be > 0");
  std::size_t count = 0;
  for (int i = 1; i <= f.n(); ++i) {
    if (low_degree_influence(f, i, d) > tau) ++count;
  }
  return count;
}

BooleanFn noise_operator(const BooleanFn& f, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("noise_operator: eta outside [0,1]");
  const double p = f.p();
  std::vector<double> a(f.values().begin(), f.values().end());
  const std::size_t size = a.size();
  // Per coordinate: (Tg)(b) = (1-eta) g(b) + eta ((1-p) g(0) + p g(1)).
  for (int i = 0; i < f.n(); ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t x = 0; x < size; ++x) {
      if (x & bit) continue;
      const double g0 = a[x];
      const double g1 = a[x | bit];
      const double avg = (1.0 - p) * g0 + p * g1;
      a[x] = (1.0 - eta) * g0 + eta * avg;
      a[x | bit] = (1.0 - eta) * g1 + eta * avg;
    }
  }
  return BooleanFn(f.n(), std::move(a), p);
}

FourierExpansion damp(const FourierExpansion& e, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("damp: eta outside [0,1]");
  FourierExpansion out = e;
  for (std::uint32_t s = 0; s < out.coeffs.size(); ++s) {
    out.coeffs[s] *= std::pow(1.0 - eta, std::popcount(s));
  }
  return out;
}

}  // namespace isr::math
