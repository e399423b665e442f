#include "isr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "isr/agree.hpp"
#include "isr/compress.hpp"
#include "isr/errors.hpp"
#include "isr/gapip.hpp"
#include "isr/mathcore.hpp"
#include "isr/parallel.hpp"
#include "isr/randsource.hpp"
#include "isr/stats.hpp"
#include "isr/strategies.hpp"

namespace isr::harness {

using nlohmann::json;

namespace {

const std::vector<ParamSpec>& specs_for(const std::string& kind) {
  static const std::vector<ParamSpec> source = {
      {"rho", ParamType::Number, 0.9, "correlation"},
      {"stream", ParamType::String, "bits", "bits | gaussian | gaussian-bits"},
      {"summands", ParamType::Integer, 1024, "bits per Gaussian for gaussian-bits"},
  };
  static const std::vector<ParamSpec> compress = {
      {"rho", ParamType::Number, 0.9, "correlation"},
      {"eps", ParamType::Number, 1.0, "length slack"},
      {"delta", ParamType::Number, 0.1, "error budget"},
      {"Delta", ParamType::Number, 1.0, "prior mismatch bound in bits"},
      {"kappa", ParamType::Number, 3.0, "constant in c = ceil(kappa / eps'^2 ln(2 / delta))"},
      {"n", ParamType::Integer, 4096, "universe size of the generated prior"},
      {"entropy", ParamType::Number, 6.0, "entropy of the generated geometric prior"},
      {"perturb", ParamType::Number, 1.0, "Q_i ~ P_i 2^u, u uniform in [-perturb/2, perturb/2]"},
      {"p_file", ParamType::String, "", "prior P (JSON array or whitespace numbers)"},
      {"q_file", ParamType::String, "", "prior Q"},
  };
  static const std::vector<ParamSpec> agree = {
      {"k", ParamType::Integer, 24, "bits to agree on"},
      {"rho", ParamType::Number, 0.98, "correlation"},
      {"eps", ParamType::NumberList, json::array({0.1}), "slack grid"},
  };
  static const std::vector<ParamSpec> gapip = {
      {"proto", ParamType::String, "gaussian", "gaussian | sparse"},
      {"q", ParamType::Number, 4.0, "sparsity parameter"},
      {"n", ParamType::Integer, 65536, "vector length"},
      {"rho", ParamType::Number, 1.0, "correlation (sparse needs 1)"},
      {"c", ParamType::Number, nullptr, "yes threshold, default 0.9 / q"},
      {"s", ParamType::Number, nullptr, "no threshold, default 0.6 / q"},
      {"t", ParamType::Integer, 1024, "Gaussian projections"},
      {"mode", ParamType::String, "calibrated", "literal | calibrated"},
      {"alpha", ParamType::Number, std::sqrt(2.0 * std::numbers::ln2), "literal-mode constant"},
      {"threshold", ParamType::Number, nullptr, "calibrated threshold, default: measured"},
      {"calibration_trials", ParamType::Integer, 200, "instances per class for calibration"},
      {"engine", ParamType::String, "aggregate", "aggregate | explicit"},
      {"summands", ParamType::Integer, 0, "explicit engine: bits per Gaussian, 0 exact"},
      {"reps", ParamType::Integer, 1, "repetitions (sparse: 0 selects 9 m^2)"},
      {"instance", ParamType::String, "", "file with x and y as 0/1 lines"},
  };
  static const std::vector<ParamSpec> strategy = {
      {"k", ParamType::Integer, 4, "rounds"},
      {"samples", ParamType::Integer, 100000, "Monte Carlo samples per pair"},
      {"deterministic", ParamType::Boolean, false, "draw 0/1 trees"},
      {"a_file", ParamType::String, "", "Alice's tree as JSON"},
      {"b_file", ParamType::String, "", "Bob's tree as JSON"},
  };
  static const std::vector<ParamSpec> influence = {
      {"n", ParamType::Integer, 8, "coordinates"},
      {"p", ParamType::Number, 0.5, "bias of the product measure"},
      {"tau", ParamType::Number, 0.1, "influence threshold"},
      {"d", ParamType::Integer, 2, "degree cap"},
      {"eta", ParamType::Number, 0.3, "noise rate"},
  };
  static const std::vector<ParamSpec> equality = {
      {"length", ParamType::Integer, 128, "input bits"},
      {"rho", ParamType::Number, 0.9, "correlation"},
      {"t", ParamType::Integer, 256, "Gaussian projections"},
      {"reps", ParamType::Integer, 33, "majority repetitions"},
  };
  if (kind == "source") return source;
  if (kind == "compress") return compress;
  if (kind == "agree") return agree;
  if (kind == "gapip") return gapip;
  if (kind == "strategy-check") return strategy;
  if (kind == "influence") return influence;
  if (kind == "equality") return equality;
  throw ConfigError("unknown experiment '" + kind + "'");
}

std::uint64_t seed_from_json(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) {
    try {
      return rand::parse_seed(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  throw ConfigError("seed must be a non-negative integer or a decimal / 0x-hex string");
}

bool type_ok(ParamType type, const json& v) {
  switch (type) {
    case ParamType::Number:
      return v.is_number();
    case ParamType::Integer:
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case ParamType::String:
      return v.is_string();
    case ParamType::Boolean:
      return v.is_boolean();
    case ParamType::NumberList:
      return v.is_array() && !v.empty() &&
             std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
  }
  return false;
}

double num(const json& p, const char* key) { return p.at(key).get<double>(); }
std::uint64_t uint(const json& p, const char* key) { return p.at(key).get<std::uint64_t>(); }
std::string str(const json& p, const char* key) { return p.at(key).get<std::string>(); }

std::pair<BitVec, BitVec> read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file: " + path);
  std::vector<BitVec> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    try {
      lines.push_back(BitVec::from_string(line));
    } catch (const std::invalid_argument&) {
      throw ConfigError("instance lines must hold only 0/1 characters");
    }
  }
  if (lines.size() != 2 || lines[0].size() != lines[1].size()) {
    throw ConfigError("instance file needs two 0/1 lines of equal length");
  }
  return {lines[0], lines[1]};
}

compress::ProbVec load_prior(const std::string& path) {
  try {
    return compress::load_prob_vec(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad prior file: ") + e.what());
  }
}

// Ratio r of a geometric prior over n messages with entropy `bits`.
double geometric_ratio_for_entropy(std::size_t n, double bits) {
  if (!(bits > 0.0) || !(bits < std::log2(static_cast<double>(n)))) {
    throw InfeasibleParameters("prior entropy must lie in (0, log2 n)");
  }
  double lo = 1e-9;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (compress::geometric_prob_vec(n, mid).entropy() < bits) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ResultTable run_source(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const double rho = num(p, "rho");
  const std::string stream = str(p, "stream");
  if (stream != "bits" && stream != "gaussian" && stream != "gaussian-bits") {
    throw ConfigError("stream must be bits, gaussian or gaussian-bits");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw InfeasibleParameters("rho must lie in [0, 1]");
  ResultTable t;
  t.columns = {"stream", "rho", "samples", "estimate", "expected", "sigma", "z"};
  if (cfg.trials == 0) return t;
  const rand::CorrelatedSource a(cfg.seed, rho, rand::Party::A);
  const rand::CorrelatedSource b = a.view(rand::Party::B);
  const std::uint64_t samples = cfg.trials;
  // Chunks of 2^16 samples keep the work splittable without changing the sum.
  const std::uint64_t chunk = 1 << 16;
  const std::size_t chunks = static_cast<std::size_t>((samples + chunk - 1) / chunk);
  const std::size_t summands = static_cast<std::size_t>(uint(p, "summands"));
  const auto sums = parallel_map(chunks, cfg.jobs, [&](std::size_t c) {
    const std::uint64_t begin = c * chunk;
    const std::uint64_t end = std::min(samples, begin + chunk);
    double total = 0.0;
    if (stream == "bits") {
      const BitVec x = rand::corr_bitvec(a, begin, end - begin);
      const BitVec y = rand::corr_bitvec(b, begin, end - begin);
      const double differ = static_cast<double>(hamming(x, y));
      total = static_cast<double>(end - begin) - 2.0 * differ;
    } else {
      for (std::uint64_t i = begin; i < end; ++i) {
        if (stream == "gaussian") {
          total += rand::corr_gaussian_exact(a, 0, i) * rand::corr_gaussian_exact(b, 0, i);
        } else {
          total += rand::corr_gaussian_from_bits(a, 0, i, summands) *
                   rand::corr_gaussian_from_bits(b, 0, i, summands);
        }
      }
    }
    return total;
  });
  double total = 0.0;
  for (double s : sums) total += s;
  const double estimate = total / static_cast<double>(samples);
  // Var(ab) = 1 - rho^2 for bits, 1 + rho^2 for Gaussian products.
  const double var = stream == "bits" ? 1.0 - rho * rho : 1.0 + rho * rho;
  const double sigma = std::sqrt(var / static_cast<double>(samples));
  const double z = sigma > 0.0 ? (estimate - rho) / sigma : (estimate == rho ? 0.0 : INFINITY);
  t.rows.push_back({stream, rho, samples, estimate, rho, sigma, z});
  t.summary = {{"within_4_sigma", std::abs(estimate - rho) <= 4.0 * sigma + 1e-15}};
  return t;
}

ResultTable run_compress(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const auto params = compress::CompressParams::make(num(p, "rho"), num(p, "eps"), num(p, "delta"),
                                                     num(p, "Delta"), num(p, "kappa"));
  const std::string p_file = str(p, "p_file");
  const std::string q_file = str(p, "q_file");
  const compress::ProbVec prior_p =
      p_file.empty() ? compress::geometric_prob_vec(
                           uint(p, "n"), geometric_ratio_for_entropy(uint(p, "n"), num(p, "entropy")))
                     : load_prior(p_file);
  compress::ProbVec prior_q = prior_p;
  if (!q_file.empty()) {
    prior_q = load_prior(q_file);
  } else if (num(p, "perturb") > 0.0) {
    const rand::PublicStream noise(rand::mix(cfg.seed, 0x5052494f52));
    std::vector<double> q(prior_p.size());
    double z = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = prior_p[i] * std::exp2(num(p, "perturb") * (noise.unit(i) - 0.5));
      z += q[i];
    }
    for (double& v : q) v /= z;
    prior_q = compress::ProbVec(std::move(q));
  }
  if (prior_q.size() != prior_p.size()) throw ConfigError("P and Q must have the same size");
  ResultTable t;
  t.columns = {"rho", "eps", "delta", "Delta", "c", "n", "entropy", "trials", "successes",
               "rate", "ci_lo", "ci_hi", "mean_length", "length_bound", "promise_ok"};
  const double ratio = compress::max_log_ratio(prior_p, prior_q);
  t.summary = {{"eps_prime", params.eps_prime}, {"max_log_ratio", ratio},
               {"promise_ok", ratio <= params.Delta + 1e-12}};
  if (cfg.trials == 0) return t;
  const auto r = compress::run_compression_experiment(prior_p, prior_q, params, cfg.trials, cfg.seed, cfg.jobs);
  t.rows.push_back({params.rho, params.eps, params.delta, params.Delta, params.c, prior_p.size(),
                    prior_p.entropy(), r.trials, r.successes, r.success_rate, r.ci.lo, r.ci.hi,
                    r.mean_length, r.length_bound, r.promise_ok});
  t.summary["failures_empty"] = r.failures_empty;
  return t;
}

ResultTable run_agree(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  std::vector<double> grid;
  for (const auto& e : p.at("eps")) grid.push_back(e.get<double>());
  const auto rows = agree::sweep_tradeoff(uint(p, "k"), num(p, "rho"), grid, cfg.trials, cfg.seed, cfg.jobs);
  ResultTable t;
  t.columns = {"k", "rho", "eps", "ell", "rate", "ci_lo", "ci_hi"};
  for (const auto& r : rows) t.rows.push_back({r.k, r.rho, r.eps, r.ell, r.rate, r.ci_lo, r.ci_hi});
  return t;
}

ResultTable run_gapip(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const std::string proto = str(p, "proto");
  const double q = num(p, "q");
  const double c = p.at("c").is_null() ? gapip::default_c(q) : num(p, "c");
  const double s = p.at("s").is_null() ? gapip::default_s(q) : num(p, "s");
  const std::size_t n = uint(p, "n");
  const double rho = num(p, "rho");
  const std::uint64_t reps = uint(p, "reps");
  const std::string instance = str(p, "instance");
  ResultTable t;
  t.columns = {"label", "accept", "ell", "m", "bits"};
  auto push = [&](const gapip::TrialRow& r) {
    t.rows.push_back({gapip::to_string(r.label), r.accept, r.ell, r.m, r.bits});
  };
  auto summarize = [&](const gapip::ExperimentResult& r) {
    const auto yes_ci = r.yes_accept.wilson();
    const auto no_ci = r.no_accept.wilson();
    t.summary["yes_accept"] = {{"rate", r.yes_accept.rate()}, {"ci_lo", yes_ci.lo}, {"ci_hi", yes_ci.hi}};
    t.summary["no_accept"] = {{"rate", r.no_accept.rate()}, {"ci_lo", no_ci.lo}, {"ci_hi", no_ci.hi}};
    t.summary["gap"] = r.yes_accept.rate() - r.no_accept.rate();
  };

  if (proto == "sparse") {
    if (rho != 1.0) throw InfeasibleParameters("the sparse protocol needs perfectly shared randomness (rho = 1)");
    const gapip::SparseParams sp{q, c, s};
    gapip::validate(sp);
    t.summary["t"] = sp.num_indices();
    t.summary["bits_per_round"] = sp.bits_per_round();
    if (cfg.trials == 0) return t;
    if (!instance.empty()) {
      const auto [x, y] = read_instance(instance);
      const rand::CorrelatedSource src(cfg.seed, 1.0, rand::Party::A);
      gapip::TrialRow row;
      row.label = gapip::classify(x, y, q, c, s).label;
      const auto first = gapip::sparse_psr_oneway(x, y, src, sp, 0);
      row.ell = first.ell;
      row.m = first.m;
      if (reps == 1) {
        row.accept = first.accept;
        row.bits = first.bits_sent;
      } else {
        const auto rr = gapip::sparse_psr_repeated(x, y, src, sp, reps);
        row.accept = rr.accept;
        row.bits = static_cast<std::size_t>(rr.reps) * sp.bits_per_round();
      }
      push(row);
      return t;
    }
    const auto r = gapip::run_sparse_experiment(sp, n, cfg.trials, cfg.seed, reps, cfg.jobs);
    for (const auto& row : r.rows) push(row);
    summarize(r);
    return t;
  }
  if (proto != "gaussian") throw ConfigError("proto must be gaussian or sparse");

  gapip::GaussianParams gp;
  gp.c = c;
  gp.s = s;
  gp.t = uint(p, "t");
  const std::string mode = str(p, "mode");
  if (mode != "literal" && mode != "calibrated") throw ConfigError("mode must be literal or calibrated");
  gp.mode = mode == "literal" ? gapip::ThresholdMode::Literal : gapip::ThresholdMode::Calibrated;
  gp.alpha = num(p, "alpha");
  const std::string engine = str(p, "engine");
  if (engine != "aggregate" && engine != "explicit") throw ConfigError("engine must be aggregate or explicit");
  gp.engine = engine == "aggregate" ? gapip::Engine::Aggregate : gapip::Engine::Explicit;
  gp.summands = uint(p, "summands");
  if (gp.summands != 0 && gp.engine != gapip::Engine::Explicit) {
    throw ConfigError("summands needs the explicit engine");
  }
  if (reps % 2 == 0) throw ConfigError("reps must be odd for the Gaussian protocol");
  gapip::validate(gp);
  t.summary["bits_per_shot"] = gp.bits_per_shot();
  if (cfg.trials == 0) return t;

  std::pair<BitVec, BitVec> single;
  if (!instance.empty()) single = read_instance(instance);
  const std::size_t cal_n = instance.empty() ? n : single.first.size();
  if (gp.mode == gapip::ThresholdMode::Calibrated) {
    if (p.at("threshold").is_null()) {
      const auto cal = gapip::calibrate_threshold(gp, q, cal_n, rho, uint(p, "calibration_trials"),
                                                  cfg.seed, cfg.jobs);
      gp.threshold = cal.threshold;
      t.summary["calibration"] = {{"yes_mean", cal.yes_mean}, {"no_mean", cal.no_mean}};
    } else {
      gp.threshold = num(p, "threshold");
    }
    t.summary["threshold"] = gp.threshold;
  }
  if (!instance.empty()) {
    const auto& [x, y] = single;
    const rand::CorrelatedSource a(cfg.seed, rho, rand::Party::A);
    const auto b = a.view(rand::Party::B);
    const auto first = gapip::gaussian_isr_protocol(x, y, a, b, gp, 0);
    gapip::TrialRow row;
    row.label = gapip::classify(x, y, q, c, s).label;
    row.ell = first.ell;
    row.m = first.m;
    row.accept = first.accept;
    row.bits = first.bits_sent;
    if (reps > 1) {
      const auto vote = gapip::gaussian_isr_amplified(x, y, a, b, gp, reps);
      row.accept = vote.accept;
      row.bits = vote.bits_sent;
    }
    push(row);
    return t;
  }
  const auto r = gapip::run_gaussian_experiment(gp, q, n, rho, cfg.trials, cfg.seed, reps, cfg.jobs);
  for (const auto& row : r.rows) push(row);
  summarize(r);
  return t;
}

strategies::StrategyTree random_tree(rand::Party party, int k, bool deterministic, std::uint64_t seed) {
  auto tree = strategies::StrategyTree::uniform(party, k);
  const rand::PublicStream coins(seed);
  std::uint64_t i = 0;
  for (auto& table : tree.tables) {
    for (double& f : table) {
      const double u = coins.unit(i++);
      f = deterministic ? (u < 0.5 ? 0.0 : 1.0) : u;
    }
  }
  return tree;
}

// Expected verdict by walking every transcript through both trees.
double enumerate_acceptance(const strategies::StrategyTree& a, const strategies::StrategyTree& b) {
  double total = 0.0;
  const std::uint64_t count = std::uint64_t{1} << a.k;
  for (std::uint64_t l = 1; l < count; l += 2) {
    double prob = 1.0;
    for (int j = 0; j < a.k && prob > 0.0; ++j) {
      const auto& owner = j % 2 == 0 ? a : b;
      const double f = owner.tables[static_cast<std::size_t>(j)][l >> (a.k - j)];
      prob *= ((l >> (a.k - 1 - j)) & 1u) ? f : 1.0 - f;
    }
    total += prob;
  }
  return total;
}

strategies::StrategyTree load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open tree file: " + path);
  try {
    return strategies::tree_from_json(json::parse(in));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad tree file: ") + e.what());
  }
}

ResultTable run_strategy_check(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const int k = static_cast<int>(uint(p, "k"));
  if (k < 1 || k > strategies::kMaxRounds) throw InfeasibleParameters("k must lie in [1, 16]");
  const bool det = p.at("deterministic").get<bool>();
  const std::uint64_t samples = uint(p, "samples");
  const std::string a_file = str(p, "a_file");
  const std::string b_file = str(p, "b_file");
  if (a_file.empty() != b_file.empty()) throw ConfigError("a_file and b_file go together");
  ResultTable t;
  t.columns = {"pair", "k", "inner_product", "exhaustive", "monte_carlo", "mc_ci_lo", "mc_ci_hi",
               "member_a", "member_b"};
  if (cfg.trials == 0) return t;
  const std::uint64_t pairs = a_file.empty() ? cfg.trials : 1;
  double worst_exact = 0.0;
  for (std::uint64_t i = 0; i < pairs; ++i) {
    const std::uint64_t pair_seed = rand::mix(cfg.seed, i);
    const auto ta = a_file.empty() ? random_tree(rand::Party::A, k, det, rand::mix(pair_seed, 1)) : load_tree(a_file);
    const auto tb = b_file.empty() ? random_tree(rand::Party::B, k, det, rand::mix(pair_seed, 2)) : load_tree(b_file);
    const auto xa = strategies::tree_to_vector(ta);
    const auto xb = strategies::tree_to_vector(tb);
    const double ip = strategies::acceptance(xa, xb);
    const double exact = enumerate_acceptance(ta, tb);
    const auto sim = strategies::simulate(ta, tb, rand::mix(pair_seed, 3), samples, cfg.jobs);
    const auto ci = sim.accepted.wilson();
    worst_exact = std::max(worst_exact, std::abs(ip - exact));
    t.rows.push_back({i, ta.k, ip, exact, sim.accepted.rate(), ci.lo, ci.hi,
                      strategies::is_member(xa).ok, strategies::is_member(xb).ok});
  }
  t.summary = {{"max_exhaustive_gap", worst_exact}};
  return t;
}

ResultTable run_influence(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const int n = static_cast<int>(uint(p, "n"));
  const double bias = num(p, "p");
  const double tau = num(p, "tau");
  const int d = static_cast<int>(uint(p, "d"));
  const double eta = num(p, "eta");
  if (n < 1 || n > math::kMaxBooleanFnVars) throw InfeasibleParameters("n must lie in [1, 20]");
  if (!(bias > 0.0 && bias < 1.0)) throw InfeasibleParameters("p must lie in (0, 1)");
  if (!(tau > 0.0) || d < 1) throw InfeasibleParameters("need tau > 0 and d >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InfeasibleParameters("eta must lie in [0, 1]");
  ResultTable t;
  t.columns = {"function", "n", "p", "influence_gap", "parseval_gap", "noise_gap", "influential", "bound"};
  const auto bound = static_cast<std::uint64_t>(std::floor(static_cast<double>(d) / tau + 1e-12));
  const auto rows = parallel_map(cfg.trials, cfg.jobs, [&](std::size_t i) {
    const rand::PublicStream values(rand::mix(cfg.seed, i));
    std::vector<double> table(std::size_t{1} << n);
    for (std::size_t x = 0; x < table.size(); ++x) table[x] = 2.0 * values.unit(x) - 1.0;
    const math::BooleanFn f(n, table, bias);
    const auto& e = f.fourier();
    // Influence straight from its definition: expected conditional variance.
    double influence_gap = 0.0;
    for (int c = 1; c <= n; ++c) {
      const std::size_t bit = std::size_t{1} << (c - 1);
      double direct = 0.0;
      for (std::size_t x = 0; x < table.size(); ++x) {
        if (x & bit) continue;
        const double diff = table[x | bit] - table[x];
        direct += f.weight(x) / (1.0 - bias) * bias * (1.0 - bias) * diff * diff;
      }
      influence_gap = std::max(influence_gap, std::abs(direct - math::influence(f, c)));
    }
    double sq = 0.0;
    for (double v : e.coeffs) sq += v * v;
    const double parseval_gap = std::abs(sq - f.second_moment());
    const auto noisy = math::noise_operator(f, eta);
    const auto damped = math::reconstruct(math::damp(e, eta));
    double noise_gap = 0.0;
    for (std::size_t x = 0; x < table.size(); ++x) {
      noise_gap = std::max(noise_gap, std::abs(noisy.values()[x] - damped.values()[x]));
    }
    return json::array({i, n, bias, influence_gap, parseval_gap, noise_gap,
                        math::count_influential(f, tau, d), bound});
  });
  for (const auto& r : rows) t.rows.push_back(std::vector<json>(r.begin(), r.end()));
  return t;
}

ResultTable run_equality(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const std::size_t length = uint(p, "length");
  const double rho = num(p, "rho");
  const std::size_t t_proj = uint(p, "t");
  const std::size_t reps = uint(p, "reps");
  if (length == 0) throw InfeasibleParameters("length must be positive");
  if (reps % 2 == 0) throw ConfigError("reps must be odd");
  ResultTable t;
  t.columns = {"trial", "equal", "agreements", "accept", "accepts", "reps", "bits"};
  const auto rows = parallel_map(cfg.trials, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t trial_seed = rand::mix(cfg.seed, i);
    const rand::PublicStream bits(rand::mix(trial_seed, 0x4551));
    BitVec a(length);
    for (std::size_t j = 0; j < length; ++j) a.set(j, bits(j) & 1u);
    BitVec b = a;
    const bool equal = i % 2 == 0;
    if (!equal) b.flip(rand::to_range(bits(length), length));
    const rand::CorrelatedSource src(trial_seed, rho, rand::Party::A);
    const auto r = gapip::equality_demo(a, b, src, src.view(rand::Party::B), t_proj, reps);
    return json::array({i, equal, r.agreements, r.accept, r.vote.accepts, r.vote.reps, r.vote.bits_sent});
  });
  std::uint64_t correct[2] = {0, 0};
  std::uint64_t total[2] = {0, 0};
  for (const auto& r : rows) {
    const int cls = r[1].get<bool>() ? 0 : 1;
    ++total[cls];
    if (r[3].get<bool>() == (cls == 0)) ++correct[cls];
    t.rows.push_back(std::vector<json>(r.begin(), r.end()));
  }
  t.summary = {{"equal_accept_rate", total[0] ? double(correct[0]) / double(total[0]) : 0.0},
               {"unequal_reject_rate", total[1] ? double(correct[1]) / double(total[1]) : 0.0}};
  return t;
}

std::string csv_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_null()) return "";
  if (v.is_number_float()) {
    std::ostringstream out;
    out << std::setprecision(17) << v.get<double>();
    return out.str();
  }
  return v.dump();
}

}  // namespace

std::vector<std::string> experiment_kinds() {
  return {"source", "compress", "agree", "gapip", "strategy-check", "influence", "equality"};
}

std::string canonical_kind(const std::string& name, json* implied) {
  if (name == "correlation") return "source";
  if (name == "gapip-gaussian" || name == "gapip-sparse") {
    if (implied) (*implied)["proto"] = name == "gapip-gaussian" ? "gaussian" : "sparse";
    return "gapip";
  }
  for (const auto& k : experiment_kinds()) {
    if (k == name) return k;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

const std::vector<ParamSpec>& param_specs(const std::string& kind) { return specs_for(kind); }

std::vector<std::string> all_param_names() {
  std::set<std::string> names;
  for (const auto& k : experiment_kinds()) {
    for (const auto& s : specs_for(k)) names.insert(s.name);
  }
  return {names.begin(), names.end()};
}

json parse_param(const ParamSpec& spec, const std::string& text) {
  try {
    std::size_t used = 0;
    switch (spec.type) {
      case ParamType::Number: {
        const double v = std::stod(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case ParamType::Integer: {
        if (text.empty() || text[0] == '-') break;
        const unsigned long long v = std::stoull(text, &used);
        if (used != text.size()) break;
        return static_cast<std::uint64_t>(v);
      }
      case ParamType::String:
        return text;
      case ParamType::Boolean:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
      case ParamType::NumberList: {
        json list = json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const double v = std::stod(item, &used);
          if (used != item.size()) throw ConfigError("");
          list.push_back(v);
        }
        if (list.empty()) break;
        return list;
      }
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("bad value '" + text + "' for --" + spec.name);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {"experiment", "params", "trials", "seed", "out", "jobs"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  ExperimentConfig c;
  if (!j.contains("experiment") || !j.at("experiment").is_string()) {
    throw ConfigError("config needs an \"experiment\" string");
  }
  c.kind = j.at("experiment").get<std::string>();
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("params must be an object");
    c.params = j.at("params");
  }
  if (j.contains("trials")) {
    if (!type_ok(ParamType::Integer, j.at("trials"))) throw ConfigError("trials must be a non-negative integer");
    c.trials = j.at("trials").get<std::uint64_t>();
  }
  if (j.contains("seed")) c.seed = seed_from_json(j.at("seed"));
  if (j.contains("out")) {
    if (!j.at("out").is_string()) throw ConfigError("out must be a string");
    c.out = j.at("out").get<std::string>();
  }
  if (j.contains("jobs")) {
    if (!type_ok(ParamType::Integer, j.at("jobs"))) throw ConfigError("jobs must be a non-negative integer");
    c.jobs = j.at("jobs").get<std::size_t>();
  }
  return c;
}

json ExperimentConfig::to_json() const {
  return {{"experiment", kind}, {"params", params}, {"trials", trials}, {"seed", seed},
          {"out", out}, {"jobs", jobs}};
}

ExperimentConfig normalize(ExperimentConfig config) {
  json implied = json::object();
  config.kind = canonical_kind(config.kind, &implied);
  const auto& specs = specs_for(config.kind);
  for (const auto& [key, value] : config.params.items()) {
    const bool known = std::any_of(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.name == key; });
    if (!known) throw ConfigError("parameter '" + key + "' does not apply to " + config.kind);
  }
  for (const auto& [key, value] : implied.items()) {
    if (config.params.contains(key) && config.params.at(key) != value) {
      throw ConfigError("parameter '" + key + "' contradicts the experiment name");
    }
    config.params[key] = value;
  }
  json filled = json::object();
  for (const auto& s : specs) {
    json v = config.params.contains(s.name) ? config.params.at(s.name) : s.fallback;
    // Single numbers are accepted where a list is expected.
    if (s.type == ParamType::NumberList && v.is_number()) v = json::array({v});
    if (!v.is_null() && !type_ok(s.type, v)) throw ConfigError("parameter '" + s.name + "' has the wrong type");
    filled[s.name] = v;
  }
  config.params = filled;
  if (config.jobs == 0) config.jobs = 1;
  return config;
}

std::string config_hash(const ExperimentConfig& config) {
  const json canonical = {{"experiment", config.kind}, {"params", config.params},
                          {"trials", config.trials}, {"seed", config.seed}};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

RunResult run(const ExperimentConfig& raw) {
  const auto start = std::chrono::steady_clock::now();
  RunResult out;
  out.config = normalize(raw);
  out.hash = config_hash(out.config);
  const std::string& kind = out.config.kind;
  if (kind == "source") {
    out.table = run_source(out.config);
  } else if (kind == "compress") {
    out.table = run_compress(out.config);
  } else if (kind == "agree") {
    out.table = run_agree(out.config);
  } else if (kind == "gapip") {
    out.table = run_gapip(out.config);
  } else if (kind == "strategy-check") {
    out.table = run_strategy_check(out.config);
  } else if (kind == "influence") {
    out.table = run_influence(out.config);
  } else {
    out.table = run_equality(out.config);
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string to_csv(const RunResult& result) {
  std::ostringstream out;
  for (const auto& c : result.table.columns) out << c << ',';
  out << "config_hash\n";
  for (const auto& row : result.table.rows) {
    for (const auto& v : row) out << csv_cell(v) << ',';
    out << result.hash << '\n';
  }
  return out.str();
}

json to_json(const RunResult& result, const std::string& timestamp) {
  json rows = json::array();
  for (const auto& row : result.table.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[result.table.columns[i]] = row[i];
    obj["config_hash"] = result.hash;
    rows.push_back(obj);
  }
  json cfg = result.config.to_json();
  cfg.erase("out");
  cfg.erase("jobs");
  return {{"config", cfg},
          {"config_hash", result.hash},
          {"columns", result.table.columns},
          {"rows", rows},
          {"summary", result.table.summary},
          {"timestamp", timestamp},
          {"wall_time", result.wall_time}};
}

}  // namespace isr::harness
