#include "isr/strategies.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "isr/parallel.hpp"

namespace isr::strategies {

namespace {

void check_rounds(int k) {
  if (k < 1 || k > kMaxRounds) throw std::invalid_argument("strategies need 1 <= k <= 16");
}

std::string history_string(std::uint64_t prefix, int length) {
  std::string s(static_cast<std::size_t>(length), '0');
  for (int i = 0; i < length; ++i) {
    if ((prefix >> (length - 1 - i)) & 1u) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

const char* party_name(Party p) { return p == Party::A ? "A" : "B"; }

void check_vector(const StrategyVector& x) {
  check_rounds(x.k);
  if (x.raw.size() != (std::size_t{1} << x.k)) {
    throw std::invalid_argument("strategy vector length must be 2^k");
  }
}

}  // namespace

bool owns_round(Party party, int j) { return (j % 2 == 0) == (party == Party::A); }

StrategyTree StrategyTree::uniform(Party party, int k) {
  check_rounds(k);
  StrategyTree t;
  t.party = party;
  t.k = k;
  t.tables.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    if (owns_round(party, j)) t.tables[static_cast<std::size_t>(j)].assign(std::size_t{1} << j, 0.5);
  }
  return t;
}

void StrategyTree::validate() const {
  check_rounds(k);
  if (tables.size() != static_cast<std::size_t>(k)) throw std::invalid_argument("tree needs k tables");
  for (int j = 0; j < k; ++j) {
    const auto& table = tables[static_cast<std::size_t>(j)];
    const std::size_t want = owns_round(party, j) ? std::size_t{1} << j : 0;
    if (table.size() != want) throw std::invalid_argument("tree table has the wrong size");
    for (double f : table) {
      if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("tree transition outside [0, 1]");
    }
  }
}

bool StrategyTree::deterministic() const {
  for (const auto& table : tables) {
    for (double f : table) {
      if (f != 0.0 && f != 1.0) return false;
    }
  }
  return true;
}

std::vector<double> StrategyVector::masked() const {
  std::vector<double> out(raw.size());
  for (std::size_t l = 0; l < raw.size(); ++l) out[l] = verdict(l) ? raw[l] : 0.0;
  return out;
}

std::vector<std::vector<double>> ptranscript_table(const StrategyVector& x) {
  check_vector(x);
  std::vector<std::vector<double>> levels(static_cast<std::size_t>(x.k) + 1);
  levels[static_cast<std::size_t>(x.k)] = x.raw;
  for (int j = x.k - 1; j >= 0; --j) {
    const auto& below = levels[static_cast<std::size_t>(j) + 1];
    auto& level = levels[static_cast<std::size_t>(j)];
    level.resize(std::size_t{1} << j);
    const bool own = owns_round(x.party, j);
    for (std::size_t p = 0; p < level.size(); ++p) {
      const double sum = below[2 * p] + below[2 * p + 1];
      level[p] = own ? sum : 0.5 * sum;
    }
  }
  return levels;
}

double ptranscript(const StrategyVector& x, std::uint64_t prefix, int length) {
  check_vector(x);
  if (length < 0 || length > x.k || (length < 64 && prefix >> length != 0)) {
    throw std::invalid_argument("ptranscript: prefix does not fit its length");
  }
  if (length == x.k) return x.raw[prefix];
  const double p0 = ptranscript(x, 2 * prefix, length + 1);
  const double p1 = ptranscript(x, 2 * prefix + 1, length + 1);
  return owns_round(x.party, length) ? p0 + p1 : 0.5 * (p0 + p1);
}

Membership is_member(const StrategyVector& x, double tol) {
  Membership out;
  auto fail = [&](std::string msg) {
    out.ok = false;
    out.violation = std::move(msg);
    return out;
  };
  if (x.k < 1 || x.k > kMaxRounds || x.raw.size() != (std::size_t{1} << x.k)) {
    return fail("vector length is not 2^k for 1 <= k <= 16");
  }
  for (std::size_t l = 0; l < x.raw.size(); ++l) {
    if (!(x.raw[l] >= -tol && x.raw[l] <= 1.0 + tol)) {
      return fail("entry " + history_string(l, x.k) + " outside [0, 1]");
    }
  }
  const auto levels = ptranscript_table(x);
  if (std::abs(levels[0][0] - 1.0) > tol) {
    std::ostringstream msg;
    msg << "p() = " << levels[0][0] << ", expected 1";
    return fail(msg.str());
  }
  for (int j = 0; j < x.k; ++j) {
    if (owns_round(x.party, j)) continue;
    const auto& below = levels[static_cast<std::size_t>(j) + 1];
    for (std::size_t p = 0; p < (std::size_t{1} << j); ++p) {
      if (std::abs(below[2 * p] - below[2 * p + 1]) > tol) {
        const std::string h = history_string(p, j);
        return fail("p(" + h + "0) != p(" + h + "1)");
      }
    }
  }
  return out;
}

StrategyVector tree_to_vector(const StrategyTree& tree) {
  tree.validate();
  StrategyVector x;
  x.party = tree.party;
  x.k = tree.k;
  x.raw.assign(std::size_t{1} << tree.k, 1.0);
  for (std::size_t l = 0; l < x.raw.size(); ++l) {
    double prob = 1.0;
    for (int j = 0; j < tree.k; ++j) {
      if (!owns_round(tree.party, j)) continue;
      const std::uint64_t history = l >> (tree.k - j);
      const bool bit = (l >> (tree.k - 1 - j)) & 1u;
      const double f = tree.tables[static_cast<std::size_t>(j)][history];
      prob *= bit ? f : 1.0 - f;
    }
    x.raw[l] = prob;
  }
  return x;
}

StrategyTree vector_to_tree(const StrategyVector& x) {
  const auto levels = ptranscript_table(x);
  StrategyTree tree = StrategyTree::uniform(x.party, x.k);
  for (int j = 0; j < x.k; ++j) {
    if (!owns_round(x.party, j)) continue;
    const auto& here = levels[static_cast<std::size_t>(j)];
    const auto& below = levels[static_cast<std::size_t>(j) + 1];
    auto& table = tree.tables[static_cast<std::size_t>(j)];
    for (std::size_t h = 0; h < table.size(); ++h) {
      // Unreachable history: any transition works, keep 1/2.
      if (here[h] <= 0.0) continue;
      table[h] = std::clamp(below[2 * h + 1] / here[h], 0.0, 1.0);
    }
  }
  return tree;
}

double acceptance(const StrategyVector& xa, const StrategyVector& xb) {
  check_vector(xa);
  check_vector(xb);
  if (xa.party != Party::A || xb.party != Party::B) {
    throw std::invalid_argument("acceptance needs Alice's vector first and Bob's second");
  }
  if (xa.k != xb.k) throw std::invalid_argument("acceptance: round counts differ");
  double total = 0.0;
  for (std::size_t l = 1; l < xa.raw.size(); l += 2) total += xa.raw[l] * xb.raw[l];
  return total;
}

namespace {

void check_pair(const StrategyTree& a, const StrategyTree& b) {
  a.validate();
  b.validate();
  if (a.party != Party::A || b.party != Party::B) {
    throw std::invalid_argument("need Alice's tree first and Bob's second");
  }
  if (a.k != b.k) throw std::invalid_argument("trees have different round counts");
}

}  // namespace

Simulation simulate(const StrategyTree& a, const StrategyTree& b, std::uint64_t seed,
                    std::uint64_t samples, std::size_t jobs) {
  check_pair(a, b);
  Simulation out;
  out.accepted.trials = samples;
  if (samples == 0) return out;
  const auto transcripts = harness::parallel_map(samples, jobs, [&](std::size_t s) {
    const rand::PublicStream coins(rand::mix(seed, s));
    std::uint64_t prefix = 0;
    for (int j = 0; j < a.k; ++j) {
      const StrategyTree& owner = j % 2 == 0 ? a : b;
      const double f = owner.tables[static_cast<std::size_t>(j)][prefix];
      prefix = 2 * prefix + (coins.unit(static_cast<std::uint64_t>(j)) < f ? 1u : 0u);
    }
    return prefix;
  });
  out.histogram.assign(std::size_t{1} << a.k, 0);
  for (auto l : transcripts) {
    ++out.histogram[l];
    if (verdict(l)) ++out.accepted.successes;
  }
  return out;
}

std::uint64_t replay(const StrategyTree& a, const StrategyTree& b) {
  check_pair(a, b);
  if (!a.deterministic() || !b.deterministic()) throw std::invalid_argument("replay needs 0/1 trees");
  std::uint64_t prefix = 0;
  for (int j = 0; j < a.k; ++j) {
    const StrategyTree& owner = j % 2 == 0 ? a : b;
    prefix = 2 * prefix + (owner.tables[static_cast<std::size_t>(j)][prefix] == 1.0 ? 1u : 0u);
  }
  return prefix;
}

Reduction psr_to_gapip(const std::vector<StrategyVector>& alice,
                       const std::vector<StrategyVector>& bob) {
  if (alice.empty() || alice.size() != bob.size()) {
    throw std::invalid_argument("reduction needs one strategy per party for each random string");
  }
  const int k = alice.front().k;
  const std::size_t width = std::size_t{1} << k;
  Reduction out;
  out.k = k;
  out.c = (2.0 / 3.0) * std::ldexp(1.0, -k);
  out.s = (1.0 / 3.0) * std::ldexp(1.0, -k);
  out.x = BitVec(width * alice.size());
  out.y = BitVec(width * alice.size());
  for (std::size_t r = 0; r < alice.size(); ++r) {
    for (const StrategyVector* v : {&alice[r], &bob[r]}) {
      if (v->k != k) throw std::invalid_argument("reduction: round counts differ");
      const Membership mem = is_member(*v);
      if (!mem.ok) throw std::invalid_argument("reduction: not a strategy vector: " + mem.violation);
      for (double e : v->raw) {
        if (e != 0.0 && e != 1.0) throw std::invalid_argument("reduction needs 0/1 strategy vectors");
      }
    }
    if (alice[r].party != Party::A || bob[r].party != Party::B) {
      throw std::invalid_argument("reduction: party tags do not match");
    }
    for (std::size_t l = 0; l < width; ++l) {
      if (alice[r].raw[l] == 1.0 && verdict(l)) out.x.set(r * width + l, true);
      if (bob[r].raw[l] == 1.0) out.y.set(r * width + l, true);
    }
  }
  return out;
}

namespace toy {

namespace {

constexpr std::array<std::pair<unsigned, unsigned>, kStrings> kMasks = {{
    {0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}, {2, 0}, {3, 0}, {3, 1},
}};

unsigned parity(unsigned a, unsigned r) { return static_cast<unsigned>(std::popcount(a & r & 3u) & 1); }

void check(unsigned input, int r) {
  if (input > 3) throw std::invalid_argument("toy protocol inputs are 2-bit values");
  if (r < 0 || r >= kStrings) throw std::invalid_argument("toy protocol has 8 random strings");
}

}  // namespace

std::pair<unsigned, unsigned> masks(int r) {
  check(0, r);
  return kMasks[static_cast<std::size_t>(r)];
}

StrategyTree alice(unsigned a, int r) {
  check(a, r);
  const auto [r1, r2] = kMasks[static_cast<std::size_t>(r)];
  StrategyTree t = StrategyTree::uniform(Party::A, kRounds);
  t.tables[0][0] = parity(a, r1);
  for (double& f : t.tables[2]) f = parity(a, r2);
  return t;
}

StrategyTree bob(unsigned b, int r) {
  check(b, r);
  const auto [r1, r2] = kMasks[static_cast<std::size_t>(r)];
  StrategyTree t = StrategyTree::uniform(Party::B, kRounds);
  for (std::size_t h = 0; h < 2; ++h) t.tables[1][h] = h == parity(b, r1) ? 1.0 : 0.0;
  for (std::size_t h = 0; h < 8; ++h) {
    const bool first_ok = (h >> 1) & 1u;
    const bool second_ok = (h & 1u) == parity(b, r2);
    t.tables[3][h] = first_ok && second_ok ? 1.0 : 0.0;
  }
  return t;
}

}  // namespace toy

nlohmann::json to_json(const StrategyTree& tree) {
  tree.validate();
  nlohmann::json tables = nlohmann::json::object();
  for (int j = 0; j < tree.k; ++j) {
    const auto& table = tree.tables[static_cast<std::size_t>(j)];
    for (std::size_t h = 0; h < table.size(); ++h) tables[history_string(h, j)] = table[h];
  }
  return {{"party", party_name(tree.party)}, {"k", tree.k}, {"tables", tables}};
}

StrategyTree tree_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("party") || !j.contains("k") || !j.contains("tables")) {
    throw std::invalid_argument("strategy tree JSON needs party, k and tables");
  }
  const std::string party = j.at("party").get<std::string>();
  if (party != "A" && party != "B") throw std::invalid_argument("party must be \"A\" or \"B\"");
  const int k = j.at("k").get<int>();
  StrategyTree tree = StrategyTree::uniform(party == "A" ? Party::A : Party::B, k);
  const auto& tables = j.at("tables");
  if (!tables.is_object()) throw std::invalid_argument("tables must be an object");
  std::size_t expected = 0;
  for (int r = 0; r < k; ++r) {
    auto& table = tree.tables[static_cast<std::size_t>(r)];
    for (std::size_t h = 0; h < table.size(); ++h) {
      const std::string key = history_string(h, r);
      if (!tables.contains(key)) throw std::invalid_argument("missing transition for history '" + key + "'");
      table[h] = tables.at(key).get<double>();
      ++expected;
    }
  }
  if (tables.size() != expected) throw std::invalid_argument("tables hold histories the party does not own");
  tree.validate();
  return tree;
}

}  // namespace isr::strategies
