#include "linktheft/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "linktheft/errors.hpp"
#include "linktheft/rng.hpp"

namespace linktheft {

namespace {

// floor() of the exact rational product, robust to the usual 2.9999...96
// double artifacts.
size_t floor_fraction(double fraction, size_t n) {
  return static_cast<size_t>(
      std::floor(fraction * static_cast<double>(n) + 1e-9));
}

uint64_t pair_key(int u, int v) {
  return (static_cast<uint64_t>(u) << 32) | static_cast<uint32_t>(v);
}

}  // namespace

size_t AttackPairSet::positive_count() const {
  size_t c = 0;
  for (const auto& p : pairs) c += p.linked;
  return c;
}

size_t AttackPairSet::negative_count() const {
  return pairs.size() - positive_count();
}

std::vector<AttackPair> AttackPairSet::train_pairs() const {
  std::vector<AttackPair> out;
  for (const auto& p : pairs)
    if (p.split == Split::kTrain) out.push_back(p);
  return out;
}

std::vector<AttackPair> AttackPairSet::test_pairs() const {
  std::vector<AttackPair> out;
  for (const auto& p : pairs)
    if (p.split == Split::kTest) out.push_back(p);
  return out;
}

PartialGraph AttackPairSet::train_partial_graph() const {
  PartialGraph pg;
  for (const auto& p : pairs)
    if (p.split == Split::kTrain && p.linked) pg.edges.emplace_back(p.u, p.v);
  std::sort(pg.edges.begin(), pg.edges.end());
  return pg;
}

std::vector<int> sample_labeled_nodes(const Dataset& ds, double fraction,
                                      uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw ConfigError("labeled fraction must be in (0, 1]");
  const size_t n = static_cast<size_t>(ds.node_count());
  const size_t k = floor_fraction(fraction, n);
  if (k == 0)
    throw ConfigError("labeled fraction selects zero nodes");

  std::vector<int> ids(n);
  for (size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots become the sample.
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(rng.below(n - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  for (int id : ids) {
    if (!ds.has_label(id))
      throw IntegrityError("sampled node " + std::to_string(id) +
                           " has no label");
  }
  return ids;
}

AttackPairSet build_attack_pairs(const Graph& g, uint64_t seed) {
  const size_t n = static_cast<size_t>(g.node_count);
  const size_t m = g.edge_count();
  const size_t total_pairs = n * (n - 1) / 2;
  if (total_pairs < m || total_pairs - m < m)
    throw SamplingError("graph has " + std::to_string(m) + " edges but only " +
                        std::to_string(total_pairs - m) +
                        " non-edges; cannot balance");

  AttackPairSet set;
  set.pairs.reserve(2 * m);
  for (auto [u, v] : g.edges) set.pairs.push_back({u, v, true, Split::kTrain});

  Rng rng(seed);
  std::unordered_set<uint64_t> chosen;
  chosen.reserve(2 * m);
  size_t attempts = 0, found = 0;
  bool exhaustive = false;
  while (found < m) {
    int u = static_cast<int>(rng.below(n));
    int v = static_cast<int>(rng.below(n));
    ++attempts;
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (g.has_edge(u, v) || !chosen.insert(pair_key(u, v)).second) {
      // Dense graphs make rejection sampling crawl; every 1000 attempts with
      // a rejection rate above 50% we fall back to exhaustive enumeration.
      if (attempts >= 1000 && attempts % 1000 == 0 &&
          found * 2 < attempts) {
        exhaustive = true;
        break;
      }
      continue;
    }
    set.pairs.push_back({u, v, false, Split::kTrain});
    ++found;
  }

  if (exhaustive) {
    std::vector<std::pair<int, int>> non_edges;
    non_edges.reserve(total_pairs - m);
    for (int u = 0; u < g.node_count; ++u)
      for (int v = u + 1; v < g.node_count; ++v)
        if (!g.has_edge(u, v) && !chosen.count(pair_key(u, v)))
          non_edges.emplace_back(u, v);
    while (found < m) {
      size_t j = static_cast<size_t>(rng.below(non_edges.size()));
      auto [u, v] = non_edges[j];
      non_edges[j] = non_edges.back();
      non_edges.pop_back();
      set.pairs.push_back({u, v, false, Split::kTrain});
      ++found;
    }
  }
  return set;
}

void split_pairs(AttackPairSet& set, double train_fraction, uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ConfigError("train fraction must be in (0, 1)");
  const size_t k = floor_fraction(train_fraction, set.pairs.size());
  std::vector<size_t> order(set.pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  for (size_t i = 0; i < order.size(); ++i)
    set.pairs[order[i]].split = i < k ? Split::kTrain : Split::kTest;
}

}  // namespace linktheft
