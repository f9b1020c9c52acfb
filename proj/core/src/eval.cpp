#include "linktheft/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "linktheft/errors.hpp"

namespace linktheft {

namespace {

using nlohmann::json;

}  // namespace

double auc(const std::vector<double>& scores,
           const std::vector<bool>& labels) {
  if (scores.size() != labels.size())
    throw ShapeError("scores and labels differ in length");
  const size_t n = scores.size();
  size_t positives = 0;
  for (bool b : labels) positives += b;
  const size_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw MetricError("AUC needs both classes");
  for (double s : scores)
    if (!std::isfinite(s)) throw NumericError("non-finite attack score");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Average ranks over tie groups, then the Mann-Whitney statistic.
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) +
                             static_cast<double>(j)) /
                            2.0;  // ranks are 1-based
    for (size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(negatives);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q);
}

Prf precision_recall_f1(const std::vector<bool>& predicted,
                        const std::vector<bool>& truth) {
  if (predicted.size() != truth.size())
    throw ShapeError("prediction and truth differ in length");
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    tp += predicted[i] && truth[i];
    fp += predicted[i] && !truth[i];
    fn += !predicted[i] && truth[i];
  }
  Prf out;
  if (tp + fp == 0) {
    out.degenerate = true;
  } else {
    out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    out.degenerate = true;
  } else {
    out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  } else {
    out.degenerate = true;
  }
  return out;
}

std::array<double, 3> link_prediction_features(
    const std::vector<std::vector<int>>& adjacency, int u, int v) {
  const auto& nu = adjacency[u];
  const auto& nv = adjacency[v];
  size_t common = 0;
  {
    // Neighbor lists are sorted by construction.
    size_t i = 0, j = 0;
    while (i < nu.size() && j < nv.size()) {
      if (nu[i] < nv[j]) {
        ++i;
      } else if (nu[i] > nv[j]) {
        ++j;
      } else {
        ++common;
        ++i;
        ++j;
      }
    }
  }
  const size_t uni = nu.size() + nv.size() - common;
  const double jaccard =
      uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
  const double pa =
      static_cast<double>(nu.size()) * static_cast<double>(nv.size());
  return {static_cast<double>(common), jaccard, pa};
}

AttackScores baseline_link_prediction(const PartialGraph& partial,
                                      const std::vector<AttackPair>& train,
                                      const std::vector<AttackPair>& test,
                                      int node_count, uint64_t seed,
                                      const TrainConfig& attack_config) {
  std::vector<std::vector<int>> adjacency(node_count);
  for (auto [u, v] : partial.edges) {
    adjacency[u].push_back(v);
    adjacency[v].push_back(u);
  }
  for (auto& nbrs : adjacency) std::sort(nbrs.begin(), nbrs.end());

  auto feature_matrix = [&](const std::vector<AttackPair>& pairs) {
    Matrix m(static_cast<int>(pairs.size()), 3);
    for (size_t i = 0; i < pairs.size(); ++i) {
      auto f = link_prediction_features(adjacency, pairs[i].u, pairs[i].v);
      std::copy(f.begin(), f.end(), m.row(static_cast<int>(i)).begin());
    }
    return m;
  };

  const Matrix train_features = feature_matrix(train);
  std::vector<int> labels(train.size());
  std::vector<int> rows(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    labels[i] = train[i].linked;
    rows[i] = static_cast<int>(i);
  }
  TrainConfig cfg = attack_config;
  cfg.seed = derive_seed(seed, "baseline-model");
  MlpModel model = train_mlp(train_features, rows, labels, 2, cfg);

  const Matrix p = mlp_posteriors(model, feature_matrix(test));
  AttackScores out;
  out.scores.reserve(test.size());
  out.hard_labels.emplace();
  for (int i = 0; i < p.rows; ++i) {
    out.scores.push_back(p.at(i, 1));
    out.hard_labels->push_back(p.at(i, 1) >= 0.5);
  }
  return out;
}

std::vector<BinAuc> distance_bin_analysis(
    const std::vector<double>& distances, const std::vector<double>& scores,
    const std::vector<bool>& labels, const std::vector<double>& bin_edges) {
  if (distances.size() != scores.size() || scores.size() != labels.size())
    throw ShapeError("distance/score/label lengths differ");
  if (bin_edges.size() < 2) throw ConfigError("need at least two bin edges");
  std::vector<BinAuc> bins(bin_edges.size() - 1);
  std::vector<std::vector<size_t>> members(bins.size());
  for (size_t b = 0; b < bins.size(); ++b) {
    bins[b].lo = bin_edges[b];
    bins[b].hi = bin_edges[b + 1];
  }
  for (size_t i = 0; i < distances.size(); ++i) {
    const double d = distances[i];
    for (size_t b = 0; b < bins.size(); ++b) {
      if (d >= bins[b].lo && d < bins[b].hi) {
        members[b].push_back(i);
        break;
      }
    }
  }
  for (size_t b = 0; b < bins.size(); ++b) {
    std::vector<double> s;
    std::vector<bool> l;
    for (size_t i : members[b]) {
      s.push_back(scores[i]);
      l.push_back(labels[i]);
    }
    for (bool x : l) {
      if (x) ++bins[b].positives;
      else ++bins[b].negatives;
    }
    if (bins[b].positives > 0 && bins[b].negatives > 0) {
      bins[b].auc_value = auc(s, l);
      bins[b].defined = true;
    }
  }
  return bins;
}

std::vector<double> default_bin_edges(double max_distance) {
  std::vector<double> edges;
  const int count = std::max(1, static_cast<int>(std::ceil(max_distance / 0.01)));
  for (int i = 0; i <= count; ++i) edges.push_back(0.01 * i);
  return edges;
}

std::string to_json_line(const ExperimentResult& r) {
  json j{{"attack", r.attack_id},
         {"dataset", r.dataset},
         {"seed", r.seed},
         {"auc", r.auc_value},
         {"runtime_s", r.runtime_s},
         {"config_hash", r.config_hash}};
  j["shadow"] = r.shadow.empty() ? json() : json(r.shadow);
  if (r.precision) j["precision"] = *r.precision;
  if (r.recall) j["recall"] = *r.recall;
  if (r.f1) j["f1"] = *r.f1;
  for (const auto& [k, v] : r.extra) j[k] = v;
  return j.dump();
}

ExperimentResult result_from_json_line(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ParseError("<results>", 0, "bad JSON line");
  ExperimentResult r;
  r.attack_id = j.at("attack").get<int>();
  r.dataset = j.at("dataset").get<std::string>();
  if (j.contains("shadow") && !j["shadow"].is_null())
    r.shadow = j["shadow"].get<std::string>();
  r.seed = j.at("seed").get<uint64_t>();
  r.auc_value = j.at("auc").get<double>();
  if (j.contains("precision")) r.precision = j["precision"].get<double>();
  if (j.contains("recall")) r.recall = j["recall"].get<double>();
  if (j.contains("f1")) r.f1 = j["f1"].get<double>();
  r.runtime_s = j.value("runtime_s", 0.0);
  r.config_hash = j.value("config_hash", "");
  for (auto& [key, value] : j.items()) {
    static const std::set<std::string> known{
        "attack", "dataset", "shadow", "seed",      "auc",
        "precision", "recall", "f1",   "runtime_s", "config_hash"};
    if (!known.count(key) && value.is_string())
      r.extra[key] = value.get<std::string>();
  }
  return r;
}

std::vector<ExperimentResult> read_results_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<ExperimentResult> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(result_from_json_line(line));
  }
  return out;
}

void append_results_jsonl(const std::string& path,
                          const std::vector<ExperimentResult>& results) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& r : results) out << to_json_line(r) << '\n';
}

namespace {

Stat mean_std(const std::vector<double>& v) {
  Stat s;
  const double n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  const bool identical =
      std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
  if (identical) {
    s.mean = v[0];  // no rounding residue for constant samples
    return s;
  }
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

}  // namespace

AggregateResult aggregate(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw AggregationError("no results to aggregate");
  for (const auto& r : results) {
    if (r.config_hash != results.front().config_hash)
      throw AggregationError("config hashes differ: '" +
                             results.front().config_hash + "' vs '" +
                             r.config_hash + "'");
  }
  AggregateResult agg;
  agg.n_seeds = static_cast<int>(results.size());
  agg.single_run = results.size() == 1;
  std::vector<double> aucs, ps, rs, f1s;
  for (const auto& r : results) {
    aucs.push_back(r.auc_value);
    if (r.precision) ps.push_back(*r.precision);
    if (r.recall) rs.push_back(*r.recall);
    if (r.f1) f1s.push_back(*r.f1);
  }
  agg.auc_stat = mean_std(aucs);
  if (ps.size() == results.size()) agg.precision_stat = mean_std(ps);
  if (rs.size() == results.size()) agg.recall_stat = mean_std(rs);
  if (f1s.size() == results.size()) agg.f1_stat = mean_std(f1s);
  return agg;
}

ExperimentResult ablate(int attack_id, AttackContext& ctx,
                        const std::vector<AttackPair>& test_pairs,
                        const std::set<FeatureBlock>& keep, uint64_t seed,
                        const AttackOptions& opts) {
  const FeatureSchema schema = FeatureSchema::for_attack(
      attack_id, ctx.oracle->num_classes(),
      ctx.target_attrs ? ctx.target_attrs->cols : 0);
  for (FeatureBlock b : keep) {
    if (!schema.has_block(b))
      throw ConfigError("attack " + std::to_string(attack_id) +
                        " has no feature block '" + block_name(b) + "'");
  }
  const AttackScores scores = run_attack(knowledge_for_attack(attack_id), ctx,
                                         test_pairs, seed, opts, &keep);
  std::vector<bool> truth;
  truth.reserve(test_pairs.size());
  for (const auto& p : test_pairs) truth.push_back(p.linked);

  ExperimentResult r;
  r.attack_id = attack_id;
  r.seed = seed;
  r.auc_value = auc(scores.scores, truth);
  if (scores.hard_labels) {
    const Prf prf = precision_recall_f1(*scores.hard_labels, truth);
    r.precision = prf.precision;
    r.recall = prf.recall;
    r.f1 = prf.f1;
  }
  std::string groups;
  for (FeatureBlock b : keep) {
    if (!groups.empty()) groups += "+";
    groups += block_name(b);
  }
  r.extra["ablation_keep"] = groups;
  return r;
}

}  // namespace linktheft
