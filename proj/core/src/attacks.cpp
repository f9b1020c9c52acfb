#include "linktheft/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linktheft/errors.hpp"
#include "linktheft/rng.hpp"

namespace linktheft {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw KnowledgeError(what);
}

std::vector<int> all_rows(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

/// MLP training only propagates the labeled rows, so train on the labeled
/// submatrix and predict over the full attribute matrix afterwards.
Matrix train_reference_posteriors(const Matrix& attrs,
                                  const std::vector<int>& labeled_ids,
                                  const std::vector<int>& labels,
                                  int num_classes, TrainConfig cfg) {
  Matrix sub(static_cast<int>(labeled_ids.size()), attrs.cols);
  std::vector<int> rows(labeled_ids.size());
  std::vector<int> sub_labels(labeled_ids.size());
  for (size_t i = 0; i < labeled_ids.size(); ++i) {
    const auto src = attrs.row(labeled_ids[i]);
    std::copy(src.begin(), src.end(), sub.row(static_cast<int>(i)).begin());
    rows[i] = static_cast<int>(i);
    sub_labels[i] = labels[labeled_ids[i]];
  }
  MlpModel g = train_mlp(sub, rows, sub_labels, num_classes, cfg);
  return mlp_posteriors(g, attrs);
}

/// Trains the adversary's reference model g on the target attributes and the
/// labeled subset, caching its posteriors over all target nodes.
const Matrix& ensure_reference(AttackContext& ctx, uint64_t seed,
                               const AttackOptions& opts) {
  if (ctx.g_posteriors) return *ctx.g_posteriors;
  require(ctx.target_attrs && ctx.target_labels && !ctx.labeled_ids.empty(),
          "reference model needs target attributes and labeled nodes");
  TrainConfig cfg = opts.reference_config;
  cfg.seed = derive_seed(seed, "reference");
  ctx.g_posteriors =
      train_reference_posteriors(*ctx.target_attrs, ctx.labeled_ids,
                                 *ctx.target_labels, ctx.target_num_classes,
                                 cfg);
  return *ctx.g_posteriors;
}

/// Trains the shadow target model f' (and pair set) on D'.
void ensure_shadow_target(AttackContext& ctx, uint64_t seed,
                          const AttackOptions& opts) {
  if (ctx.shadow_f_posteriors) return;
  require(ctx.shadow != nullptr, "transferring attack needs a shadow dataset");
  const auto labeled = sample_labeled_nodes(
      *ctx.shadow, opts.labeled_fraction, derive_seed(seed, "shadow-labeled"));
  TrainConfig cfg = opts.target_config;
  cfg.hidden_dims = opts.shadow_hidden_dims;
  cfg.seed = derive_seed(seed, "shadow-target");
  GcnModel f_shadow = train_gcn(*ctx.shadow, labeled, cfg);
  ctx.shadow_f_posteriors = gcn_posteriors(f_shadow, ctx.shadow->attributes);
  // The shadow attack dataset is not split; all of it trains the attack model.
  ctx.shadow_pairs =
      build_attack_pairs(ctx.shadow->graph, derive_seed(seed, "shadow-pairs"));
}

const Matrix& ensure_shadow_reference(AttackContext& ctx, uint64_t seed,
                                      const AttackOptions& opts) {
  if (ctx.shadow_g_posteriors) return *ctx.shadow_g_posteriors;
  require(ctx.shadow != nullptr, "shadow reference model needs a shadow dataset");
  const auto labeled = sample_labeled_nodes(
      *ctx.shadow, opts.labeled_fraction, derive_seed(seed, "shadow-labeled"));
  TrainConfig cfg = opts.reference_config;
  cfg.seed = derive_seed(seed, "shadow-reference");
  ctx.shadow_g_posteriors = train_reference_posteriors(
      ctx.shadow->attributes, labeled, ctx.shadow->labels,
      ctx.shadow->num_classes, cfg);
  return *ctx.shadow_g_posteriors;
}

/// Fills rows [first_row, first_row + pairs.size()) of `out`.
void assemble_into(const FeatureSchema& schema, const PairFeatureContext& fctx,
                   const std::vector<AttackPair>& pairs, Matrix& out,
                   size_t first_row) {
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto row = assemble(schema, pairs[i].u, pairs[i].v, fctx);
    std::copy(row.begin(), row.end(),
              out.data.begin() +
                  static_cast<long>(first_row + i) * schema.dim);
  }
}

Matrix assemble_matrix(const FeatureSchema& schema,
                       const PairFeatureContext& fctx,
                       const std::vector<AttackPair>& pairs) {
  Matrix m(static_cast<int>(pairs.size()), schema.dim);
  assemble_into(schema, fctx, pairs, m, 0);
  return m;
}

MlpModel train_attack_mlp(const Matrix& features,
                          const std::vector<int>& labels, uint64_t seed,
                          const AttackOptions& opts) {
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_pos || !has_neg)
    throw TrainingError(0, "attack training labels are single-class");
  TrainConfig cfg = opts.attack_config;
  cfg.seed = derive_seed(seed, "attack-model");
  return train_mlp(features, all_rows(features.rows), labels, 2, cfg);
}

/// Target-side feature context for scoring (and for supervised training).
PairFeatureContext target_feature_context(
    AttackContext& ctx, const FeatureSchema& schema,
    const std::vector<AttackPair>& pairs, uint64_t seed,
    const AttackOptions& opts) {
  PairFeatureContext fctx;
  fctx.f_posteriors = &ctx.fetch_target_posteriors(pairs);
  if (schema.has_block(FeatureBlock::kGDist))
    fctx.g_posteriors = &ensure_reference(ctx, seed, opts);
  if (schema.has_block(FeatureBlock::kAttrDist)) {
    require(ctx.target_attrs != nullptr,
            "attack features need target attributes");
    fctx.attrs = ctx.target_attrs;
  }
  return fctx;
}

AttackScores score_pairs(const MlpModel& model, const FeatureSchema& schema,
                         const PairFeatureContext& fctx,
                         const std::vector<AttackPair>& pairs,
                         const std::set<FeatureBlock>* keep_blocks) {
  AttackScores out;
  out.scores.reserve(pairs.size());
  out.hard_labels.emplace();
  out.hard_labels->reserve(pairs.size());
  // Stream in chunks so desk-scale test sets never materialize as one
  // feature matrix.
  constexpr size_t kChunk = 2048;
  for (size_t begin = 0; begin < pairs.size(); begin += kChunk) {
    const size_t end = std::min(begin + kChunk, pairs.size());
    Matrix batch(static_cast<int>(end - begin), schema.dim);
    for (size_t i = begin; i < end; ++i) {
      auto row = assemble(schema, pairs[i].u, pairs[i].v, fctx);
      if (keep_blocks) schema.mask_outside(row, *keep_blocks);
      std::copy(row.begin(), row.end(),
                batch.data.begin() + static_cast<long>(i - begin) * schema.dim);
    }
    Matrix p = mlp_posteriors(model, batch);
    for (int i = 0; i < p.rows; ++i) {
      const double prob_linked = p.at(i, 1);
      out.scores.push_back(prob_linked);
      out.hard_labels->push_back(prob_linked >= 0.5);
    }
  }
  return out;
}

std::vector<double> pair_distances(const Matrix& vectors,
                                   const std::vector<AttackPair>& pairs,
                                   DistanceMetric metric) {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& p : pairs)
    d.push_back(distance(metric, vectors.row(p.u), vectors.row(p.v)));
  return d;
}

AttackScores scores_from_distances(std::vector<double> distances) {
  AttackScores out;
  out.scores.resize(distances.size());
  for (size_t i = 0; i < distances.size(); ++i) out.scores[i] = -distances[i];
  try {
    out.hard_labels = kmeans_binarize(distances);
  } catch (const DegenerateInputError&) {
    out.hard_labels.reset();
  }
  return out;
}

}  // namespace

int resolve_attack(const KnowledgeTriplet& k) {
  // Table rows: (F, A*, D') -> id.
  static constexpr int table[2][2][2] = {
      //          D'=0  D'=1
      {{0, 1},   // F=0, A*=0
       {3, 4}},  // F=0, A*=1
      {{2, 5},   // F=1, A*=0
       {6, 7}},  // F=1, A*=1
  };
  return table[k.has_attributes][k.has_partial_graph][k.has_shadow];
}

KnowledgeTriplet knowledge_for_attack(int attack_id) {
  if (attack_id < 0 || attack_id > 7)
    throw ConfigError("attack id must be in 0..7");
  for (int f = 0; f < 2; ++f)
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d) {
        KnowledgeTriplet k{f != 0, a != 0, d != 0};
        if (resolve_attack(k) == attack_id) return k;
      }
  throw ConfigError("unreachable");
}

std::string variant_name(Attack2Variant v) {
  switch (v) {
    case Attack2Variant::kAuto: return "auto";
    case Attack2Variant::kTargetPosteriors: return "target-posteriors";
    case Attack2Variant::kAttributes: return "attributes";
    case Attack2Variant::kDifference: return "difference";
    case Attack2Variant::kReferencePosteriors: return "reference-posteriors";
  }
  return "?";
}

std::optional<Attack2Variant> variant_from_name(const std::string& name) {
  for (Attack2Variant v :
       {Attack2Variant::kAuto, Attack2Variant::kTargetPosteriors,
        Attack2Variant::kAttributes, Attack2Variant::kDifference,
        Attack2Variant::kReferencePosteriors})
    if (variant_name(v) == name) return v;
  return std::nullopt;
}

TrainConfig default_target_config() {
  TrainConfig c;
  c.epochs = 100;
  c.learning_rate = 0.01;
  c.dropout_rate = 0.5;
  c.hidden_dims = {16};
  return c;
}

TrainConfig default_reference_config() {
  TrainConfig c;
  c.epochs = 100;
  c.learning_rate = 0.01;
  c.dropout_rate = 0.5;
  c.hidden_dims = {16, 16};
  return c;
}

TrainConfig default_attack_config() {
  TrainConfig c;
  c.epochs = 50;
  c.learning_rate = 0.001;
  c.dropout_rate = 0.5;
  c.hidden_dims = {32, 32, 32};
  return c;
}

const Matrix& AttackContext::fetch_target_posteriors(
    const std::vector<AttackPair>& pairs) {
  if (!oracle) throw KnowledgeError("attack context has no target oracle");
  if (!f_cache) {
    f_cache = Matrix(oracle->node_count(), oracle->num_classes());
    f_fetched.assign(static_cast<size_t>(oracle->node_count()), 0);
  }
  auto fetch = [&](int node) {
    if (node < 0 || node >= f_cache->rows)
      throw OracleError("pair references node " + std::to_string(node) +
                        " outside the oracle's node range");
    if (f_fetched[node]) return;
    const auto p = oracle->query(node);
    std::copy(p.begin(), p.end(), f_cache->row(node).begin());
    f_fetched[node] = 1;
  };
  for (const auto& p : pairs) {
    fetch(p.u);
    fetch(p.v);
  }
  return *f_cache;
}

AttackScores attack0_scores(PosteriorOracle& oracle,
                            const std::vector<AttackPair>& pairs,
                            DistanceMetric metric) {
  AttackContext ctx;
  ctx.oracle = &oracle;
  const Matrix& f = ctx.fetch_target_posteriors(pairs);
  return scores_from_distances(pair_distances(f, pairs, metric));
}

Attack2Variant resolve_attack2_variant(Attack2Variant v, int attr_dim) {
  if (v != Attack2Variant::kAuto) return v;
  // High-dimensional (sparse) attributes favor posterior distances; the
  // threshold is a documented heuristic, not a paper-stated rule.
  return attr_dim >= 500 ? Attack2Variant::kTargetPosteriors
                         : Attack2Variant::kAttributes;
}

AttackScores attack2_scores(AttackContext& ctx,
                            const std::vector<AttackPair>& pairs,
                            Attack2Variant variant, DistanceMetric metric,
                            uint64_t seed, const AttackOptions& opts) {
  require(ctx.target_attrs != nullptr, "Attack-2 needs target attributes");
  variant = resolve_attack2_variant(variant, ctx.target_attrs->cols);
  switch (variant) {
    case Attack2Variant::kTargetPosteriors: {
      return attack0_scores(*ctx.oracle, pairs, metric);
    }
    case Attack2Variant::kAttributes: {
      return scores_from_distances(
          pair_distances(*ctx.target_attrs, pairs, metric));
    }
    case Attack2Variant::kDifference: {
      const Matrix& f = ctx.fetch_target_posteriors(pairs);
      const Matrix& g = ensure_reference(ctx, seed, opts);
      std::vector<double> d(pairs.size());
      for (size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        d[i] = distance(metric, f.row(p.u), f.row(p.v)) -
               distance(metric, g.row(p.u), g.row(p.v));
      }
      return scores_from_distances(std::move(d));
    }
    case Attack2Variant::kReferencePosteriors: {
      const Matrix& g = ensure_reference(ctx, seed, opts);
      return scores_from_distances(pair_distances(g, pairs, metric));
    }
    case Attack2Variant::kAuto:
      break;
  }
  throw ConfigError("unresolved Attack-2 variant");
}

std::vector<bool> kmeans_binarize(const std::vector<double>& distances) {
  const size_t n = distances.size();
  if (n < 2) throw DegenerateInputError("need at least two distances");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return distances[a] < distances[b]; });
  if (distances[order.front()] == distances[order.back()])
    throw DegenerateInputError("all distances are equal");

  // Exact 1-D 2-means: the optimal partition is a split of the sorted values,
  // found by scanning all splits with prefix sums.
  std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double v = distances[order[i]];
    prefix[i + 1] = prefix[i] + v;
    prefix_sq[i + 1] = prefix_sq[i] + v * v;
  }
  auto sse = [&](size_t lo, size_t hi) {  // [lo, hi)
    const double cnt = static_cast<double>(hi - lo);
    const double sum = prefix[hi] - prefix[lo];
    return (prefix_sq[hi] - prefix_sq[lo]) - sum * sum / cnt;
  };
  size_t best_split = 1;
  double best = sse(0, 1) + sse(1, n);
  for (size_t k = 2; k < n; ++k) {
    const double cost = sse(0, k) + sse(k, n);
    if (cost < best) {
      best = cost;
      best_split = k;
    }
  }
  std::vector<bool> positive(n, false);
  for (size_t i = 0; i < best_split; ++i) positive[order[i]] = true;
  return positive;
}

MlpModel train_supervised_attack(int attack_id, AttackContext& ctx,
                                 uint64_t seed, const AttackOptions& opts) {
  if (attack_id != 3 && attack_id != 6)
    throw ConfigError("supervised attack id must be 3 or 6");
  require(ctx.pairs != nullptr,
          "supervised attack needs partial-graph train pairs");
  const auto train = ctx.pairs->train_pairs();
  const FeatureSchema schema = FeatureSchema::for_attack(
      attack_id, ctx.oracle->num_classes(),
      ctx.target_attrs ? ctx.target_attrs->cols : 0);
  const PairFeatureContext fctx =
      target_feature_context(ctx, schema, train, seed, opts);
  const Matrix features = assemble_matrix(schema, fctx, train);
  std::vector<int> labels(train.size());
  for (size_t i = 0; i < train.size(); ++i) labels[i] = train[i].linked;
  return train_attack_mlp(features, labels, seed, opts);
}

MlpModel train_transfer_attack(int attack_id, AttackContext& ctx,
                               uint64_t seed, const AttackOptions& opts) {
  if (attack_id != 1 && attack_id != 5)
    throw ConfigError("transferring attack id must be 1 or 5");
  ensure_shadow_target(ctx, seed, opts);
  const FeatureSchema schema = FeatureSchema::for_attack(
      attack_id, ctx.shadow->num_classes, ctx.shadow->attr_dim());
  PairFeatureContext fctx;
  fctx.f_posteriors = &*ctx.shadow_f_posteriors;
  if (attack_id == 5) {
    fctx.g_posteriors = &ensure_shadow_reference(ctx, seed, opts);
    fctx.attrs = &ctx.shadow->attributes;
  }
  const auto& shadow_pairs = ctx.shadow_pairs->pairs;
  const Matrix features = assemble_matrix(schema, fctx, shadow_pairs);
  std::vector<int> labels(shadow_pairs.size());
  for (size_t i = 0; i < shadow_pairs.size(); ++i)
    labels[i] = shadow_pairs[i].linked;
  return train_attack_mlp(features, labels, seed, opts);
}

MlpModel train_combined_attack(int attack_id, AttackContext& ctx,
                               uint64_t seed, const AttackOptions& opts) {
  if (attack_id != 4 && attack_id != 7)
    throw ConfigError("combined attack id must be 4 or 7");
  require(ctx.pairs != nullptr,
          "combined attack needs partial-graph train pairs");
  ensure_shadow_target(ctx, seed, opts);

  // Shadow rows use the shadow-side artifacts, target rows the oracle (and,
  // for Attack-7, the reference model / target attributes). Both sides share
  // the transfer-consistent schema, so the row blocks concatenate cleanly.
  const FeatureSchema schema = FeatureSchema::for_attack(
      attack_id, ctx.shadow->num_classes, ctx.shadow->attr_dim());

  PairFeatureContext shadow_fctx;
  shadow_fctx.f_posteriors = &*ctx.shadow_f_posteriors;
  if (attack_id == 7) {
    shadow_fctx.g_posteriors = &ensure_shadow_reference(ctx, seed, opts);
    shadow_fctx.attrs = &ctx.shadow->attributes;
  }
  const auto& shadow_pairs = ctx.shadow_pairs->pairs;
  const auto train = ctx.pairs->train_pairs();
  Matrix features(static_cast<int>(shadow_pairs.size() + train.size()),
                  schema.dim);
  assemble_into(schema, shadow_fctx, shadow_pairs, features, 0);
  const PairFeatureContext target_fctx =
      target_feature_context(ctx, schema, train, seed, opts);
  assemble_into(schema, target_fctx, train, features, shadow_pairs.size());

  std::vector<int> labels;
  labels.reserve(shadow_pairs.size() + train.size());
  for (const auto& p : shadow_pairs) labels.push_back(p.linked);
  for (const auto& p : train) labels.push_back(p.linked);
  return train_attack_mlp(features, labels, seed, opts);
}

AttackScores run_attack(const KnowledgeTriplet& knowledge, AttackContext& ctx,
                        const std::vector<AttackPair>& test_pairs,
                        uint64_t seed, const AttackOptions& opts,
                        const std::set<FeatureBlock>* keep_blocks) {
  const int id = resolve_attack(knowledge);
  switch (id) {
    case 0:
      return attack0_scores(*ctx.oracle, test_pairs, opts.metric);
    case 2:
      return attack2_scores(ctx, test_pairs, opts.variant, opts.metric, seed,
                            opts);
    default:
      break;
  }
  MlpModel model;
  if (id == 3 || id == 6) {
    model = train_supervised_attack(id, ctx, seed, opts);
  } else if (id == 1 || id == 5) {
    model = train_transfer_attack(id, ctx, seed, opts);
  } else {
    model = train_combined_attack(id, ctx, seed, opts);
  }
  const FeatureSchema schema = FeatureSchema::for_attack(
      id, ctx.oracle->num_classes(),
      ctx.target_attrs ? ctx.target_attrs->cols : 0);
  if (schema.dim != model.input_dim)
    throw ShapeError("target-side features have dimension " +
                     std::to_string(schema.dim) + " but the attack model expects " +
                     std::to_string(model.input_dim));
  const PairFeatureContext fctx =
      target_feature_context(ctx, schema, test_pairs, seed, opts);
  return score_pairs(model, schema, fctx, test_pairs, keep_blocks);
}

}  // namespace linktheft
