#include "linktheft/experiment.hpp"

#include <chrono>

#include <nlohmann/json.hpp>

#include "linktheft/errors.hpp"
#include "linktheft/models.hpp"
#include "linktheft/pairs.hpp"
#include "linktheft/rng.hpp"

namespace linktheft {

namespace {

using nlohmann::json;

json config_to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"lr", c.learning_rate},
              {"dropout", c.dropout_rate},
              {"hidden", c.hidden_dims}};
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

std::string config_hash(const ExperimentConfig& cfg, int attack_id,
                        const std::string& dataset,
                        const std::string& shadow) {
  json j{{"attack", attack_id},
         {"dataset", dataset},
         {"shadow", shadow},
         {"labeled_fraction", cfg.labeled_fraction},
         {"train_fraction", cfg.train_fraction},
         {"defense_k", cfg.defense_k},
         {"metric", metric_name(cfg.metric)},
         {"variant", variant_name(cfg.variant)},
         {"target_model", cfg.target_model},
         {"shadow_hidden", cfg.shadow_hidden_dims},
         {"target", config_to_json(cfg.target_config)},
         {"reference", config_to_json(cfg.reference_config)},
         {"attack_model", config_to_json(cfg.attack_config)}};
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx",
           static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

struct ExperimentRunner::SeedState {
  uint64_t seed = 0;
  std::vector<int> labeled_ids;
  Matrix target_posteriors;
  std::unique_ptr<PosteriorOracle> oracle;
  AttackPairSet pairs;
  std::vector<AttackPair> train;
  std::vector<AttackPair> test;
  AttackContext ctx;
};

ExperimentRunner::ExperimentRunner(const Dataset& target,
                                   ExperimentConfig config)
    : target_(target), config_(std::move(config)) {
  target_.validate();
  if (config_.target_model != "gcn" && config_.target_model != "sage")
    throw ConfigError("target model must be 'gcn' or 'sage'");
}

ExperimentRunner::~ExperimentRunner() = default;

void ExperimentRunner::set_shadow(const Dataset* shadow) {
  shadow_ = shadow;
  state_.reset();
}

void ExperimentRunner::set_fixed_posteriors(Matrix posteriors) {
  if (posteriors.rows != target_.node_count())
    throw ConfigError("posterior rows do not match the target node count");
  fixed_posteriors_ = std::move(posteriors);
  state_.reset();
}

void ExperimentRunner::set_remote_oracle(const std::string& host, int port) {
  remote_host_ = host;
  remote_port_ = port;
  state_.reset();
}

AttackOptions ExperimentRunner::attack_options() const {
  AttackOptions opts;
  opts.metric = config_.metric;
  opts.variant = config_.variant;
  opts.labeled_fraction = config_.labeled_fraction;
  opts.shadow_hidden_dims = config_.shadow_hidden_dims;
  opts.target_config = config_.target_config;
  opts.reference_config = config_.reference_config;
  opts.attack_config = config_.attack_config;
  return opts;
}

ExperimentRunner::SeedState& ExperimentRunner::state_for(uint64_t seed) {
  if (state_ && state_->seed == seed) return *state_;
  auto s = std::make_unique<SeedState>();
  s->seed = seed;
  s->labeled_ids = sample_labeled_nodes(target_, config_.labeled_fraction,
                                        derive_seed(seed, "labeled"));

  if (!remote_host_.empty()) {
    s->oracle = std::make_unique<RemoteOracle>(remote_host_, remote_port_);
  } else if (fixed_posteriors_) {
    s->oracle =
        std::make_unique<LocalOracle>(*fixed_posteriors_, config_.defense_k);
  } else {
    TrainConfig tc = config_.target_config;
    tc.seed = derive_seed(seed, "target");
    if (config_.target_model == "sage") {
      SageModel target = train_graphsage(target_, s->labeled_ids, tc);
      s->target_posteriors = sage_posteriors(target, target_.attributes);
    } else {
      GcnModel target = train_gcn(target_, s->labeled_ids, tc);
      s->target_posteriors = gcn_posteriors(target, target_.attributes);
    }
    s->oracle = std::make_unique<LocalOracle>(s->target_posteriors,
                                              config_.defense_k);
  }

  s->pairs = build_attack_pairs(target_.graph, derive_seed(seed, "pairs"));
  split_pairs(s->pairs, config_.train_fraction, derive_seed(seed, "split"));
  s->train = s->pairs.train_pairs();
  s->test = s->pairs.test_pairs();

  s->ctx.oracle = s->oracle.get();
  s->ctx.target_attrs = &target_.attributes;
  s->ctx.labeled_ids = s->labeled_ids;
  s->ctx.target_labels = &target_.labels;
  s->ctx.target_num_classes = target_.num_classes;
  s->ctx.pairs = &s->pairs;
  s->ctx.shadow = shadow_;

  state_ = std::move(s);
  return *state_;
}

ExperimentResult ExperimentRunner::make_result(
    int attack_id, uint64_t seed, const AttackScores& scores,
    const std::vector<AttackPair>& test, double runtime_s) const {
  std::vector<bool> truth;
  truth.reserve(test.size());
  for (const auto& p : test) truth.push_back(p.linked);

  ExperimentResult r;
  r.attack_id = attack_id;
  r.dataset = target_.name;
  // Only attacks that actually use the shadow dataset carry its name.
  const bool uses_shadow =
      attack_id >= 0 && knowledge_for_attack(attack_id).has_shadow;
  r.shadow = uses_shadow && shadow_ ? shadow_->name : "";
  r.seed = seed;
  r.auc_value = auc(scores.scores, truth);
  if (scores.hard_labels) {
    const Prf prf = precision_recall_f1(*scores.hard_labels, truth);
    r.precision = prf.precision;
    r.recall = prf.recall;
    r.f1 = prf.f1;
  }
  r.runtime_s = runtime_s;
  r.config_hash = config_hash(config_, attack_id, target_.name, r.shadow);
  r.extra["metric"] = metric_name(config_.metric);
  if (attack_id == 2)
    r.extra["variant"] = variant_name(resolve_attack2_variant(
        config_.variant, target_.attr_dim()));
  if (config_.defense_k > 0)
    r.extra["defense_k"] = std::to_string(config_.defense_k);
  if (!remote_host_.empty()) r.extra["oracle"] = "remote";
  r.extra["target_model"] = config_.target_model;
  return r;
}

AttackRun ExperimentRunner::run_attack_cell(int attack_id, uint64_t seed) {
  const KnowledgeTriplet knowledge = knowledge_for_attack(attack_id);
  if (knowledge.has_shadow && !shadow_)
    throw ConfigError("attack " + std::to_string(attack_id) +
                      " needs a shadow dataset");
  SeedState& s = state_for(seed);
  const auto t0 = std::chrono::steady_clock::now();
  AttackScores scores =
      run_attack(knowledge, s.ctx, s.test, seed, attack_options());
  AttackRun run;
  run.result =
      make_result(attack_id, seed, scores, s.test, seconds_since(t0));
  if (attack_id == 0 || attack_id == 2) {
    run.distances.reserve(scores.scores.size());
    for (double v : scores.scores) run.distances.push_back(-v);
  }
  run.test_truth.reserve(s.test.size());
  for (const auto& p : s.test) run.test_truth.push_back(p.linked);
  return run;
}

AttackRun ExperimentRunner::run_baseline_cell(uint64_t seed) {
  SeedState& s = state_for(seed);
  const auto t0 = std::chrono::steady_clock::now();
  const PartialGraph partial = s.pairs.train_partial_graph();
  TrainConfig cfg = config_.attack_config;
  AttackScores scores = baseline_link_prediction(
      partial, s.train, s.test, target_.node_count(), seed, cfg);
  AttackRun run;
  run.result = make_result(-1, seed, scores, s.test, seconds_since(t0));
  run.result.extra["baseline"] = "link-prediction";
  run.test_truth.reserve(s.test.size());
  for (const auto& p : s.test) run.test_truth.push_back(p.linked);
  return run;
}

AttackRun ExperimentRunner::run_ablation_cell(
    int attack_id, const std::set<FeatureBlock>& keep, uint64_t seed) {
  const KnowledgeTriplet knowledge = knowledge_for_attack(attack_id);
  if (knowledge.has_shadow && !shadow_)
    throw ConfigError("attack " + std::to_string(attack_id) +
                      " needs a shadow dataset");
  SeedState& s = state_for(seed);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult partial =
      ablate(attack_id, s.ctx, s.test, keep, seed, attack_options());
  AttackRun run;
  // ablate() computes the metrics; merge in the experiment bookkeeping.
  run.result = partial;
  run.result.dataset = target_.name;
  run.result.shadow = shadow_ ? shadow_->name : "";
  run.result.runtime_s = seconds_since(t0);
  run.result.config_hash =
      config_hash(config_, attack_id, target_.name, run.result.shadow) +
      ":" + partial.extra.at("ablation_keep");
  run.result.extra["metric"] = metric_name(config_.metric);
  run.test_truth.reserve(s.test.size());
  for (const auto& p : s.test) run.test_truth.push_back(p.linked);
  return run;
}

}  // namespace linktheft
