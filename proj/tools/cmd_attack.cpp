#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "linktheft/errors.hpp"
#include "linktheft/experiment.hpp"
#include "linktheft/models.hpp"
#include "linktheft/oracle.hpp"

namespace fs = std::filesystem;

namespace linktheft::cli {

namespace {

struct CellOutput {
  ExperimentResult result;
  std::vector<double> distances;
  std::vector<bool> truth;
};

void write_results(const std::string& out_dir,
                   std::vector<CellOutput> cells) {
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    const auto& x = a.result;
    const auto& y = b.result;
    return std::tie(x.attack_id, x.dataset, x.shadow, x.seed) <
           std::tie(y.attack_id, y.dataset, y.shadow, y.seed);
  });
  fs::create_directories(out_dir);
  const std::string results_path =
      (fs::path(out_dir) / "results.jsonl").string();
  {
    std::ofstream truncate(results_path, std::ios::trunc);
  }
  std::vector<ExperimentResult> rows;
  for (const auto& c : cells) rows.push_back(c.result);
  append_results_jsonl(results_path, rows);

  // Aggregate per (attack, dataset, shadow, ablation) group, in order.
  std::ofstream agg_out(fs::path(out_dir) / "aggregate.csv");
  agg_out << "attack,dataset,shadow,n_seeds,auc_mean,auc_std,precision_mean,"
             "precision_std,recall_mean,recall_std,f1_mean,f1_std\n";
  size_t i = 0;
  while (i < cells.size()) {
    size_t j = i;
    std::vector<ExperimentResult> group;
    while (j < cells.size() &&
           cells[j].result.config_hash == cells[i].result.config_hash) {
      group.push_back(cells[j].result);
      ++j;
    }
    const AggregateResult agg = aggregate(group);
    const auto& r = cells[i].result;
    agg_out << r.attack_id << ',' << r.dataset << ',' << r.shadow << ','
            << agg.n_seeds << ',' << agg.auc_stat.mean << ','
            << agg.auc_stat.stddev;
    auto emit = [&](const std::optional<Stat>& s) {
      if (s)
        agg_out << ',' << s->mean << ',' << s->stddev;
      else
        agg_out << ",,";
    };
    emit(agg.precision_stat);
    emit(agg.recall_stat);
    emit(agg.f1_stat);
    agg_out << '\n';
    i = j;
  }

  // Per-pair distances from the unsupervised attacks feed the report's
  // histogram and distance-bin tables.
  bool any_details = false;
  for (const auto& c : cells)
    any_details = any_details || !c.distances.empty();
  if (any_details) {
    fs::create_directories(fs::path(out_dir) / "details");
    for (const auto& c : cells) {
      if (c.distances.empty()) continue;
      const auto& r = c.result;
      std::ofstream d(fs::path(out_dir) / "details" /
                      ("attack" + std::to_string(r.attack_id) + "_distances_" +
                       r.dataset + "_seed" + std::to_string(r.seed) + ".csv"));
      d << "distance,linked\n";
      d.precision(17);
      for (size_t k = 0; k < c.distances.size(); ++k)
        d << c.distances[k] << ',' << (c.truth[k] ? 1 : 0) << '\n';
    }
  }
}

struct AttackJobSpec {
  ExperimentConfig config;
  std::vector<int> attacks;
  std::vector<uint64_t> seeds;
  int jobs = 1;
  std::optional<Matrix> fixed_posteriors;
  std::string remote_host;
  int remote_port = 0;
};

std::vector<CellOutput> run_attack_cells(const Dataset& target,
                                         const Dataset* shadow,
                                         const AttackJobSpec& spec) {
  std::vector<CellOutput> cells;
  std::mutex cells_mutex;
  std::atomic<size_t> next_seed{0};
  std::atomic<bool> failed{false};
  std::string failure;

  auto worker = [&] {
    for (;;) {
      const size_t idx = next_seed.fetch_add(1);
      if (idx >= spec.seeds.size() || failed.load()) return;
      const uint64_t seed = spec.seeds[idx];
      try {
        ExperimentRunner runner(target, spec.config);
        if (shadow) runner.set_shadow(shadow);
        if (spec.fixed_posteriors)
          runner.set_fixed_posteriors(*spec.fixed_posteriors);
        if (!spec.remote_host.empty())
          runner.set_remote_oracle(spec.remote_host, spec.remote_port);
        std::vector<CellOutput> local;
        for (int attack_id : spec.attacks) {
          AttackRun run = runner.run_attack_cell(attack_id, seed);
          local.push_back({std::move(run.result), std::move(run.distances),
                           std::move(run.test_truth)});
        }
        std::lock_guard<std::mutex> lock(cells_mutex);
        for (auto& c : local) cells.push_back(std::move(c));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(cells_mutex);
        failed.store(true);
        failure = e.what();
        return;
      }
    }
  };

  const int jobs = std::max(
      1, std::min<int>(spec.jobs, static_cast<int>(spec.seeds.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) throw Error(failure);
  return cells;
}

}  // namespace

int cmd_attack(const std::vector<std::string>& args) {
  CLI::App app{"run link stealing attacks"};
  std::string data, shadow_dir, out, config_file;
  std::string attack_csv = "all", seeds_csv = "1,2,3,4,5", seed_single;
  std::string metric = "correlation", variant = "auto", oracle_url, checkpoint;
  std::string model = "gcn";
  int defense_k = 0, shadow_layers = 2, jobs = 1;
  double labeled_fraction = 0.1, train_fraction = 0.5;
  ModelFlagValues mf;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--data", data, "target dataset bundle")->required();
  app.add_option("--shadow", shadow_dir, "shadow dataset bundle");
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--attack", attack_csv, "attack ids (csv) or 'all'");
  app.add_option("--seeds", seeds_csv, "comma-separated run seeds");
  app.add_option("--seed", seed_single, "single run seed (overrides --seeds)");
  app.add_option("--defense-k", defense_k, "top-k defense on the oracle");
  app.add_option("--metric", metric, "distance metric for attacks 0/2");
  app.add_option("--variant", variant, "attack-2 information type");
  app.add_option("--oracle", oracle_url, "remote oracle, tcp://host:port");
  app.add_option("--checkpoint", checkpoint,
                 "fixed target checkpoint instead of per-seed training");
  app.add_option("--model", model, "target model: gcn | sage")
      ->check(CLI::IsMember({"gcn", "sage"}));
  app.add_option("--shadow-layers", shadow_layers,
                 "GCN layers of the shadow target model (2 = same as target)");
  app.add_option("--labeled-fraction", labeled_fraction, "");
  app.add_option("--train-fraction", train_fraction, "");
  app.add_option("--jobs", jobs, "parallel seed workers");
  app.add_option("--epochs", mf.epochs, "target training epochs");
  app.add_option("--lr", mf.learning_rate, "target learning rate");
  app.add_option("--dropout", mf.dropout, "dropout rate");
  app.add_option("--hidden", mf.hidden, "target hidden dims");

  static const std::vector<std::string> known{
      "data",   "shadow",         "out",     "attack",        "seeds",
      "seed",   "defense-k",      "metric",  "variant",       "oracle",
      "checkpoint", "model",      "shadow-layers", "labeled-fraction",
      "train-fraction", "jobs",   "epochs",  "lr",            "dropout",
      "hidden"};
  take_last_wins(app);
  auto effective = resolve_args(args, known);
  std::reverse(effective.begin(), effective.end());  // CLI11 pops from the back
  try {
    app.parse(effective);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }

  Dataset target = load_bundle_checked(data);
  std::optional<Dataset> shadow;
  if (!shadow_dir.empty()) shadow = load_bundle_checked(shadow_dir);

  std::vector<int> attacks = parse_attack_list(attack_csv);
  if (!shadow) {
    std::vector<int> runnable;
    for (int id : attacks) {
      if (knowledge_for_attack(id).has_shadow) {
        if (attack_csv != "all")
          throw ConfigError("attack " + std::to_string(id) +
                            " needs --shadow");
        std::cerr << "warning: skipping attack " << id
                  << " (no shadow dataset given)\n";
      } else {
        runnable.push_back(id);
      }
    }
    attacks = runnable;
    if (attacks.empty()) throw ConfigError("no runnable attacks selected");
  }

  AttackJobSpec spec;
  spec.attacks = attacks;
  spec.seeds = parse_seed_list(seed_single.empty() ? seeds_csv : seed_single);
  spec.jobs = jobs;
  spec.config.labeled_fraction = labeled_fraction;
  spec.config.train_fraction = train_fraction;
  spec.config.defense_k = defense_k;
  spec.config.target_model = model;
  if (auto m = metric_from_name(metric)) {
    spec.config.metric = *m;
  } else {
    throw ConfigError("unknown metric '" + metric + "'");
  }
  if (auto v = variant_from_name(variant)) {
    spec.config.variant = *v;
  } else {
    throw ConfigError("unknown variant '" + variant + "'");
  }
  if (shadow_layers < 2 || shadow_layers > 8)
    throw ConfigError("--shadow-layers must be in 2..8");
  spec.config.shadow_hidden_dims.assign(shadow_layers - 1, 16);
  apply_model_flags(spec.config, mf);

  if (!checkpoint.empty() && !oracle_url.empty())
    throw ConfigError("--checkpoint and --oracle are mutually exclusive");
  if (!checkpoint.empty()) {
    LoadedCheckpoint ck = load_checkpoint(checkpoint);
    if (ck.type == "gcn") {
      attach_graph(ck.gcn, target.graph);
      spec.fixed_posteriors = gcn_posteriors(ck.gcn, target.attributes);
    } else if (ck.type == "sage") {
      attach_graph(ck.sage, target.graph);
      spec.fixed_posteriors = sage_posteriors(ck.sage, target.attributes);
    } else {
      spec.fixed_posteriors = mlp_posteriors(ck.mlp, target.attributes);
    }
  }
  if (!oracle_url.empty()) {
    auto parsed = parse_oracle_url(oracle_url);
    if (!parsed) throw ConfigError("bad oracle url '" + oracle_url + "'");
    spec.remote_host = parsed->first;
    spec.remote_port = parsed->second;
  }

  auto cells =
      run_attack_cells(target, shadow ? &*shadow : nullptr, spec);
  write_results(out, std::move(cells));
  std::cout << "wrote " << (fs::path(out) / "results.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_baseline(const std::vector<std::string>& args) {
  CLI::App app{"link prediction baseline (common neighbors / jaccard / "
               "preferential attachment)"};
  std::string data, out, config_file, seeds_csv = "1,2,3,4,5", seed_single;
  double labeled_fraction = 0.1, train_fraction = 0.5;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--data", data, "target dataset bundle")->required();
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--seeds", seeds_csv, "comma-separated run seeds");
  app.add_option("--seed", seed_single, "single run seed");
  app.add_option("--labeled-fraction", labeled_fraction, "");
  app.add_option("--train-fraction", train_fraction, "");

  static const std::vector<std::string> known{
      "data", "out", "seeds", "seed", "labeled-fraction", "train-fraction"};
  take_last_wins(app);
  auto effective = resolve_args(args, known);
  std::reverse(effective.begin(), effective.end());  // CLI11 pops from the back
  try {
    app.parse(effective);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }

  Dataset target = load_bundle_checked(data);
  ExperimentConfig cfg;
  cfg.labeled_fraction = labeled_fraction;
  cfg.train_fraction = train_fraction;

  std::vector<CellOutput> cells;
  for (uint64_t seed :
       parse_seed_list(seed_single.empty() ? seeds_csv : seed_single)) {
    ExperimentRunner runner(target, cfg);
    AttackRun run = runner.run_baseline_cell(seed);
    cells.push_back({std::move(run.result), {}, std::move(run.test_truth)});
  }
  write_results(out, std::move(cells));
  std::cout << "wrote " << (fs::path(out) / "results.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_ablate(const std::vector<std::string>& args) {
  CLI::App app{"feature-group ablation for supervised attacks"};
  std::string data, shadow_dir, out, config_file, group_csv;
  std::string seeds_csv = "1,2,3,4,5", seed_single;
  int attack_id = 3;
  double labeled_fraction = 0.1, train_fraction = 0.5;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--data", data, "target dataset bundle")->required();
  app.add_option("--shadow", shadow_dir, "shadow dataset bundle");
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--attack", attack_id, "attack id with a feature schema")
      ->check(CLI::IsMember({1, 3, 4, 5, 6, 7}));
  app.add_option("--group", group_csv,
                 "feature blocks to keep, comma separated (empty = none)");
  app.add_option("--seeds", seeds_csv, "comma-separated run seeds");
  app.add_option("--seed", seed_single, "single run seed");
  app.add_option("--labeled-fraction", labeled_fraction, "");
  app.add_option("--train-fraction", train_fraction, "");

  static const std::vector<std::string> known{
      "data", "shadow", "out",    "attack",
      "group", "seeds", "seed",   "labeled-fraction",
      "train-fraction"};
  take_last_wins(app);
  auto effective = resolve_args(args, known);
  std::reverse(effective.begin(), effective.end());  // CLI11 pops from the back
  try {
    app.parse(effective);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }

  Dataset target = load_bundle_checked(data);
  std::optional<Dataset> shadow;
  if (!shadow_dir.empty()) shadow = load_bundle_checked(shadow_dir);

  std::set<FeatureBlock> keep;
  if (!group_csv.empty()) {
    std::stringstream ss(group_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      auto block = block_from_name(tok);
      if (!block) throw ConfigError("unknown feature block '" + tok + "'");
      keep.insert(*block);
    }
  }

  ExperimentConfig cfg;
  cfg.labeled_fraction = labeled_fraction;
  cfg.train_fraction = train_fraction;

  std::vector<CellOutput> cells;
  for (uint64_t seed :
       parse_seed_list(seed_single.empty() ? seeds_csv : seed_single)) {
    ExperimentRunner runner(target, cfg);
    if (shadow) runner.set_shadow(&*shadow);
    AttackRun run = runner.run_ablation_cell(attack_id, keep, seed);
    cells.push_back({std::move(run.result), {}, std::move(run.test_truth)});
  }
  write_results(out, std::move(cells));
  std::cout << "wrote " << (fs::path(out) / "results.jsonl").string() << '\n';
  return kExitOk;
}

}  // namespace linktheft::cli
