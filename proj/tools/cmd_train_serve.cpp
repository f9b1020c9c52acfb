#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "linktheft/errors.hpp"
#include "linktheft/models.hpp"
#include "linktheft/oracle.hpp"
#include "linktheft/pairs.hpp"
#include "linktheft/rng.hpp"

namespace fs = std::filesystem;

namespace linktheft::cli {

int cmd_train(const std::vector<std::string>& args) {
  CLI::App app{"train target (and optionally reference) models"};
  std::string data, out, model = "gcn", seeds_csv = "1,2,3,4,5", config_file;
  std::string seed_single;
  double labeled_fraction = 0.1;
  bool with_reference = false;
  ModelFlagValues mf;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--data", data, "dataset bundle directory")->required();
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--model", model, "target model: gcn | sage")
      ->check(CLI::IsMember({"gcn", "sage"}));
  app.add_option("--seeds", seeds_csv, "comma-separated run seeds");
  app.add_option("--seed", seed_single, "single run seed (overrides --seeds)");
  app.add_option("--labeled-fraction", labeled_fraction,
                 "fraction of nodes whose labels supervise training");
  app.add_flag("--reference", with_reference, "also train the reference MLP");
  app.add_option("--epochs", mf.epochs, "training epochs");
  app.add_option("--lr", mf.learning_rate, "learning rate");
  app.add_option("--dropout", mf.dropout, "dropout rate");
  app.add_option("--hidden", mf.hidden, "hidden dims, comma separated");

  static const std::vector<std::string> known{
      "data", "out",    "model",  "seeds",  "seed", "labeled-fraction",
      "epochs", "lr",   "dropout", "hidden"};
  take_last_wins(app);
  auto effective = resolve_args(args, known);
  std::reverse(effective.begin(), effective.end());  // CLI11 pops from the back
  try {
    app.parse(effective);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }

  Dataset ds = load_bundle_checked(data);
  ExperimentConfig cfg;
  cfg.labeled_fraction = labeled_fraction;
  cfg.target_model = model;
  apply_model_flags(cfg, mf);

  const auto seeds =
      parse_seed_list(seed_single.empty() ? seeds_csv : seed_single);
  fs::create_directories(out);

  nlohmann::json manifest{{"dataset", ds.name},
                          {"model", model},
                          {"seeds", seeds},
                          {"config_hash", config_hash(cfg, -1, ds.name, "")},
                          {"checkpoints", nlohmann::json::array()}};

  for (uint64_t seed : seeds) {
    const auto labeled = sample_labeled_nodes(ds, cfg.labeled_fraction,
                                              derive_seed(seed, "labeled"));
    TrainConfig tc = cfg.target_config;
    tc.seed = derive_seed(seed, "target");
    const std::string name =
        "target_" + model + "_seed" + std::to_string(seed) + ".json";
    const std::string path = (fs::path(out) / name).string();
    if (model == "sage") {
      SageModel m = train_graphsage(ds, labeled, tc);
      save_checkpoint(path, m, ds.name);
      std::cout << "trained sage seed " << seed << " final loss "
                << m.loss_history.back() << " -> " << path << '\n';
    } else {
      GcnModel m = train_gcn(ds, labeled, tc);
      save_checkpoint(path, m, ds.name);
      std::cout << "trained gcn seed " << seed << " final loss "
                << m.loss_history.back() << " -> " << path << '\n';
    }
    manifest["checkpoints"].push_back(name);

    if (with_reference) {
      TrainConfig rc = cfg.reference_config;
      rc.seed = derive_seed(seed, "reference");
      MlpModel g =
          train_mlp(ds.attributes, labeled, ds.labels, ds.num_classes, rc);
      const std::string rname =
          "reference_seed" + std::to_string(seed) + ".json";
      save_checkpoint((fs::path(out) / rname).string(), g, ds.name);
      manifest["checkpoints"].push_back(rname);
    }
  }
  std::ofstream mout(fs::path(out) / "manifest.json");
  mout << manifest.dump(2) << '\n';
  return kExitOk;
}

int cmd_serve(const std::vector<std::string>& args) {
  CLI::App app{"serve a model checkpoint as a black-box posterior oracle"};
  std::string checkpoint, data, config_file;
  int port = 0, defense_k = 0;
  bool stdio = false;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  app.add_option("--data", data, "dataset bundle directory")->required();
  app.add_option("--port", port, "TCP port (0 = ephemeral)");
  app.add_flag("--stdio", stdio, "serve on stdin/stdout instead of TCP");
  app.add_option("--defense-k", defense_k,
                 "top-k posterior truncation (0 = off)");

  static const std::vector<std::string> known{"checkpoint", "data", "port",
                                              "defense-k"};
  take_last_wins(app);
  auto effective = resolve_args(args, known);
  std::reverse(effective.begin(), effective.end());  // CLI11 pops from the back
  try {
    app.parse(effective);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }

  Dataset ds = load_bundle_checked(data);
  LoadedCheckpoint ck = load_checkpoint(checkpoint);
  Matrix posteriors;
  if (ck.type == "gcn") {
    attach_graph(ck.gcn, ds.graph);
    posteriors = gcn_posteriors(ck.gcn, ds.attributes);
  } else if (ck.type == "sage") {
    attach_graph(ck.sage, ds.graph);
    posteriors = sage_posteriors(ck.sage, ds.attributes);
  } else {
    posteriors = mlp_posteriors(ck.mlp, ds.attributes);
  }

  if (stdio) {
    serve_stdio(std::move(posteriors), defense_k, std::cin, std::cout);
    return kExitOk;
  }
  OracleServer server(std::move(posteriors), port, defense_k);
  server.start();
  std::cout << "serving " << ck.type << " oracle for '" << ds.name
            << "' on port " << server.port() << std::endl;
  for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
}

}  // namespace linktheft::cli
