#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "linktheft/errors.hpp"
#include "linktheft/eval.hpp"

namespace fs = std::filesystem;

namespace linktheft::cli {

namespace {

struct GroupKey {
  int attack_id;
  std::string dataset;
  std::string shadow;
  std::string ablation;
  auto operator<=>(const GroupKey&) const = default;
};

std::string fmt(double v) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string attack_label(int id) {
  return id < 0 ? "baseline-lp" : "attack-" + std::to_string(id);
}

}  // namespace

int cmd_report(const std::vector<std::string>& args) {
  CLI::App app{"render tables and plot-ready CSVs from attack results"};
  std::string results_dir, out, config_file;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--results", results_dir, "directory with results.jsonl")
      ->required();
  app.add_option("--out", out, "output directory (default: results dir)");

  static const std::vector<std::string> known{"results", "out"};
  take_last_wins(app);
  auto effective = resolve_args(args, known);
  std::reverse(effective.begin(), effective.end());  // CLI11 pops from the back
  try {
    app.parse(effective);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }
  if (out.empty()) out = results_dir;

  // Gather every jsonl in the results directory.
  std::vector<ExperimentResult> rows;
  if (fs::is_directory(results_dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(results_dir))
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto part = read_results_jsonl(f.string());
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }
  if (rows.empty()) throw Error("no results in " + results_dir);

  std::map<GroupKey, std::vector<ExperimentResult>> groups;
  for (const auto& r : rows) {
    GroupKey key{r.attack_id, r.dataset, r.shadow,
                 r.extra.count("ablation_keep") ? r.extra.at("ablation_keep")
                                                : ""};
    groups[key].push_back(r);
  }

  fs::create_directories(out);

  // Main aggregate table. aggregate() refuses mismatched config hashes, so
  // results from drifting configurations cannot be silently merged.
  {
    std::ofstream t(fs::path(out) / "aggregate.csv");
    t << "attack,dataset,shadow,ablation,n_seeds,auc_mean,auc_std,"
         "precision_mean,recall_mean,f1_mean\n";
    for (const auto& [key, group] : groups) {
      const AggregateResult agg = aggregate(group);
      t << attack_label(key.attack_id) << ',' << key.dataset << ','
        << key.shadow << ',' << key.ablation << ',' << agg.n_seeds << ','
        << fmt(agg.auc_stat.mean) << ',' << fmt(agg.auc_stat.stddev) << ','
        << (agg.precision_stat ? fmt(agg.precision_stat->mean) : "") << ','
        << (agg.recall_stat ? fmt(agg.recall_stat->mean) : "") << ','
        << (agg.f1_stat ? fmt(agg.f1_stat->mean) : "") << '\n';
    }
  }

  // Target x shadow AUC grids for the transferring attacks, diagonal blank.
  for (int attack_id : {1, 4, 5, 7}) {
    std::set<std::string> targets, shadows;
    std::map<std::pair<std::string, std::string>, AggregateResult> cells;
    for (const auto& [key, group] : groups) {
      if (key.attack_id != attack_id || key.shadow.empty() ||
          !key.ablation.empty())
        continue;
      targets.insert(key.dataset);
      shadows.insert(key.shadow);
      cells[{key.dataset, key.shadow}] = aggregate(group);
    }
    if (cells.empty()) continue;
    std::ofstream grid(fs::path(out) /
                       ("grid_attack" + std::to_string(attack_id) + ".csv"));
    grid << "target";
    for (const auto& s : shadows) grid << ',' << s;
    grid << '\n';
    for (const auto& t : targets) {
      grid << t;
      for (const auto& s : shadows) {
        grid << ',';
        if (t == s) continue;  // diagonal stays blank
        auto it = cells.find({t, s});
        if (it != cells.end())
          grid << fmt(it->second.auc_stat.mean) << " +- "
               << fmt(it->second.auc_stat.stddev);
      }
      grid << '\n';
    }
  }

  // Bar-chart CSV: best mean AUC per (attack, dataset).
  {
    std::map<std::pair<std::string, int>, double> best;
    for (const auto& [key, group] : groups) {
      if (!key.ablation.empty()) continue;
      const double mean = aggregate(group).auc_stat.mean;
      auto k = std::make_pair(key.dataset, key.attack_id);
      auto it = best.find(k);
      if (it == best.end() || mean > it->second) best[k] = mean;
    }
    std::ofstream bars(fs::path(out) / "bars.csv");
    bars << "dataset,attack,best_auc_mean\n";
    for (const auto& [k, v] : best)
      bars << k.first << ',' << attack_label(k.second) << ',' << fmt(v)
           << '\n';
  }

  // Distance histograms and per-bin AUC from the unsupervised attack details.
  const fs::path details = fs::path(results_dir) / "details";
  if (fs::is_directory(details)) {
    std::map<std::string, std::vector<std::pair<double, bool>>> by_dataset;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(details))
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      // attack<k>_distances_<dataset>_seed<s>.csv
      const std::string stem = f.stem().string();
      const auto pos = stem.find("_distances_");
      if (pos == std::string::npos) continue;
      std::string rest = stem.substr(pos + 11);
      const auto seed_pos = rest.rfind("_seed");
      if (seed_pos == std::string::npos) continue;
      const std::string dataset = rest.substr(0, seed_pos);
      std::ifstream in(f);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        by_dataset[dataset].emplace_back(std::stod(line.substr(0, comma)),
                                         line[comma + 1] == '1');
      }
    }
    for (const auto& [dataset, pairs] : by_dataset) {
      double max_d = 0.0;
      for (const auto& [d, linked] : pairs) max_d = std::max(max_d, d);
      const auto edges = default_bin_edges(max_d + 1e-9);
      std::vector<double> distances, scores;
      std::vector<bool> labels;
      for (const auto& [d, linked] : pairs) {
        distances.push_back(d);
        scores.push_back(-d);
        labels.push_back(linked);
      }
      const auto bins = distance_bin_analysis(distances, scores, labels, edges);
      std::ofstream hist(fs::path(out) /
                         ("distance_histogram_" + dataset + ".csv"));
      hist << "bin_lo,bin_hi,positive_pairs,negative_pairs\n";
      std::ofstream bin_auc(fs::path(out) /
                            ("distance_bin_auc_" + dataset + ".csv"));
      bin_auc << "bin_lo,bin_hi,auc,defined\n";
      for (const auto& b : bins) {
        if (b.positives + b.negatives == 0) continue;
        hist << b.lo << ',' << b.hi << ',' << b.positives << ','
             << b.negatives << '\n';
        bin_auc << b.lo << ',' << b.hi << ','
                << (b.defined ? fmt(b.auc_value) : "") << ','
                << (b.defined ? 1 : 0) << '\n';
      }
    }
  }

  std::cout << "report written to " << out << '\n';
  return kExitOk;
}

}  // namespace linktheft::cli
