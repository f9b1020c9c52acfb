#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "linktheft/dataset.hpp"
#include "linktheft/eval.hpp"
#include "linktheft/models.hpp"
#include "linktheft/toy.hpp"
#include "test_util.hpp"

#ifndef LINKTHEFT_CLI
#error "LINKTHEFT_CLI must point at the built binary"
#endif

using namespace linktheft;

namespace {

int run_cli(const std::string& args, const std::string& log_path = "") {
  std::string cmd = std::string(LINKTHEFT_CLI) + " " + args;
  if (!log_path.empty()) cmd += " > " + log_path + " 2>&1";
  else cmd += " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string make_planted_bundle(const testutil::TempDir& dir,
                                const std::string& name, int communities,
                                uint64_t seed) {
  Dataset ds = planted_partition_dataset({.communities = communities,
                                          .community_size = 16,
                                          .p_in = 0.45,
                                          .p_out = 0.03,
                                          .seed = seed});
  ds.name = name;
  const std::string path = dir.file(name);
  write_bundle(ds, path);
  return path;
}

}  // namespace

TEST_CASE("cli train writes reloadable, reproducible checkpoints") {
  testutil::TempDir dir("cli_train");
  const std::string bundle = make_planted_bundle(dir, "plant", 3, 44);

  REQUIRE(run_cli("train --data " + bundle + " --out " + dir.file("run1") +
                  " --seed 7 --labeled-fraction 0.25 --epochs 20") == 0);
  const std::string ckpt = dir.file("run1") + "/target_gcn_seed7.json";
  LoadedCheckpoint ck = load_checkpoint(ckpt);
  CHECK(ck.type == "gcn");

  // The checkpoint predicts exactly like the freshly loaded model.
  Dataset ds = load_bundle(bundle);
  attach_graph(ck.gcn, ds.graph);
  Matrix p = gcn_posteriors(ck.gcn, ds.attributes);
  CHECK(p.rows == ds.node_count());

  // Same seed -> identical checkpoint bytes.
  REQUIRE(run_cli("train --data " + bundle + " --out " + dir.file("run2") +
                  " --seed 7 --labeled-fraction 0.25 --epochs 20") == 0);
  CHECK(slurp(ckpt) == slurp(dir.file("run2") + "/target_gcn_seed7.json"));
}

TEST_CASE("cli train validates inputs before training") {
  testutil::TempDir dir("cli_missing");
  const std::string bundle = make_planted_bundle(dir, "plant", 3, 45);
  std::filesystem::remove(bundle + "/attrs.csv");
  CHECK(run_cli("train --data " + bundle + " --out " + dir.file("out") +
                " --seed 1") == 2);
}

TEST_CASE("cli attack with --attack all emits all eight result groups") {
  testutil::TempDir dir("cli_attack");
  const std::string target = make_planted_bundle(dir, "target", 3, 46);
  const std::string shadow = make_planted_bundle(dir, "shadow", 4, 47);
  const std::string out = dir.file("results");

  REQUIRE(run_cli("attack --data " + target + " --shadow " + shadow +
                  " --attack all --seeds 1,2 --labeled-fraction 0.25 "
                  "--epochs 15 --jobs 2 --defense-k 2 --out " +
                  out) == 0);
  auto rows = read_results_jsonl(out + "/results.jsonl");
  std::set<int> attacks;
  for (const auto& r : rows) {
    attacks.insert(r.attack_id);
    CHECK(r.extra.at("defense_k") == "2");
    CHECK(!r.config_hash.empty());
  }
  CHECK(attacks == std::set<int>{0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(rows.size() == 16);  // 8 attacks x 2 seeds
  CHECK(std::filesystem::exists(out + "/aggregate.csv"));
}

TEST_CASE("cli attack reruns reproduce identical results") {
  testutil::TempDir dir("cli_repro");
  const std::string target = make_planted_bundle(dir, "target", 3, 48);

  const std::string flags = "attack --data " + target +
                            " --attack 0,3 --seeds 1,2 --labeled-fraction "
                            "0.25 --epochs 15 ";
  REQUIRE(run_cli(flags + "--out " + dir.file("a")) == 0);
  REQUIRE(run_cli(flags + "--out " + dir.file("b")) == 0);

  auto a = read_results_jsonl(dir.file("a") + "/results.jsonl");
  auto b = read_results_jsonl(dir.file("b") + "/results.jsonl");
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    // Identical up to wall-clock runtime.
    a[i].runtime_s = b[i].runtime_s = 0.0;
    CHECK(to_json_line(a[i]) == to_json_line(b[i]));
  }
}

TEST_CASE("cli report") {
  testutil::TempDir dir("cli_report");

  SUBCASE("empty results directory is an error") {
    std::filesystem::create_directories(dir.file("empty"));
    std::string log = dir.file("log.txt");
    CHECK(run_cli("report --results " + dir.file("empty"), log) == 3);
    CHECK(slurp(log).find("no results") != std::string::npos);
  }
  SUBCASE("transfer grid leaves the diagonal blank") {
    const std::string target = make_planted_bundle(dir, "alpha", 3, 49);
    const std::string shadow = make_planted_bundle(dir, "beta", 3, 50);
    const std::string out = dir.file("res");
    REQUIRE(run_cli("attack --data " + target + " --shadow " + shadow +
                    " --attack 1 --seeds 1 --labeled-fraction 0.25 "
                    "--epochs 10 --out " +
                    out) == 0);
    // Add the reverse direction into the same results file.
    REQUIRE(run_cli("attack --data " + shadow + " --shadow " + target +
                    " --attack 1 --seeds 1 --labeled-fraction 0.25 "
                    "--epochs 10 --out " +
                    dir.file("res2")) == 0);
    std::filesystem::copy_file(dir.file("res2") + "/results.jsonl",
                               out + "/results2.jsonl");
    REQUIRE(run_cli("report --results " + out + " --out " + dir.file("rep")) ==
            0);
    const std::string grid = slurp(dir.file("rep") + "/grid_attack1.csv");
    std::istringstream lines(grid);
    std::string header, row_alpha, row_beta;
    std::getline(lines, header);
    std::getline(lines, row_alpha);
    std::getline(lines, row_beta);
    CHECK(header == "target,alpha,beta");
    // alpha row: blank diagonal cell then a value; beta row: value then blank.
    CHECK(row_alpha.substr(0, 7) == "alpha,,");
    CHECK(row_alpha.size() > 7);
    CHECK(row_beta.substr(0, 5) == "beta,");
    CHECK(row_beta.back() == ',');  // diagonal (last column) blank
    // Deterministic output.
    REQUIRE(run_cli("report --results " + out + " --out " + dir.file("rep2")) ==
            0);
    CHECK(slurp(dir.file("rep") + "/aggregate.csv") ==
          slurp(dir.file("rep2") + "/aggregate.csv"));
  }
  SUBCASE("unsupervised runs feed distance histograms and bin AUC tables") {
    const std::string target = make_planted_bundle(dir, "gamma", 3, 54);
    const std::string out = dir.file("unsup");
    REQUIRE(run_cli("attack --data " + target +
                    " --attack 0 --seeds 1,2 --labeled-fraction 0.25 "
                    "--epochs 15 --out " +
                    out) == 0);
    CHECK(std::filesystem::exists(out +
                                  "/details/attack0_distances_gamma_seed1.csv"));
    REQUIRE(run_cli("report --results " + out + " --out " + dir.file("urep")) ==
            0);
    const std::string hist = slurp(dir.file("urep") +
                                   "/distance_histogram_gamma.csv");
    CHECK(hist.find("bin_lo,bin_hi,positive_pairs,negative_pairs") == 0);
    CHECK(std::count(hist.begin(), hist.end(), '\n') > 1);
    const std::string bins = slurp(dir.file("urep") +
                                   "/distance_bin_auc_gamma.csv");
    CHECK(bins.find("bin_lo,bin_hi,auc,defined") == 0);
  }
}

TEST_CASE("cli option precedence: flags > config file > environment") {
  testutil::TempDir dir("cli_prec");
  const std::string bundle = make_planted_bundle(dir, "plant", 3, 53);
  const std::string common = " --data " + bundle +
                             " --labeled-fraction 0.25 --epochs 5";

  // Environment alone.
  std::string cmd = "LINKTHEFT_SEED=3 " + std::string(LINKTHEFT_CLI) +
                    " train" + common + " --out " + dir.file("env") +
                    " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(std::filesystem::exists(dir.file("env") + "/target_gcn_seed3.json"));

  // Config file overrides the environment.
  testutil::write_file(dir.file("cfg.json"), "{\"seed\": \"5\"}\n");
  cmd = "LINKTHEFT_SEED=3 " + std::string(LINKTHEFT_CLI) + " train" + common +
        " --config " + dir.file("cfg.json") + " --out " + dir.file("file") +
        " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(std::filesystem::exists(dir.file("file") + "/target_gcn_seed5.json"));

  // Explicit flag overrides both.
  cmd = "LINKTHEFT_SEED=3 " + std::string(LINKTHEFT_CLI) + " train" + common +
        " --config " + dir.file("cfg.json") + " --seed 7 --out " +
        dir.file("flag") + " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(std::filesystem::exists(dir.file("flag") + "/target_gcn_seed7.json"));
}

TEST_CASE("cli serve --stdio answers the wire protocol") {
  testutil::TempDir dir("cli_serve");
  const std::string bundle = make_planted_bundle(dir, "plant", 3, 51);
  REQUIRE(run_cli("train --data " + bundle + " --out " + dir.file("m") +
                  " --seed 3 --labeled-fraction 0.25 --epochs 10") == 0);
  const std::string requests = dir.file("requests.txt");
  testutil::write_file(requests,
                       "{\"op\":\"meta\"}\n"
                       "{\"op\":\"query\",\"node\":0}\n"
                       "garbage\n");
  const std::string out = dir.file("replies.txt");
  const std::string cmd = std::string(LINKTHEFT_CLI) + " serve --stdio " +
                          "--checkpoint " + dir.file("m") +
                          "/target_gcn_seed3.json --data " + bundle + " < " +
                          requests + " > " + out + " 2>/dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  std::istringstream lines(slurp(out));
  std::string meta, query, parse_error;
  std::getline(lines, meta);
  std::getline(lines, query);
  std::getline(lines, parse_error);
  CHECK(meta.find("\"num_classes\":3") != std::string::npos);
  CHECK(meta.find("\"node_count\":48") != std::string::npos);
  CHECK(query.find("\"posteriors\"") != std::string::npos);
  CHECK(parse_error == R"({"ok":false,"error":"parse"})");
}

TEST_CASE("cli attack against a served oracle matches the local path") {
  testutil::TempDir dir("cli_oracle");
  const std::string bundle = make_planted_bundle(dir, "plant", 3, 52);
  REQUIRE(run_cli("train --data " + bundle + " --out " + dir.file("m") +
                  " --seed 3 --labeled-fraction 0.25 --epochs 15") == 0);
  const std::string ckpt = dir.file("m") + "/target_gcn_seed3.json";

  // Local path: fixed checkpoint.
  REQUIRE(run_cli("attack --data " + bundle + " --checkpoint " + ckpt +
                  " --attack 0,3 --seeds 1,2 --labeled-fraction 0.25 "
                  "--out " +
                  dir.file("local")) == 0);

  // Remote path: serve the same checkpoint, then attack over TCP.
  const std::string serve_log = dir.file("serve.log");
  const std::string serve_cmd =
      std::string(LINKTHEFT_CLI) + " serve --checkpoint " + ckpt + " --data " +
      bundle + " --port 0 > " + serve_log + " 2>&1 & echo $! > " +
      dir.file("pid");
  REQUIRE(std::system(serve_cmd.c_str()) == 0);
  int port = 0;
  for (int tries = 0; tries < 100 && port == 0; ++tries) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    const std::string log = slurp(serve_log);
    const auto pos = log.find("on port ");
    if (pos != std::string::npos) port = std::stoi(log.substr(pos + 8));
  }
  REQUIRE(port > 0);
  const int rc = run_cli("attack --data " + bundle +
                         " --oracle tcp://127.0.0.1:" + std::to_string(port) +
                         " --attack 0,3 --seeds 1,2 --labeled-fraction 0.25 "
                         "--out " +
                         dir.file("remote"));
  [[maybe_unused]] int killed =
      std::system(("kill $(cat " + dir.file("pid") + ") 2>/dev/null").c_str());
  REQUIRE(rc == 0);

  auto local = read_results_jsonl(dir.file("local") + "/results.jsonl");
  auto remote = read_results_jsonl(dir.file("remote") + "/results.jsonl");
  REQUIRE(local.size() == remote.size());
  for (size_t i = 0; i < local.size(); ++i) {
    CHECK(local[i].attack_id == remote[i].attack_id);
    CHECK(std::abs(local[i].auc_value - remote[i].auc_value) <= 1e-6);
  }
}
