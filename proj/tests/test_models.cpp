#include <doctest.h>

#include <cmath>
#include <numeric>

#include "linktheft/attacks.hpp"
#include "linktheft/errors.hpp"
#include "linktheft/models.hpp"
#include "linktheft/toy.hpp"
#include "test_util.hpp"

using namespace linktheft;

namespace {

std::vector<int> all_ids(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

void check_rows_are_distributions(const Matrix& p) {
  for (int i = 0; i < p.rows; ++i) {
    double sum = 0.0;
    for (int j = 0; j < p.cols; ++j) {
      CHECK(p.at(i, j) >= 0.0);
      sum += p.at(i, j);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TrainConfig toy_config(int epochs, uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.learning_rate = 0.01;
  cfg.dropout_rate = 0.5;
  cfg.hidden_dims = {16};
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("train_gcn") {
  Dataset ds = two_clique_dataset();
  const std::vector<int> labeled{0, 4};  // one per component

  SUBCASE("epochs=0 returns an initialized model with valid posteriors") {
    GcnModel m = train_gcn(ds, labeled, toy_config(0, 1));
    check_rows_are_distributions(gcn_posteriors(m, ds.attributes));
  }
  SUBCASE("two-clique toy reaches train accuracy 1.0") {
    GcnModel m = train_gcn(ds, labeled, toy_config(100, 1));
    Matrix p = gcn_posteriors(m, ds.attributes);
    CHECK(accuracy(p, labeled, ds.labels) == 1.0);
    // The separable construction classifies every node, not just labeled ones.
    CHECK(accuracy(p, all_ids(8), ds.labels) == 1.0);
    CHECK(m.loss_history.back() <= m.loss_history.front());
  }
  SUBCASE("same seed twice gives identical final weights") {
    GcnModel a = train_gcn(ds, labeled, toy_config(30, 7));
    GcnModel b = train_gcn(ds, labeled, toy_config(30, 7));
    REQUIRE(a.weights.size() == b.weights.size());
    for (size_t k = 0; k < a.weights.size(); ++k)
      CHECK(a.weights[k].data == b.weights[k].data);  // bitwise
    GcnModel c = train_gcn(ds, labeled, toy_config(30, 8));
    CHECK(a.weights[0].data != c.weights[0].data);
  }
  SUBCASE("absurd learning rate raises a training error with an epoch") {
    TrainConfig cfg = toy_config(20, 1);
    cfg.learning_rate = 1e200;
    CHECK_THROWS_AS(train_gcn(ds, labeled, cfg), TrainingError);
  }
  SUBCASE("empty labeled set is a configuration error") {
    CHECK_THROWS_AS(train_gcn(ds, {}, toy_config(1, 1)), ConfigError);
  }
}

TEST_CASE("gcn 2-hop influence on a path of length 6") {
  Dataset ds = path_dataset(6);
  GcnModel m = train_gcn(ds, all_ids(6), toy_config(5, 3));

  auto posterior_of_0 = [&](const Matrix& attrs) {
    Matrix p = gcn_posteriors(m, attrs);
    return std::vector<double>(p.row(0).begin(), p.row(0).end());
  };
  const auto base = posterior_of_0(ds.attributes);

  Matrix bumped2 = ds.attributes;  // node 2 is two hops from node 0
  for (int j = 0; j < bumped2.cols; ++j) bumped2.at(2, j) += 1.5;
  CHECK(posterior_of_0(bumped2) != base);

  Matrix bumped3 = ds.attributes;  // node 3 is three hops away
  for (int j = 0; j < bumped3.cols; ++j) bumped3.at(3, j) += 1.5;
  CHECK(posterior_of_0(bumped3) == base);  // outside the receptive field
}

TEST_CASE("train_graphsage") {
  SUBCASE("isolated node aggregates the zero vector and stays finite") {
    Dataset ds = two_clique_dataset();
    // Add an isolated ninth node.
    ds.graph.node_count = 9;
    Matrix attrs(9, 2);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 2; ++j) attrs.at(i, j) = ds.attributes.at(i, j);
    attrs.at(8, 0) = 1.0;
    ds.attributes = attrs;
    ds.labels.push_back(0);
    SageModel m = train_graphsage(ds, {0, 4}, toy_config(0, 2));
    Matrix p = sage_posteriors(m, ds.attributes);
    CHECK(p.all_finite());
    check_rows_are_distributions(p);
  }
  SUBCASE("two-clique toy reaches train accuracy 1.0") {
    Dataset ds = two_clique_dataset();
    SageModel m = train_graphsage(ds, {0, 4}, toy_config(100, 1));
    Matrix p = sage_posteriors(m, ds.attributes);
    CHECK(accuracy(p, all_ids(8), ds.labels) == 1.0);
  }
}

TEST_CASE("train_mlp") {
  SUBCASE("XOR with two hidden layers reaches accuracy 1.0 within 100 epochs") {
    Matrix x(4, 2);
    x.at(1, 1) = 1.0;
    x.at(2, 0) = 1.0;
    x.at(3, 0) = 1.0;
    x.at(3, 1) = 1.0;
    const std::vector<int> y{0, 1, 1, 0};
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.learning_rate = 0.05;
    cfg.dropout_rate = 0.0;
    cfg.hidden_dims = {16, 16};
    cfg.seed = 5;
    MlpModel m = train_mlp(x, all_ids(4), y, 2, cfg);
    CHECK(accuracy(mlp_posteriors(m, x), all_ids(4), y) == 1.0);
  }
  SUBCASE("epochs=0 yields valid distributions") {
    Matrix x(3, 4, 0.5);
    MlpModel m = train_mlp(x, all_ids(3), {0, 1, 0}, 2, toy_config(0, 1));
    check_rows_are_distributions(mlp_posteriors(m, x));
  }
  SUBCASE("single-class labels drive the loss toward zero") {
    Matrix x(4, 3);
    for (int i = 0; i < 4; ++i) x.at(i, i % 3) = 1.0;
    TrainConfig cfg = toy_config(200, 2);
    cfg.dropout_rate = 0.0;
    cfg.learning_rate = 0.05;
    MlpModel m = train_mlp(x, all_ids(4), {1, 1, 1, 1}, 2, cfg);
    CHECK(m.loss_history.back() < 0.01);
    Matrix p = mlp_posteriors(m, x);
    for (int i = 0; i < 4; ++i) CHECK(p.at(i, 1) > p.at(i, 0));
  }
}

TEST_CASE("predict") {
  Dataset ds = two_clique_dataset();
  GcnModel m = train_gcn(ds, {0, 4}, toy_config(60, 4));

  SUBCASE("posterior rows are distributions") {
    for (int node : {0, 3, 7}) {
      auto p = predict(m, ds.attributes, node);
      double sum = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
  SUBCASE("zero final layer gives exactly the uniform posterior") {
    GcnModel blank = train_gcn(ds, {0, 4}, toy_config(0, 4));
    for (double& v : blank.weights.back().data) v = 0.0;
    auto p = predict(blank, ds.attributes, 3);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
  }
  SUBCASE("argmax matches the component on the separable toy") {
    Matrix p = gcn_posteriors(m, ds.attributes);
    CHECK(accuracy(p, all_ids(8), ds.labels) == 1.0);
  }
  SUBCASE("unknown node id raises") {
    CHECK_THROWS_AS(predict(m, ds.attributes, 8), OracleError);
    CHECK_THROWS_AS(predict(m, ds.attributes, -1), OracleError);
  }
}

TEST_CASE("topk_truncate") {
  SUBCASE("k = num_classes leaves the vector unchanged") {
    const std::vector<double> p{0.2, 0.5, 0.3};
    auto t = topk_truncate(p, 3);
    for (int i = 0; i < 3; ++i) CHECK(t[i] == doctest::Approx(p[i]));
  }
  SUBCASE("hand renormalization of the top 2") {
    auto t = topk_truncate({0.5, 0.3, 0.2}, 2);
    CHECK(t[0] == doctest::Approx(0.625));
    CHECK(t[1] == doctest::Approx(0.375));
    CHECK(t[2] == 0.0);
  }
  SUBCASE("ties break toward the lower index") {
    auto t = topk_truncate({0.4, 0.4, 0.2}, 1);
    CHECK(t[0] == 1.0);
    CHECK(t[1] == 0.0);
    CHECK(t[2] == 0.0);
  }
  SUBCASE("idempotent for a fixed k") {
    const std::vector<double> p{0.15, 0.4, 0.05, 0.25, 0.15};
    auto once = topk_truncate(p, 3);
    auto twice = topk_truncate(once, 3);
    CHECK(once == twice);
  }
  SUBCASE("k out of range") {
    CHECK_THROWS_AS(topk_truncate({0.5, 0.5}, 0), ConfigError);
    CHECK_THROWS_AS(topk_truncate({0.5, 0.5}, 3), ConfigError);
  }
}

TEST_CASE("gradient checks pass at 1e-4 for all trainable models") {
  Dataset ds = two_clique_dataset();
  const std::vector<int> labeled = all_ids(8);

  SUBCASE("gcn") {
    GcnModel m = train_gcn(ds, labeled, toy_config(3, 6));
    auto loss = [&] {
      return gcn_loss_grads(m, ds.attributes, labeled, ds.labels).loss;
    };
    auto analytic = [&] {
      return gcn_loss_grads(m, ds.attributes, labeled, ds.labels).grads;
    };
    std::vector<Matrix*> params;
    for (auto& w : m.weights) params.push_back(&w);
    auto report = gradient_check(loss, analytic, params, 1e-4);
    CHECK(report.pass);
  }
  SUBCASE("graphsage") {
    SageModel m = train_graphsage(ds, labeled, toy_config(3, 6));
    auto loss = [&] {
      return sage_loss_grads(m, ds.attributes, labeled, ds.labels).loss;
    };
    auto analytic = [&] {
      return sage_loss_grads(m, ds.attributes, labeled, ds.labels).grads;
    };
    std::vector<Matrix*> params;
    for (auto& w : m.weights) params.push_back(&w);
    auto report = gradient_check(loss, analytic, params, 1e-4);
    CHECK(report.pass);
  }
  SUBCASE("mlp with biases") {
    Matrix x(4, 3);
    Rng rng(2);
    for (double& v : x.data) v = rng.uniform(-1, 1);
    const std::vector<int> y{0, 1, 1, 0};
    TrainConfig cfg = toy_config(3, 6);
    cfg.hidden_dims = {5, 4};
    MlpModel m = train_mlp(x, all_ids(4), y, 2, cfg);
    auto loss = [&] { return mlp_loss_grads(m, x, all_ids(4), y).loss; };
    auto analytic = [&] { return mlp_loss_grads(m, x, all_ids(4), y).grads; };
    std::vector<Matrix*> params;
    for (auto& w : m.weights) params.push_back(&w);
    for (auto& b : m.biases) params.push_back(&b);
    auto report = gradient_check(loss, analytic, params, 1e-4);
    CHECK(report.pass);
  }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  Dataset ds = two_clique_dataset();
  testutil::TempDir dir("ckpt");

  SUBCASE("gcn") {
    GcnModel m = train_gcn(ds, {0, 4}, toy_config(25, 9));
    const std::string path = dir.file("gcn.json");
    save_checkpoint(path, m, ds.name);
    LoadedCheckpoint ck = load_checkpoint(path);
    REQUIRE(ck.type == "gcn");
    REQUIRE(ck.gcn.weights.size() == m.weights.size());
    for (size_t k = 0; k < m.weights.size(); ++k)
      CHECK(ck.gcn.weights[k].data == m.weights[k].data);
    attach_graph(ck.gcn, ds.graph);
    Matrix a = gcn_posteriors(m, ds.attributes);
    Matrix b = gcn_posteriors(ck.gcn, ds.attributes);
    CHECK(a.data == b.data);
    // Saving again produces identical bytes.
    const std::string path2 = dir.file("gcn2.json");
    save_checkpoint(path2, m, ds.name);
    std::ifstream f1(path), f2(path2);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
  }
  SUBCASE("mlp") {
    Matrix x(4, 3, 0.25);
    MlpModel m = train_mlp(x, all_ids(4), {0, 1, 0, 1}, 2, toy_config(10, 3));
    const std::string path = dir.file("mlp.json");
    save_checkpoint(path, m, "toy");
    LoadedCheckpoint ck = load_checkpoint(path);
    REQUIRE(ck.type == "mlp");
    Matrix a = mlp_posteriors(m, x);
    Matrix b = mlp_posteriors(ck.mlp, x);
    CHECK(a.data == b.data);
  }
  SUBCASE("sage") {
    SageModel m = train_graphsage(ds, {0, 4}, toy_config(10, 3));
    const std::string path = dir.file("sage.json");
    save_checkpoint(path, m, ds.name);
    LoadedCheckpoint ck = load_checkpoint(path);
    REQUIRE(ck.type == "sage");
    attach_graph(ck.sage, ds.graph);
    CHECK(sage_posteriors(m, ds.attributes).data ==
          sage_posteriors(ck.sage, ds.attributes).data);
  }
}
