#include <doctest.h>

#include <cmath>

#include "linktheft/errors.hpp"
#include "linktheft/graph.hpp"
#include "linktheft/matrix.hpp"
#include "linktheft/nn.hpp"
#include "linktheft/rng.hpp"

using namespace linktheft;

TEST_CASE("normalized_adjacency") {
  SUBCASE("single node") {
    Graph g = Graph::from_edges(1, {});
    Matrix n = normalized_adjacency(g);
    REQUIRE(n.rows == 1);
    CHECK(n.at(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("single edge: hand evaluation with degree matrix diag(2,2)") {
    Graph g = Graph::from_edges(2, {{0, 1}});
    Matrix n = normalized_adjacency(g);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(n.at(i, j) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("isolated node stays a unit block") {
    Graph g = Graph::from_edges(3, {{0, 1}});
    Matrix n = normalized_adjacency(g);
    CHECK(n.at(0, 0) == doctest::Approx(0.5));
    CHECK(n.at(0, 1) == doctest::Approx(0.5));
    CHECK(n.at(0, 2) == 0.0);
    CHECK(n.at(2, 2) == doctest::Approx(1.0));
    CHECK(n.at(2, 0) == 0.0);
  }
  SUBCASE("bitwise symmetric and entries in [0,1] on random graphs") {
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 8 + static_cast<int>(rng.below(20));
      std::vector<std::pair<int, int>> edges;
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
          if (rng.next_double() < 0.2) edges.emplace_back(u, v);
      Matrix m = normalized_adjacency(Graph::from_edges(n, edges));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          CHECK(m.at(i, j) == m.at(j, i));  // exact
          CHECK(m.at(i, j) >= 0.0);
          CHECK(m.at(i, j) <= 1.0);
        }
    }
  }
  SUBCASE("sparse path agrees with the dense operator") {
    Rng rng(23);
    const int n = 15;
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng.next_double() < 0.3) edges.emplace_back(u, v);
    Graph g = Graph::from_edges(n, edges);
    Matrix dense = normalized_adjacency(g);
    Csr sparse = normalized_adjacency_csr(g);
    Matrix h(n, 4);
    for (double& v : h.data) v = rng.uniform(-1, 1);
    Matrix a = matmul(dense, h);
    Matrix b = spmm(sparse, h);
    for (size_t i = 0; i < a.data.size(); ++i)
      CHECK(std::abs(a.data[i] - b.data[i]) <= 1e-10);
  }
}

TEST_CASE("row_softmax") {
  SUBCASE("uniform logits") {
    Matrix m(1, 2);
    Matrix p = row_softmax(m);
    CHECK(p.at(0, 0) == doctest::Approx(0.5));
    CHECK(p.at(0, 1) == doctest::Approx(0.5));
  }
  SUBCASE("large logits do not overflow") {
    Matrix m(1, 2);
    m.at(0, 0) = 1000.0;
    Matrix p = row_softmax(m);
    CHECK(p.at(0, 0) == doctest::Approx(1.0));
    CHECK(p.at(0, 1) == doctest::Approx(0.0));
    CHECK(std::isfinite(p.at(0, 0)));
  }
  SUBCASE("closed form e^x normalization") {
    Matrix m(1, 2);
    m.at(0, 0) = std::log(1.0);
    m.at(0, 1) = std::log(3.0);
    Matrix p = row_softmax(m);
    CHECK(p.at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p.at(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("rows sum to 1 for random finite inputs") {
    Rng rng(3);
    Matrix m(20, 7);
    for (double& v : m.data) v = rng.uniform(-50, 50);
    Matrix p = row_softmax(m);
    for (int i = 0; i < p.rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < p.cols; ++j) s += p.at(i, j);
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("relu and dropout") {
  Matrix m(1, 2);
  m.at(0, 0) = -1.0;
  m.at(0, 1) = 2.0;
  Matrix r = relu(m);
  CHECK(r.at(0, 0) == 0.0);
  CHECK(r.at(0, 1) == 2.0);

  Rng rng(1);
  SUBCASE("rate 0 is the identity") {
    Matrix d = dropout(m, 0.0, rng, true);
    CHECK(d.data == m.data);
  }
  SUBCASE("eval mode is the identity") {
    Matrix d = dropout(m, 0.5, rng, false);
    CHECK(d.data == m.data);
  }
  SUBCASE("training mode zeroes or scales by 1/(1-rate)") {
    Matrix big(1, 1000, 1.0);
    Matrix mask;
    Matrix d = dropout(big, 0.5, rng, true, &mask);
    int zeros = 0;
    for (int j = 0; j < 1000; ++j) {
      const double v = d.at(0, j);
      CHECK((v == 0.0 || v == doctest::Approx(2.0)));
      zeros += v == 0.0;
    }
    // Survivor fraction concentrates near the keep rate.
    CHECK(zeros > 400);
    CHECK(zeros < 600);
    CHECK(mask.data.size() == big.data.size());
  }
}

TEST_CASE("cross_entropy") {
  SUBCASE("uniform posterior on the true class costs ln 2") {
    Matrix p(1, 2, 0.5);
    CHECK(cross_entropy(p, {0}, {0}) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("one-hot posterior on the true class costs 0") {
    Matrix p(1, 2);
    p.at(0, 0) = 1.0;
    CHECK(cross_entropy(p, {0}, {0}) == doctest::Approx(0.0));
  }
  SUBCASE("mean of equal terms: hand arithmetic") {
    Matrix p(2, 2);
    p.at(0, 0) = 0.25;
    p.at(0, 1) = 0.75;
    p.at(1, 0) = 0.75;
    p.at(1, 1) = 0.25;
    const double loss = cross_entropy(p, {0, 1}, {1, 0});
    CHECK(loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
    CHECK(loss == doctest::Approx(0.2876820724).epsilon(1e-8));
  }
  SUBCASE("empty labeled set is a configuration error") {
    Matrix p(1, 2, 0.5);
    CHECK_THROWS_AS(cross_entropy(p, {}, {}), ConfigError);
  }
}

TEST_CASE("adam_step") {
  SUBCASE("zero gradient leaves the parameter unchanged") {
    Matrix w(2, 2, 1.0);
    Matrix g(2, 2, 0.0);
    AdamState s = AdamState::like(w);
    Matrix before = w;
    adam_step(w, g, s, 0.01);
    CHECK(w.data == before.data);
    CHECK(s.step_count == 1);
  }
  SUBCASE("first step moves by about lr in the gradient direction") {
    // Closed form: lr * g / (|g| + eps), so |delta| is in [0.0099, 0.01].
    for (double g0 : {0.5, -2.0, 1e-3}) {
      Matrix w(1, 1, 3.0);
      Matrix g(1, 1, g0);
      AdamState s = AdamState::like(w);
      adam_step(w, g, s, 0.01);
      const double delta = w.at(0, 0) - 3.0;
      CHECK(std::abs(delta) >= 0.0099);
      CHECK(std::abs(delta) <= 0.01);
      CHECK(delta * g0 < 0.0);  // moves against the gradient
    }
  }
  SUBCASE("deterministic from identical state") {
    Matrix w1(2, 3, 0.5), w2(2, 3, 0.5);
    Matrix g(2, 3, 0.7);
    AdamState s1 = AdamState::like(w1), s2 = AdamState::like(w2);
    adam_step(w1, g, s1, 0.01);
    adam_step(w2, g, s2, 0.01);
    CHECK(w1.data == w2.data);
    CHECK(s1.first_moment.data == s2.first_moment.data);
  }
  SUBCASE("non-finite gradients raise") {
    Matrix w(1, 1, 0.0);
    Matrix g(1, 1, std::nan(""));
    AdamState s = AdamState::like(w);
    CHECK_THROWS_AS(adam_step(w, g, s, 0.01), NumericError);
  }
}

TEST_CASE("gradient_check") {
  SUBCASE("quadratic loss ||W||^2 against analytic 2W") {
    Matrix w(2, 3);
    Rng rng(4);
    for (double& v : w.data) v = rng.uniform(-1, 1);
    auto loss = [&] {
      double s = 0.0;
      for (double v : w.data) s += v * v;
      return s;
    };
    auto analytic = [&] {
      Matrix g = w;
      for (double& v : g.data) v *= 2.0;
      return std::vector<Matrix>{g};
    };
    auto report = gradient_check(loss, analytic, {&w}, 1e-6);
    CHECK(report.pass);
    CHECK(report.max_rel_error < 1e-6);
  }
  SUBCASE("corrupted gradients are flagged with rel error near 0.5") {
    Matrix w(1, 2);
    w.at(0, 0) = 0.3;
    w.at(0, 1) = -0.8;
    auto loss = [&] {
      double s = 0.0;
      for (double v : w.data) s += v * v;
      return s;
    };
    auto corrupted = [&] {
      Matrix g = w;
      for (double& v : g.data) v *= 4.0;  // 2x the true gradient
      return std::vector<Matrix>{g};
    };
    auto report = gradient_check(loss, corrupted, {&w}, 1e-4);
    CHECK_FALSE(report.pass);
    CHECK(report.max_rel_error == doctest::Approx(0.5).epsilon(1e-3));
  }
}

TEST_CASE("matmul transpose variants agree with the plain product") {
  Rng rng(9);
  Matrix a(7, 5), b(7, 4);
  for (double& v : a.data) v = rng.uniform(-1, 1);
  for (double& v : b.data) v = rng.uniform(-1, 1);
  Matrix at = transpose(a);
  Matrix lhs = matmul_at(a, b);
  Matrix rhs = matmul(at, b);
  REQUIRE(lhs.rows == rhs.rows);
  for (size_t i = 0; i < lhs.data.size(); ++i)
    CHECK(lhs.data[i] == doctest::Approx(rhs.data[i]).epsilon(1e-12));

  Matrix c(4, 5);
  for (double& v : c.data) v = rng.uniform(-1, 1);
  Matrix lhs2 = matmul_bt(a, c);
  Matrix rhs2 = matmul(a, transpose(c));
  for (size_t i = 0; i < lhs2.data.size(); ++i)
    CHECK(lhs2.data[i] == doctest::Approx(rhs2.data[i]).epsilon(1e-12));
}
