#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "advattr/losses.hpp"

using namespace advattr;

namespace {

// Identity-weight embedder on 2-d images: f(x) = tanh(x).
Embedder stub_embedder() {
  DenseLayer h{Tensor::matrix(2, 2, {1, 0, 0, 1}), Tensor::zeros({2})};
  DenseLayer o{Tensor::matrix(2, 2, {1, 0, 0, 1}), Tensor::zeros({2})};
  return Embedder{"stub", TanhMlp(h, o, false), 0};
}

AttributeDictionary single(const Vec& z) { return AttributeDictionary{{z}, {"a"}}; }

// Mean over attributes of a1 (1 - cos) + a2 ||v||, from the oracle helpers.
double stealthy_oracle(const std::vector<Vec>& zs, const std::vector<Vec>& vs, double a1, double a2) {
  double s = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    s += a1 * (1.0 - oracle::cosine(zs[i], vs[i])) + a2 * oracle::norm(vs[i]);
  }
  return s / static_cast<double>(zs.size());
}

}  // namespace

TEST_CASE("adv_loss: identical, orthogonal and antipodal embeddings") {
  const Embedder m = stub_embedder();
  CHECK(std::fabs(adv_loss(Vec{0.4, -0.3}, Vec{0.4, -0.3}, m)) < 1e-10);
  CHECK(adv_loss(Vec{1, 0}, Vec{0, 1}, m) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(adv_loss(Vec{1, 0}, Vec{-1, 0}, m) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(adv_loss(Vec{1, 0, 0}, Vec{1, 0}, m), ShapeError);
}

TEST_CASE("adv_loss stays in [0, 2] on a random world") {
  const World w = make_world(WorldConfig{}, 1);
  for (const auto& s : w.source_images) {
    for (const auto& t : w.target_images) {
      for (const auto& e : w.embedders) {
        const double l = adv_loss(s, t, e);
        CHECK(l >= 0.0);
        CHECK(l <= 2.0);
      }
    }
  }
}

TEST_CASE("stealthy_loss worked examples") {
  const Vec z{0, 1, 0};
  CHECK(stealthy_loss(single(z), std::vector<Vec>{{0, 1, 0}}, 1.0, 0.01) == doctest::Approx(0.01));
  CHECK(stealthy_loss(single(z), std::vector<Vec>{{0, 2, 0}}, 1.0, 0.01) == doctest::Approx(0.02));
  CHECK(stealthy_loss(single(z), std::vector<Vec>{{1, 0, 0}}, 1.0, 0.01) == doctest::Approx(1.01));
  // zero vicinity vector: cos term contributes alpha1
  CHECK(stealthy_loss(single(z), std::vector<Vec>{{0, 0, 0}}, 1.0, 0.01) == doctest::Approx(1.0));
  CHECK_THROWS(stealthy_loss(single(z), std::vector<Vec>{{0, 1, 0}}, -1.0, 0.01));
  CHECK_THROWS_AS(stealthy_loss(single(z), std::vector<Vec>{}, 1.0, 0.01), ShapeError);
}

TEST_CASE("stealthy_loss matches the oracle and is non-negative") {
  const World w = make_world(WorldConfig{}, 2);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> vs;
    for (std::size_t i = 0; i < w.attributes.size(); ++i) vs.push_back(gaussian_vector(32, 0.5, rng));
    const double l = stealthy_loss(w.attributes, vs, 1.0, 0.01);
    CHECK(l >= 0.0);
    CHECK(l == doctest::Approx(stealthy_oracle(w.attributes.directions, vs, 1.0, 0.01)).epsilon(1e-12));
  }
}

TEST_CASE("total_loss") {
  CHECK(total_loss(2.0, 4.0, {1.0, 0.0}) == 2.0);
  CHECK(total_loss(2.0, 4.0, {0.0, 1.0}) == 4.0);
  CHECK(total_loss(2.0, 4.0, {0.25, 0.75}) == doctest::Approx(3.5));
  CHECK_THROWS(total_loss(2.0, 4.0, {0.7, 0.7}));
  // linear in each argument
  const TradeoffWeights w{0.3, 0.7};
  CHECK(total_loss(1.0 + 2.0, 5.0, w) - total_loss(1.0, 5.0, w) == doctest::Approx(0.3 * 2.0));
}

TEST_CASE("loss nodes agree with the scalar functions and pass gradient checks") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec a = gaussian_vector(6, 1.0, rng);
    const Vec b = gaussian_vector(6, 1.0, rng);
    Graph g;
    const NodeId root = adv_loss_node(g, g.parameter("a", Tensor::vector(a)), g.parameter("b", Tensor::vector(b)));
    CHECK(g.forward().item() == doctest::Approx(1.0 - oracle::cosine(a, b)).epsilon(1e-12));
    CHECK(check_gradient(g, root, 1e-5) < 1e-6);

    std::vector<Vec> zs, vs;
    Graph s;
    std::vector<NodeId> zn, vn;
    for (int i = 0; i < 3; ++i) {
      zs.push_back(gaussian_vector(4, 1.0, rng));
      vs.push_back(gaussian_vector(4, 1.0, rng));
      zn.push_back(s.constant(Tensor::vector(zs.back())));
      vn.push_back(s.parameter("v" + std::to_string(i), Tensor::vector(vs.back())));
    }
    const NodeId sr = stealthy_loss_node(s, zn, vn, LossWeights{});
    CHECK(s.forward().item() == doctest::Approx(stealthy_oracle(zs, vs, 1.0, 0.01)).epsilon(1e-10));
    CHECK(check_gradient(s, sr, 1e-5) < 1e-6);
  }
}

TEST_CASE("LossWeights validation") {
  CHECK_NOTHROW(LossWeights{}.validate());
  CHECK_THROWS_AS((LossWeights{-0.1, 0.01}.validate()), ConfigError);
}
