#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "sagin/policy.hpp"

using namespace sagin;

namespace {

// Bare matrix for driving the scorer directly; no substrate needed.
FeatureMatrix matrix_of(std::vector<FeatureVector> rows) {
  FeatureMatrix fm;
  for (std::size_t i = 0; i < rows.size(); ++i)
    fm.node_order.push_back(static_cast<NodeId>(i));
  fm.rows = std::move(rows);
  return fm;
}

FeatureMatrix random_matrix(std::mt19937_64& rng, int rows) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FeatureVector> m(rows);
  for (auto& r : m) {
    r.cpu = u(rng);
    r.sto = u(rng);
    r.bw_sum = u(rng);
    r.avg_dist = u(rng);
  }
  return matrix_of(std::move(m));
}

PolicyParameters random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PolicyParameters p;
  for (auto& w : p.omega) w = u(rng);
  p.bias = u(rng);
  return p;
}

double log_prob_of(const PolicyParameters& params, const FeatureMatrix& fm,
                   const std::vector<char>& mask, NodeId chosen) {
  auto dist = forward(params, fm, mask);
  REQUIRE(dist.has_value());
  for (std::size_t i = 0; i < dist->node_order.size(); ++i)
    if (dist->node_order[i] == chosen) return std::log(dist->probabilities[i]);
  FAIL("chosen node missing from distribution");
  return 0.0;
}

}  // namespace

TEST_SUITE("policy") {

TEST_CASE("equal feature rows share probability equally") {
  FeatureVector v{1.0, 2.0, 3.0, 0.5};
  FeatureMatrix fm = matrix_of({v, v});
  PolicyParameters p;
  p.omega = {0.3, -0.2, 0.1, 0.4};
  p.bias = 0.7;
  auto dist = forward(p, fm, {1, 1});
  REQUIRE(dist.has_value());
  CHECK(dist->probabilities[0] == doctest::Approx(0.5));
  CHECK(dist->probabilities[1] == doctest::Approx(0.5));
}

TEST_CASE("score gap of ln 2 gives a 2:1 split") {
  // omega = (1,0,0,0) turns the cpu column into the raw score.
  FeatureMatrix fm = matrix_of({{std::log(2.0), 0, 0, 0}, {0.0, 0, 0, 0}});
  PolicyParameters p;
  p.omega = {1.0, 0.0, 0.0, 0.0};
  auto dist = forward(p, fm, {1, 1});
  REQUIRE(dist.has_value());
  CHECK(dist->probabilities[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(dist->probabilities[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("masked rows are excluded and the rest renormalize") {
  FeatureMatrix fm = matrix_of({{1, 0, 0, 0}, {5, 0, 0, 0}, {2, 0, 0, 0}});
  PolicyParameters p;
  p.omega = {1.0, 0.0, 0.0, 0.0};
  auto dist = forward(p, fm, {1, 0, 1});
  REQUIRE(dist.has_value());
  REQUIRE(dist->node_order == std::vector<NodeId>{0, 2});
  double sum = dist->probabilities[0] + dist->probabilities[1];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  // exp(1)/(exp(1)+exp(2)) with the middle row gone.
  CHECK(dist->probabilities[0] ==
        doctest::Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(2.0))));
  for (double q : dist->probabilities) CHECK(q > 0.0);
}

TEST_CASE("an all-masked request is a rejection, not a distribution") {
  FeatureMatrix fm = matrix_of({{1, 0, 0, 0}, {2, 0, 0, 0}});
  CHECK_FALSE(forward(PolicyParameters{}, fm, {0, 0}).has_value());
  CHECK_THROWS_AS(forward(PolicyParameters{}, fm, {1}), std::invalid_argument);
}

TEST_CASE("huge scores do not overflow the softmax") {
  FeatureMatrix fm = matrix_of({{800.0, 0, 0, 0}, {700.0, 0, 0, 0}});
  PolicyParameters p;
  p.omega = {1.0, 0.0, 0.0, 0.0};
  auto dist = forward(p, fm, {1, 1});
  REQUIRE(dist.has_value());
  CHECK(std::isfinite(dist->probabilities[0]));
  CHECK(dist->probabilities[0] == doctest::Approx(1.0));
  CHECK(dist->probabilities[1] > 0.0);
}

TEST_CASE("adding a constant to every score changes nothing") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    FeatureMatrix fm = random_matrix(rng, 6);
    PolicyParameters p = random_params(rng);
    std::vector<char> mask(6, 1);
    mask[trial % 6] = 0;
    auto base = forward(p, fm, mask);
    PolicyParameters shifted = p;
    shifted.bias += 3.7;  // shared shift; also proves the bias is inert
    auto moved = forward(shifted, fm, mask);
    REQUIRE(base.has_value());
    REQUIRE(moved.has_value());
    for (std::size_t i = 0; i < base->probabilities.size(); ++i) {
      CHECK(std::abs(base->probabilities[i] - moved->probabilities[i]) < 1e-12);
    }
  }
}

TEST_CASE("single-candidate distributions are certain and gradient-free") {
  FeatureMatrix fm = matrix_of({{4, 3, 2, 1}});
  auto dist = forward(PolicyParameters{}, fm, {1});
  REQUIRE(dist.has_value());
  CHECK(dist->probabilities[0] == 1.0);
  std::mt19937_64 rng(1);
  CHECK(sample_node(*dist, rng) == 0);
  CHECK(argmax_node(*dist) == 0);
  LogProbGradient g = log_prob_gradient(PolicyParameters{}, fm, {1}, 0);
  for (double d : g.d_omega) CHECK(d == doctest::Approx(0.0));
  CHECK(g.d_bias == 0.0);
}

TEST_CASE("argmax picks the highest probability, ties to the smaller id") {
  NodeDistribution dist;
  dist.node_order = {3, 5, 9};
  dist.probabilities = {0.2, 0.5, 0.3};
  CHECK(argmax_node(dist) == 5);
  dist.probabilities = {0.4, 0.2, 0.4};
  CHECK(argmax_node(dist) == 3);
}

TEST_CASE("sampling follows the distribution") {
  NodeDistribution dist;
  dist.node_order = {0, 1};
  dist.probabilities = {0.5, 0.5};
  std::mt19937_64 rng(99);
  int first = 0;
  for (int i = 0; i < 10000; ++i)
    if (sample_node(dist, rng) == 0) ++first;
  CHECK(first > 4700);  // binomial 3-sigma band around 5000
  CHECK(first < 5300);
}

TEST_CASE("two equal candidates give the half-difference gradient") {
  FeatureVector v1{1.0, 0.0, 2.0, 0.5};
  FeatureVector v2{0.0, 1.0, 1.0, 0.5};
  // Both score 0 under zero weights, so p = (0.5, 0.5).
  FeatureMatrix fm = matrix_of({v1, v2});
  LogProbGradient g = log_prob_gradient(PolicyParameters{}, fm, {1, 1}, 0);
  for (int c = 0; c < kNumFeatures; ++c)
    CHECK(g.d_omega[c] == doctest::Approx((v1[c] - v2[c]) / 2.0));
  CHECK(g.d_bias == 0.0);
  CHECK_THROWS_AS(log_prob_gradient(PolicyParameters{}, fm, {1, 0}, 1),
                  std::invalid_argument);
}

TEST_CASE("analytic gradient matches finite differences") {
  std::mt19937_64 rng(7);
  const double eps = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    FeatureMatrix fm = random_matrix(rng, 5);
    PolicyParameters p = random_params(rng);
    std::vector<char> mask(5, 1);
    if (trial % 3 == 0) mask[rng() % 5] = 0;
    std::vector<NodeId> eligible;
    for (int i = 0; i < 5; ++i)
      if (mask[i]) eligible.push_back(i);
    NodeId chosen = eligible[rng() % eligible.size()];
    LogProbGradient g = log_prob_gradient(p, fm, mask, chosen);
    for (int c = 0; c < kNumFeatures; ++c) {
      PolicyParameters lo = p, hi = p;
      lo.omega[c] -= eps;
      hi.omega[c] += eps;
      double fd = (log_prob_of(hi, fm, mask, chosen) -
                   log_prob_of(lo, fm, mask, chosen)) /
                  (2 * eps);
      double scale = std::max({1.0, std::abs(fd), std::abs(g.d_omega[c])});
      worst = std::max(worst, std::abs(g.d_omega[c] - fd) / scale);
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("probability-weighted gradients cancel") {
  // Score-function identity: E[grad log p] under p itself is zero.
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    FeatureMatrix fm = random_matrix(rng, 6);
    PolicyParameters p = random_params(rng);
    std::vector<char> mask(6, 1);
    auto dist = forward(p, fm, mask);
    REQUIRE(dist.has_value());
    std::array<double, kNumFeatures> sum{};
    for (std::size_t i = 0; i < dist->node_order.size(); ++i) {
      LogProbGradient g = log_prob_gradient(p, fm, mask, dist->node_order[i]);
      for (int c = 0; c < kNumFeatures; ++c)
        sum[c] += dist->probabilities[i] * g.d_omega[c];
    }
    for (int c = 0; c < kNumFeatures; ++c) CHECK(std::abs(sum[c]) < 1e-9);
  }
}

TEST_CASE("updates scale the stacked gradient by rate and reward") {
  PolicyParameters p;
  p.omega = {0.5, 0.5, 0.5, 0.5};
  p.alpha = 0.005;
  GradientAccumulator acc;
  acc.d_omega = {1.0, 0.0, 0.0, 0.0};
  acc.sample_count = 1;
  apply_update(p, acc, 2.0);
  CHECK(p.omega[0] == doctest::Approx(0.51));  // 0.5 + 0.005*2*1
  CHECK(p.omega[1] == doctest::Approx(0.5));
  CHECK(p.bias == 0.0);
  CHECK(acc.empty());  // accumulator resets after the update
}

TEST_CASE("zero reward leaves parameters unchanged") {
  PolicyParameters p;
  p.omega = {0.1, 0.2, 0.3, 0.4};
  PolicyParameters before = p;
  GradientAccumulator acc;
  acc.d_omega = {5.0, 5.0, 5.0, 5.0};
  acc.sample_count = 3;
  apply_update(p, acc, 0.0);
  CHECK(p == before);
  CHECK(acc.empty());
}

TEST_CASE("two half-batches equal one full batch") {
  std::mt19937_64 rng(5);
  std::vector<LogProbGradient> grads;
  for (int i = 0; i < 10; ++i) {
    LogProbGradient g;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& d : g.d_omega) d = u(rng);
    grads.push_back(g);
  }
  const double reward = 1.7;
  PolicyParameters split = init_params(11);
  GradientAccumulator acc;
  for (int i = 0; i < 5; ++i) accumulate(acc, grads[i]);
  apply_update(split, acc, reward);
  for (int i = 5; i < 10; ++i) accumulate(acc, grads[i]);
  apply_update(split, acc, reward);

  PolicyParameters whole = init_params(11);
  for (const auto& g : grads) accumulate(acc, g);
  apply_update(whole, acc, reward);
  for (int c = 0; c < kNumFeatures; ++c)
    CHECK(split.omega[c] == doctest::Approx(whole.omega[c]).epsilon(1e-12));
}

TEST_CASE("empty and non-finite updates are refused") {
  PolicyParameters p = init_params(1);
  PolicyParameters before = p;
  GradientAccumulator acc;
  CHECK_THROWS_AS(apply_update(p, acc, 1.0), std::logic_error);
  acc.d_omega = {1e308, 0, 0, 0};
  acc.sample_count = 1;
  CHECK_THROWS_AS(apply_update(p, acc, 1e308), std::runtime_error);
  CHECK(p == before);  // refused update leaves parameters alone
}

TEST_CASE("initialization is seeded and inside the documented range") {
  PolicyParameters a = init_params(123);
  PolicyParameters b = init_params(123);
  PolicyParameters c = init_params(124);
  CHECK(a == b);
  CHECK(a != c);
  for (double w : a.omega) {
    CHECK(w >= -0.1);
    CHECK(w < 0.1);
  }
  CHECK(a.bias == 0.0);
  CHECK(a.alpha == 0.005);
  CHECK(init_params(5, 0.05).alpha == 0.05);
}

TEST_CASE("parameters round-trip through text at full precision") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    PolicyParameters p = random_params(rng);
    p.alpha = 0.0005 + 0.001 * trial;
    std::ostringstream out;
    save_params(p, out);
    std::istringstream in(out.str());
    PolicyParameters back = load_params(in);
    CHECK(back == p);  // bit-equal doubles
  }
}

TEST_CASE("parameter files with wrong arity are rejected") {
  std::istringstream three("OMEGA 0.1 0.2 0.3\nBIAS 0\nALPHA 0.005\n");
  CHECK_THROWS_AS(load_params(three), ParseError);
  std::istringstream five("OMEGA 0.1 0.2 0.3 0.4 0.5\nBIAS 0\nALPHA 0.005\n");
  CHECK_THROWS_AS(load_params(five), ParseError);
  std::istringstream missing("OMEGA 0.1 0.2 0.3 0.4\nALPHA 0.005\n");
  CHECK_THROWS_AS(load_params(missing), ParseError);
  std::istringstream bad_alpha("OMEGA 0.1 0.2 0.3 0.4\nBIAS 0\nALPHA -1\n");
  CHECK_THROWS_AS(load_params(bad_alpha), ParseError);
}

TEST_CASE("a fresh-init file carries the initialization values") {
  PolicyParameters p = init_params(42);
  std::ostringstream out;
  save_params(p, out);
  std::istringstream in(out.str());
  PolicyParameters back = load_params(in);
  CHECK(back.bias == 0.0);
  CHECK(back.alpha == 0.005);
  for (int c = 0; c < kNumFeatures; ++c)
    CHECK(back.omega[c] == p.omega[c]);
}

}  // TEST_SUITE("policy")
