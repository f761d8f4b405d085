#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "zsgan/adam.hpp"

using namespace zsgan;

namespace {

MlpSpec scalar_spec() { return MlpSpec{{1, 1}, {linear_act()}}; }

}  // namespace

TEST_CASE("first step moves by roughly -lr * sign(g)", "[adam]") {
  MlpSpec spec{{2, 2}, {linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  MlpParams g = MlpParams::zeros(spec);
  g.layers[0].weights(0, 0) = 2.0;
  g.layers[0].weights(0, 1) = -0.3;
  g.layers[0].weights(1, 0) = 1e-3;
  g.layers[0].weights(1, 1) = -7.0;

  AdamState state = AdamState::init(spec, AdamHyper{1e-3, 0.9, 0.999, 1e-8});
  adam_step(p, g, state);
  REQUIRE(state.step_count == 1);
  for (std::size_t i = 0; i < 4; ++i) {
    const double update = p.layers[0].weights.data[i];
    const double grad = g.layers[0].weights.data[i];
    if (grad == 0.0) continue;
    REQUIRE(std::abs(std::abs(update) - 1e-3) < 1e-6);
    REQUIRE(update * grad < 0.0);  // opposite sign
  }
}

TEST_CASE("zero gradients leave parameters unchanged", "[adam]") {
  MlpSpec spec{{3, 2}, {relu_act()}};
  RngStream rng(9);
  MlpParams p = oracle::random_params(spec, rng);
  MlpParams before = p;
  MlpParams g = MlpParams::zeros(spec);
  AdamState state = AdamState::init(spec);
  adam_step(p, g, state);
  adam_step(p, g, state);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    REQUIRE(p.layers[l].weights.data == before.layers[l].weights.data);
    REQUIRE(p.layers[l].bias == before.layers[l].bias);
  }
}

TEST_CASE("moments decay toward zero on zero gradients", "[adam]") {
  MlpSpec spec = scalar_spec();
  MlpParams p = MlpParams::zeros(spec);
  MlpParams g = MlpParams::zeros(spec);
  g.layers[0].weights(0, 0) = 1.0;
  AdamState state = AdamState::init(spec, AdamHyper{1e-3, 0.5, 0.9, 1e-8});
  adam_step(p, g, state);
  const double m1 = state.first_moment.layers[0].weights(0, 0);
  g.layers[0].weights(0, 0) = 0.0;
  adam_step(p, g, state);
  const double m2 = state.first_moment.layers[0].weights(0, 0);
  REQUIRE(std::abs(m2) < std::abs(m1));
  REQUIRE(m2 == Catch::Approx(0.5 * m1));
}

TEST_CASE("two steps on a scalar match the hand-applied recurrence", "[adam]") {
  MlpSpec spec = scalar_spec();
  MlpParams p = MlpParams::zeros(spec);
  p.layers[0].weights(0, 0) = 1.5;
  AdamHyper h{0.1, 0.9, 0.999, 1e-8};
  AdamState state = AdamState::init(spec, h);

  const double g1 = 0.4, g2 = -0.2;
  MlpParams g = MlpParams::zeros(spec);
  g.layers[0].weights(0, 0) = g1;
  adam_step(p, g, state);
  g.layers[0].weights(0, 0) = g2;
  adam_step(p, g, state);

  // Hand recurrence, kept independent of the implementation.
  double m = 0.0, v = 0.0, x = 1.5;
  double grads[2] = {g1, g2};
  for (int t = 1; t <= 2; ++t) {
    const double grad = grads[t - 1];
    m = h.beta1 * m + (1 - h.beta1) * grad;
    v = h.beta2 * v + (1 - h.beta2) * grad * grad;
    const double m_hat = m / (1 - std::pow(h.beta1, t));
    const double v_hat = v / (1 - std::pow(h.beta2, t));
    x -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
  REQUIRE(p.layers[0].weights(0, 0) == Catch::Approx(x).margin(1e-15));
  REQUIRE(state.step_count == 2);
}

TEST_CASE("non-finite gradients raise a training error naming the layer", "[adam]") {
  MlpSpec spec{{2, 2, 1}, {relu_act(), linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  MlpParams g = MlpParams::zeros(spec);
  g.layers[1].weights(0, 0) = std::numeric_limits<double>::quiet_NaN();
  AdamState state = AdamState::init(spec);
  REQUIRE_THROWS_WITH(adam_step(p, g, state), Catch::Matchers::ContainsSubstring("layer 1"));
}

TEST_CASE("second moments never go negative", "[adam]") {
  MlpSpec spec = scalar_spec();
  MlpParams p = MlpParams::zeros(spec);
  AdamState state = AdamState::init(spec, AdamHyper{0.01, 0.5, 0.999, 1e-8});
  RngStream rng(4);
  MlpParams g = MlpParams::zeros(spec);
  for (int t = 0; t < 50; ++t) {
    g.layers[0].weights(0, 0) = rng.next_gaussian();
    adam_step(p, g, state);
    REQUIRE(state.second_moment.layers[0].weights(0, 0) >= 0.0);
  }
  REQUIRE(state.step_count == 50);
}
