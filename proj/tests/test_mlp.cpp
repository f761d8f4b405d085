#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "zsgan/mlp.hpp"

using namespace zsgan;

namespace {

MlpParams identity_params(std::size_t n) {
  MlpSpec spec{{n, n}, {linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  for (std::size_t i = 0; i < n; ++i) p.layers[0].weights(i, i) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("forward: identity layer reproduces its input", "[mlp]") {
  MlpSpec spec{{2, 2}, {linear_act()}};
  Matrix x(1, 2);
  x(0, 0) = 3.0;
  x(0, 1) = -1.0;
  Matrix y = mlp_forward(identity_params(2), spec, x);
  REQUIRE(y(0, 0) == 3.0);
  REQUIRE(y(0, 1) == -1.0);
}

TEST_CASE("forward: relu clamps negatives", "[mlp]") {
  MlpSpec spec{{2, 2}, {relu_act()}};
  MlpParams p = identity_params(2);
  Matrix x(1, 2);
  x(0, 0) = 3.0;
  x(0, 1) = -1.0;
  Matrix y = mlp_forward(p, spec, x);
  REQUIRE(y(0, 0) == 3.0);
  REQUIRE(y(0, 1) == 0.0);
}

TEST_CASE("forward: two-layer composition matches hand expansion", "[mlp]") {
  MlpSpec spec{{2, 2, 1}, {leaky_relu_act(0.2), linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  p.layers[0].weights(0, 0) = 1.0;
  p.layers[0].weights(0, 1) = -2.0;
  p.layers[0].weights(1, 0) = 0.5;
  p.layers[0].weights(1, 1) = 1.0;
  p.layers[0].bias = {0.25, -0.5};
  p.layers[1].weights(0, 0) = 2.0;
  p.layers[1].weights(1, 0) = -1.0;
  p.layers[1].bias = {0.125};

  Matrix x(1, 2);
  x(0, 0) = 1.0;
  x(0, 1) = -1.0;

  auto lrelu = [](double z) { return z > 0.0 ? z : 0.2 * z; };
  const double h0 = lrelu(1.0 * 1.0 + (-1.0) * 0.5 + 0.25);
  const double h1 = lrelu(1.0 * -2.0 + (-1.0) * 1.0 - 0.5);
  const double expected = h0 * 2.0 + h1 * -1.0 + 0.125;

  Matrix y = mlp_forward(p, spec, x);
  REQUIRE(y(0, 0) == Catch::Approx(expected).margin(1e-15));
}

TEST_CASE("forward: shape mismatch raises a dimension error", "[mlp]") {
  MlpSpec spec{{2, 2}, {linear_act()}};
  Matrix x(1, 3);
  REQUIRE_THROWS_AS(mlp_forward(identity_params(2), spec, x), DimensionError);
}

TEST_CASE("forward is homogeneous for bias-free linear layers", "[mlp]") {
  RngStream rng(100);
  MlpSpec spec{{4, 3}, {linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  for (double& w : p.layers[0].weights.data) w = rng.next_gaussian();
  Matrix x = sample_gaussian(rng, 5, 4);
  Matrix base = mlp_forward(p, spec, x);
  const double alpha = 2.5;
  MlpParams scaled_params = p;
  for (double& w : scaled_params.layers[0].weights.data) w *= alpha;
  Matrix scaled_out = mlp_forward(scaled_params, spec, x);
  for (std::size_t i = 0; i < base.data.size(); ++i)
    REQUIRE(scaled_out.data[i] == Catch::Approx(alpha * base.data[i]).margin(1e-12));
}

TEST_CASE("backward: linear layer with all-ones upstream", "[mlp]") {
  MlpSpec spec{{2, 1}, {linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  p.layers[0].weights(0, 0) = 0.3;
  p.layers[0].weights(1, 0) = -0.7;
  Matrix x(3, 2);
  double vals[6] = {1, 2, 3, 4, 5, 6};
  x.data.assign(vals, vals + 6);
  Matrix upstream(3, 1, 1.0);

  BackwardResult res = mlp_backward(p, spec, x, upstream);
  // weight grad = X^T * 1, bias grad = batch count
  REQUIRE(res.param_grads.layers[0].weights(0, 0) == Catch::Approx(1 + 3 + 5));
  REQUIRE(res.param_grads.layers[0].weights(1, 0) == Catch::Approx(2 + 4 + 6));
  REQUIRE(res.param_grads.layers[0].bias[0] == Catch::Approx(3.0));
}

TEST_CASE("backward: zero upstream zeroes every gradient", "[mlp]") {
  RngStream rng(5);
  MlpSpec spec = oracle::random_spec(rng);
  MlpParams p = oracle::random_params(spec, rng);
  Matrix x = sample_gaussian(rng, 4, spec.input_width());
  Matrix upstream(4, spec.output_width(), 0.0);
  BackwardResult res = mlp_backward(p, spec, x, upstream);
  for (const auto& layer : res.param_grads.layers) {
    for (double g : layer.weights.data) REQUIRE(g == 0.0);
    for (double g : layer.bias) REQUIRE(g == 0.0);
  }
  for (double g : res.input_grads.data) REQUIRE(g == 0.0);
}

TEST_CASE("backward: random 3-layer net matches finite differences", "[mlp]") {
  RngStream rng(17);
  MlpSpec spec{{4, 6, 5, 3},
               {leaky_relu_act(0.2), relu_act(), linear_act()}};
  MlpParams p = oracle::random_params(spec, rng);
  Matrix x = sample_gaussian(rng, 3, 4);
  Matrix upstream = sample_gaussian(rng, 3, 3);

  BackwardResult res = mlp_backward(p, spec, x, upstream);
  auto loss = [&]() {
    Matrix y = mlp_forward(p, spec, x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * upstream.data[i];
    return s;
  };
  REQUIRE(oracle::max_param_grad_err(p, res.param_grads, loss) < oracle::kFdTol);
  REQUIRE(oracle::max_matrix_grad_err(x, res.input_grads, loss) < oracle::kFdTol);
}

TEST_CASE("grad_input_scalar: linear critic returns its weights", "[mlp]") {
  MlpSpec spec{{2, 1}, {linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  p.layers[0].weights(0, 0) = 3.0;
  p.layers[0].weights(1, 0) = 4.0;
  RngStream rng(1);
  Matrix x = sample_gaussian(rng, 5, 2);
  auto [g, masks] = grad_input_scalar(p, spec, x);
  for (std::size_t i = 0; i < 5; ++i) {
    REQUIRE(g(i, 0) == 3.0);
    REQUIRE(g(i, 1) == 4.0);
  }
}

TEST_CASE("grad_input_scalar: dead relu critic has zero gradient", "[mlp]") {
  MlpSpec spec{{2, 3, 1}, {relu_act(), linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  for (double& w : p.layers[0].weights.data) w = 1.0;
  p.layers[0].bias = {-100.0, -100.0, -100.0};  // pre-activations all negative
  for (double& w : p.layers[1].weights.data) w = 1.0;
  Matrix x(2, 2, 0.5);
  auto [g, masks] = grad_input_scalar(p, spec, x);
  for (double v : g.data) REQUIRE(v == 0.0);
}

TEST_CASE("grad_input_scalar: rejects non-scalar outputs", "[mlp]") {
  MlpSpec spec{{2, 2}, {linear_act()}};
  Matrix x(1, 2);
  REQUIRE_THROWS_AS(grad_input_scalar(identity_params(2), spec, x), ContractError);
}

TEST_CASE("grad_input_scalar: random leaky critic matches finite differences", "[mlp]") {
  RngStream rng(23);
  MlpSpec spec{{3, 5, 1}, {leaky_relu_act(0.2), linear_act()}};
  MlpParams p = oracle::random_params(spec, rng);
  Matrix x = sample_gaussian(rng, 4, 3);
  auto [g, masks] = grad_input_scalar(p, spec, x);

  double worst = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      auto row_out = [&]() { return mlp_forward(p, spec, x)(i, 0); };
      const double fd = oracle::central_diff(x(i, j), row_out);
      worst = std::max(worst, oracle::rel_err(g(i, j), fd));
    }
  }
  REQUIRE(worst < oracle::kFdTol);
}

TEST_CASE("penalty: linear critic closed form", "[mlp]") {
  MlpSpec spec{{2, 1}, {linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  p.layers[0].weights(0, 0) = 3.0;
  p.layers[0].weights(1, 0) = 4.0;
  Matrix x(3, 2, 0.25);
  auto [g, masks] = grad_input_scalar(p, spec, x);
  REQUIRE(gradient_penalty_value(g, 2) == Catch::Approx(16.0).margin(1e-10));
  MlpParams grads = penalty_param_grads(p, spec, x, masks);
  // closed form: 2(||w|| - 1) w / ||w||
  REQUIRE(grads.layers[0].weights(0, 0) == Catch::Approx(4.8).margin(1e-10));
  REQUIRE(grads.layers[0].weights(1, 0) == Catch::Approx(6.4).margin(1e-10));
  REQUIRE(grads.layers[0].bias[0] == 0.0);
}

TEST_CASE("penalty: unit-norm linear critic is penalty-free", "[mlp]") {
  MlpSpec spec{{2, 1}, {linear_act()}};
  MlpParams p = MlpParams::zeros(spec);
  p.layers[0].weights(0, 0) = 0.6;
  p.layers[0].weights(1, 0) = 0.8;
  Matrix x(2, 2, 1.0);
  auto [g, masks] = grad_input_scalar(p, spec, x);
  REQUIRE(gradient_penalty_value(g, 2) == Catch::Approx(0.0).margin(1e-12));
  MlpParams grads = penalty_param_grads(p, spec, x, masks);
  for (double v : grads.layers[0].weights.data) REQUIRE(std::abs(v) < 1e-12);
}

TEST_CASE("penalty: random 2-layer critic matches finite differences", "[mlp]") {
  RngStream rng(31);
  MlpSpec spec{{3, 6, 1}, {leaky_relu_act(0.2), linear_act()}};
  MlpParams p = oracle::random_params(spec, rng);
  Matrix x = sample_gaussian(rng, 4, 3);

  auto [g0, masks] = grad_input_scalar(p, spec, x);
  MlpParams grads = penalty_param_grads(p, spec, x, masks);
  auto penalty = [&]() {
    auto [g, m] = grad_input_scalar(p, spec, x);
    return gradient_penalty_value(g, x.cols);
  };
  REQUIRE(oracle::max_param_grad_err(p, grads, penalty) < oracle::kFdTol);
}

TEST_CASE("penalty: restricted norm dimensions match finite differences", "[mlp]") {
  RngStream rng(37);
  MlpSpec spec{{5, 4, 1}, {leaky_relu_act(0.2), linear_act()}};
  MlpParams p = oracle::random_params(spec, rng);
  Matrix x = sample_gaussian(rng, 3, 5);
  const std::size_t norm_dims = 3;

  auto [g0, masks] = grad_input_scalar(p, spec, x);
  MlpParams grads = penalty_param_grads(p, spec, x, masks, norm_dims);
  auto penalty = [&]() {
    auto [g, m] = grad_input_scalar(p, spec, x);
    return gradient_penalty_value(g, norm_dims);
  };
  REQUIRE(oracle::max_param_grad_err(p, grads, penalty) < oracle::kFdTol);
}

TEST_CASE("penalty: stale masks are rejected", "[mlp]") {
  MlpSpec spec{{2, 3, 1}, {relu_act(), linear_act()}};
  RngStream rng(2);
  MlpParams p = oracle::random_params(spec, rng);
  Matrix x = sample_gaussian(rng, 4, 2);
  auto [g, masks] = grad_input_scalar(p, spec, x);
  Matrix smaller = sample_gaussian(rng, 3, 2);
  REQUIRE_THROWS_AS(penalty_param_grads(p, spec, smaller, masks), ContractError);
}

TEST_CASE("gradient fidelity across random nets", "[mlp][slow]") {
  RngStream rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    MlpSpec spec = oracle::random_spec(rng, 3, 8, 1);
    MlpParams p = oracle::random_params(spec, rng);
    Matrix x = sample_gaussian(rng, 2, spec.input_width());
    Matrix upstream = sample_gaussian(rng, 2, 1);

    BackwardResult res = mlp_backward(p, spec, x, upstream);
    auto loss = [&]() {
      Matrix y = mlp_forward(p, spec, x);
      double s = 0.0;
      for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * upstream.data[i];
      return s;
    };
    REQUIRE(oracle::max_param_grad_err(p, res.param_grads, loss) < oracle::kFdTol);

    auto [g, masks] = grad_input_scalar(p, spec, x);
    MlpParams pgrads = penalty_param_grads(p, spec, x, masks);
    auto penalty = [&]() {
      auto [gg, mm] = grad_input_scalar(p, spec, x);
      return gradient_penalty_value(gg, x.cols);
    };
    REQUIRE(oracle::max_param_grad_err(p, pgrads, penalty) < oracle::kFdTol);
  }
}
