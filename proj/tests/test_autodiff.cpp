#include <catch2/catch.hpp>

#include "ace/adam.hpp"
#include "ace/network.hpp"
#include "ace/tape.hpp"
#include "test_helpers.hpp"

using namespace ace;

TEST_CASE("tape: basic derivatives") {
  SECTION("d(x^2)/dx = 2x") {
    Tape t;
    const int x = t.leaf(Tensor::scalar(3.0));
    const Gradients g = t.backward(t.mul(x, x));
    CHECK(t.gradient(g, x).data[0] == Approx(6.0));
  }
  SECTION("sigmoid'(0) = 0.25") {
    Tape t;
    const int x = t.leaf(Tensor::scalar(0.0));
    const Gradients g = t.backward(t.sigmoid(x));
    CHECK(t.gradient(g, x).data[0] == Approx(0.25));
  }
  SECTION("unreachable node has zero gradient") {
    Tape t;
    const int x = t.leaf(Tensor::scalar(1.0));
    const int y = t.leaf(Tensor::scalar(2.0));
    const Gradients g = t.backward(t.mul(x, x));
    CHECK_FALSE(g.has(y));
    CHECK(t.gradient(g, y).data[0] == 0.0);
  }
}

TEST_CASE("tape: activations match definitions") {
  Tape t;
  const int x = t.constant(Tensor::column({-1.0, 0.0, 2.0}));
  const Tensor lrelu = t.value(t.leaky_relu(x, kLeakyReluSlope));
  CHECK(lrelu.data[0] == Approx(-0.01));
  CHECK(lrelu.data[1] == 0.0);
  CHECK(lrelu.data[2] == Approx(2.0));

  // SiLU(0) = 0
  const Tensor silu = t.value(t.mul(x, t.sigmoid(x)));
  CHECK(silu.data[1] == 0.0);
}

TEST_CASE("mlp: single linear layer") {
  MlpParams p;
  p.spec = {1, {}, 1, Activation::kLeakyRelu, Activation::kLinear};
  p.weights.push_back(Tensor::scalar(2.0));
  p.biases.push_back(Tensor::scalar(1.0));
  const auto y = mlp_eval(p, std::vector<double>{3.0});
  CHECK(y[0] == Approx(7.0));

  // tape path agrees
  Tape t;
  const MlpOnTape m = push_mlp(t, p, false);
  const int out = mlp_forward(t, m, p.spec, t.constant(Tensor::scalar(3.0)));
  CHECK(t.value(out).data[0] == Approx(7.0));

  Tensor wide(2, 1, 1.0);
  CHECK_THROWS_AS(mlp_forward(t, m, p.spec, t.constant(wide)), ValidationError);
}

TEST_CASE("tape: backward errors") {
  Tape t;
  const int x = t.leaf(Tensor(2, 1, 1.0));
  CHECK_THROWS_AS(t.backward(999), ValidationError);
  // non-scalar output needs a seed
  CHECK_THROWS_AS(t.backward(x), ValidationError);
}

TEST_CASE("tape: gradients of random MLPs match finite differences") {
  Rng rng(31337);
  const Activation acts[4] = {Activation::kLeakyRelu, Activation::kSilu, Activation::kSigmoid,
                              Activation::kTanh};
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 20; ++trial) {
    const std::size_t in = 1 + rng.index(6);
    const std::size_t depth = rng.index(3);
    LayerSpec spec{in, {}, 1 + rng.index(4), acts[rng.index(4)], Activation::kLinear};
    for (std::size_t l = 0; l < depth; ++l) spec.hidden.push_back(1 + rng.index(8));
    MlpParams p = MlpParams::init(spec, rng);
    for (Tensor& w : p.weights)
      for (double& v : w.data) v = rng.uniform(-1, 1);
    for (Tensor& b : p.biases)
      for (double& v : b.data) v = rng.uniform(-0.5, 0.5);
    Tensor input(in, 2);
    for (double& v : input.data) v = rng.uniform(-1.5, 1.5);

    Tape tape;
    const MlpOnTape m = push_mlp(tape, p, true);
    const int x = tape.constant(input);
    const int loss = tape.sum_all(mlp_forward(tape, m, spec, x));
    if (spec.hidden_activation == Activation::kLeakyRelu &&
        test::min_lrelu_preactivation(tape) < 1e-3)
      continue;  // finite differences are unreliable across the kink
    ++tested;
    const Gradients g = tape.backward(loss);

    auto recompute = [&]() { return test::mlp_scalar(p, input); };
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      const Tensor analytic = tape.gradient(g, m.weights[l]);
      for (std::size_t k = 0; k < p.weights[l].size(); ++k) {
        const double fd = test::fd_central(recompute, p.weights[l], k);
        CHECK(test::rel_err(analytic.data[k], fd) < 1e-4);
      }
      const Tensor analytic_b = tape.gradient(g, m.biases[l]);
      for (std::size_t k = 0; k < p.biases[l].size(); ++k) {
        const double fd = test::fd_central(recompute, p.biases[l], k);
        CHECK(test::rel_err(analytic_b.data[k], fd) < 1e-4);
      }
    }
  }
  REQUIRE(tested >= 15);
}

TEST_CASE("tape: linearity of backward") {
  Rng rng(5);
  Tape t;
  Tensor xv(3, 1);
  for (double& v : xv.data) v = rng.uniform(-1, 1);
  const int x = t.leaf(xv);
  const int a = t.sum_all(t.mul(x, x));
  const int b = t.sum_all(t.sin(x));
  const int sum = t.add(a, b);

  const Tensor ga = t.gradient(t.backward(a), x);
  const Tensor gb = t.gradient(t.backward(b), x);
  const Tensor gs = t.gradient(t.backward(sum), x);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(gs.data[i] == Approx(ga.data[i] + gb.data[i]).margin(1e-14));
}

TEST_CASE("tape: replay reproduces values bit-exactly") {
  Rng rng(12);
  Tape t;
  Tensor xv(4, 3);
  for (double& v : xv.data) v = rng.normal();
  const int x = t.leaf(xv);
  const int y = t.softmax_cols(t.tanh(t.mul(x, x)));
  t.backward(t.sum_all(t.log(y)));
  CHECK(t.replay_check());
}

TEST_CASE("grad-of-grad: quadratic closed form") {
  // D(x) = theta x^2, penalty p = (dD/dx)^2 = 4 theta^2 x^2; dp/dtheta at
  // theta=1, x=3 is 8 theta x^2 = 72
  Tape t;
  const int theta = t.leaf(Tensor::scalar(1.0));
  const int x = t.leaf(Tensor::scalar(3.0));
  const int d = t.mul(theta, t.mul(x, x));
  const Gradients first = t.backward(d);
  REQUIRE(first.has(x));
  const int dx = first.node_of(x);
  const int penalty = t.mul(dx, dx);
  const Gradients second = t.backward(penalty);
  CHECK(t.gradient(second, theta).data[0] == Approx(72.0));
}

TEST_CASE("grad-of-grad: sine closed form") {
  // D(x) = sin(theta x): p = (dD/dx)^2 = theta^2 cos^2(theta x);
  // dp/dtheta = 2 theta cos^2 - 2 theta^2 x cos sin = 2 at theta=1, x=0
  Tape t;
  const int theta = t.leaf(Tensor::scalar(1.0));
  const int x = t.leaf(Tensor::scalar(0.0));
  const int d = t.sin(t.mul(theta, x));
  const Gradients first = t.backward(d);
  REQUIRE(first.has(x));
  const int penalty = t.mul(first.node_of(x), first.node_of(x));
  const Gradients second = t.backward(penalty);
  CHECK(t.gradient(second, theta).data[0] == Approx(2.0).margin(1e-12));
}

TEST_CASE("grad-of-grad: input-gradient norm vs finite differences over parameters") {
  Rng rng(777);
  for (int trial = 0; trial < 6; ++trial) {
    LayerSpec spec{3, {5, 4}, 1, Activation::kTanh, Activation::kSigmoid};
    MlpParams p = MlpParams::init(spec, rng);
    for (Tensor& w : p.weights)
      for (double& v : w.data) v = rng.uniform(-1, 1);
    Tensor input(3, 2);
    for (double& v : input.data) v = rng.uniform(-1, 1);

    auto penalty_value = [&]() {
      Tape t;
      const MlpOnTape m = push_mlp(t, p, false);
      const int x = t.leaf(input);
      const int out = mlp_forward(t, m, spec, x);
      const Gradients g = t.backward(t.sum_all(out));
      return t.value(t.sum_all(t.mul(g.node_of(x), g.node_of(x)))).data[0];
    };

    Tape t;
    const MlpOnTape m = push_mlp(t, p, true);
    const int x = t.leaf(input);
    const int out = mlp_forward(t, m, spec, x);
    const Gradients g = t.backward(t.sum_all(out));
    REQUIRE(g.has(x));
    const int penalty = t.sum_all(t.mul(g.node_of(x), g.node_of(x)));
    const Gradients second = t.backward(penalty);

    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      const Tensor analytic = t.gradient(second, m.weights[l]);
      for (std::size_t k = 0; k < std::min<std::size_t>(p.weights[l].size(), 6); ++k) {
        const double fd = test::fd_central(penalty_value, p.weights[l], k);
        CHECK(test::rel_err(analytic.data[k], fd) < 1e-3);
      }
    }
  }
}

TEST_CASE("adam: first step magnitude is the learning rate") {
  Tensor theta = Tensor::scalar(0.5);
  AdamState state = AdamState::init({theta}, 0.01);
  adam_step({&theta}, {Tensor::scalar(7.3)}, state);
  const double step = std::abs(theta.data[0] - 0.5);
  CHECK(step >= 0.99 * 0.01);
  CHECK(step <= 0.01 + 1e-12);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Tensor theta = Tensor::scalar(1.25);
  AdamState state = AdamState::init({theta}, 0.01);
  adam_step({&theta}, {Tensor::scalar(0.0)}, state);
  CHECK(theta.data[0] == 1.25);
}

TEST_CASE("adam: minimizes a quadratic") {
  Tensor theta = Tensor::scalar(1.0);
  AdamState state = AdamState::init({theta}, 0.1);
  for (int i = 0; i < 200; ++i)
    adam_step({&theta}, {Tensor::scalar(2.0 * theta.data[0])}, state);
  CHECK(std::abs(theta.data[0]) < 1e-2);
}

TEST_CASE("adam: non-finite gradient rejected without touching parameters") {
  Tensor theta = Tensor::scalar(0.7);
  AdamState state = AdamState::init({theta}, 0.1);
  Tensor bad = Tensor::scalar(std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(adam_step({&theta}, {bad}, state), NumericalError);
  CHECK(theta.data[0] == 0.7);
  CHECK(state.step == 0);
}

TEST_CASE("training determinism: identical seeds give bit-identical parameters") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    LayerSpec spec{2, {8}, 1, Activation::kTanh, Activation::kLinear};
    MlpParams p = MlpParams::init(spec, rng);
    AdamState adam = AdamState::init([&] {
      std::vector<Tensor> v = p.weights;
      v.insert(v.end(), p.biases.begin(), p.biases.end());
      return v;
    }(), 1e-3);
    for (int step = 0; step < 50; ++step) {
      Tensor input(2, 4);
      for (double& v : input.data) v = rng.normal();
      Tape t;
      const MlpOnTape m = push_mlp(t, p, true);
      const int loss = t.sum_all(t.mul(mlp_forward(t, m, spec, t.constant(input)),
                                       mlp_forward(t, m, spec, t.constant(input))));
      const Gradients g = t.backward(loss);
      std::vector<Tensor> grads;
      for (int id : m.all()) grads.push_back(t.gradient(g, id));
      std::vector<Tensor*> params;
      for (Tensor& w : p.weights) params.push_back(&w);
      for (Tensor& b : p.biases) params.push_back(&b);
      adam_step(params, grads, adam);
    }
    return p;
  };
  const MlpParams a = run(42), b = run(42), c = run(43);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    CHECK(a.weights[l].data == b.weights[l].data);
    CHECK(a.biases[l].data == b.biases[l].data);
  }
  CHECK(a.weights[0].data != c.weights[0].data);
}

TEST_CASE("tape: non-finite results are rejected") {
  Tape t;
  const int x = t.constant(Tensor::scalar(0.0));
  CHECK_THROWS_AS(t.log(x), NumericalError);
  const int y = t.constant(Tensor::scalar(-1.0));
  CHECK_THROWS_AS(t.sqrt(y), NumericalError);
}
