#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "hlwnet/error.hpp"
#include "hlwnet/neural.hpp"

using namespace hlwnet;
using doctest::Approx;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Plain nested-loop forward pass, independent of the library's layer code.
std::vector<double> hand_forward(const Mlp& m, std::vector<double> x) {
  const auto& acts = m.spec().activations;
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    const DenseLayer& L = m.layers()[l];
    std::vector<double> z(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      double s = L.b[o];
      for (std::size_t i = 0; i < L.in; ++i) s += L.w[o * L.in + i] * x[i];
      z[o] = s;
    }
    switch (acts[l]) {
      case Activation::ReLU:
        for (double& v : z) v = v > 0 ? v : 0;
        break;
      case Activation::Sigmoid:
        for (double& v : z) v = sigmoid(v);
        break;
      case Activation::Softmax: {
        double mx = z[0], sum = 0;
        for (double v : z) mx = std::max(mx, v);
        for (double& v : z) sum += (v = std::exp(v - mx));
        for (double& v : z) v /= sum;
        break;
      }
      case Activation::Identity:
        break;
    }
    x = z;
  }
  return x;
}

MlpSpec msnn_spec() {
  return {{3, 16, 4, 1}, {Activation::ReLU, Activation::ReLU, Activation::Sigmoid}, LossKind::MSE};
}

void check_finite_differences(Mlp m, const std::vector<double>& x, const std::vector<double>& y) {
  Mlp::Cache cache;
  m.forward_cached(x, cache);
  Gradients g = m.make_gradients();
  m.backward(cache, y, g);
  std::vector<double> flat;
  for (std::size_t l = 0; l < g.dw.size(); ++l) {
    flat.insert(flat.end(), g.dw[l].begin(), g.dw[l].end());
    flat.insert(flat.end(), g.db[l].begin(), g.db[l].end());
  }
  REQUIRE(flat.size() == m.parameter_count());
  const double h = 1e-5;
  double worst = 0;
  for (std::size_t i = 0; i < m.parameter_count(); ++i) {
    const double p0 = m.parameter(i);
    m.parameter(i) = p0 + h;
    const double up = sample_loss(m.spec().loss, m.forward(x), y);
    m.parameter(i) = p0 - h;
    const double down = sample_loss(m.spec().loss, m.forward(x), y);
    m.parameter(i) = p0;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - flat[i]) / std::max({std::abs(fd), std::abs(flat[i]), 1e-3}));
  }
  CHECK(worst <= 1e-5);
}

}  // namespace

TEST_SUITE("neural") {

TEST_CASE("zero model outputs one half") {
  const Mlp m = Mlp::zeros(msnn_spec());
  const std::vector<double> x{0.3, -2, 7};
  CHECK(m.forward(x)[0] == 0.5);
}

TEST_CASE("negative ReLU pre-activation contributes nothing") {
  Mlp m = Mlp::zeros({{1, 1, 1}, {Activation::ReLU, Activation::Identity}, LossKind::MSE});
  m.layers()[0].w = {1.0};
  m.layers()[0].b = {-5.0};
  m.layers()[1].w = {3.0};
  const std::vector<double> x{2.0};
  CHECK(m.forward(x)[0] == 0.0);
  const std::vector<double> x2{7.0};
  CHECK(m.forward(x2)[0] == Approx(6.0));
}

TEST_CASE("forward pass matches a hand-rolled evaluation") {
  const Mlp m(msnn_spec(), 42);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    CHECK(m.forward(x)[0] == Approx(hand_forward(m, x)[0]).epsilon(1e-12));
  }
  const Mlp s({{4, 6, 5}, {Activation::Sigmoid, Activation::Softmax}, LossKind::CrossEntropy}, 9);
  const std::vector<double> x{0.1, 0.2, -0.3, 0.9};
  const std::vector<double> a = s.forward(x), b = hand_forward(s, x);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Approx(b[i]).epsilon(1e-12));
  CHECK_THROWS_AS(m.forward(std::vector<double>{1, 2}), ModelError);
}

TEST_CASE("mean squared error") {
  const std::vector<double> p{1, 2, 3};
  CHECK(mse_loss(p, p) == 0.0);
  CHECK(mse_loss(std::vector<double>{0}, std::vector<double>{1}) == 1.0);
  CHECK(mse_loss(std::vector<double>{1, 2, 3}, std::vector<double>{2, 0, 3}) == Approx(5.0 / 3));
  CHECK_THROWS(mse_loss(std::vector<double>{}, std::vector<double>{}));
  CHECK_THROWS(mse_loss(std::vector<double>{1}, std::vector<double>{1, 2}));
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    check_finite_differences(Mlp(msnn_spec(), seed), {u(rng), u(rng), u(rng)}, {0.5 * (u(rng) + 1)});
    check_finite_differences(Mlp({{2, 5, 3}, {Activation::Sigmoid, Activation::Identity}, LossKind::MSE}, seed),
                             {u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
    check_finite_differences(
        Mlp({{4, 7, 5}, {Activation::Sigmoid, Activation::Softmax}, LossKind::CrossEntropy}, seed),
        {u(rng), u(rng), u(rng), u(rng)}, {0, 0, 1, 0, 0});
  }
}

TEST_CASE("gradient is zero at a perfect fit") {
  const Mlp m(msnn_spec(), 5);
  const std::vector<double> x{0.2, 0.4, 0.6};
  const std::vector<double> y = m.forward(x);
  Mlp::Cache c;
  m.forward_cached(x, c);
  Gradients g = m.make_gradients();
  m.backward(c, y, g);
  for (const auto& v : g.dw) for (double d : v) CHECK(d == 0.0);
  for (const auto& v : g.db) for (double d : v) CHECK(d == 0.0);
}

TEST_CASE("bias-only gradient by hand") {
  Mlp m = Mlp::zeros({{1, 1}, {Activation::Sigmoid}, LossKind::MSE});
  m.layers()[0].b = {0.7};
  const std::vector<double> x{0.0}, y{0.2};
  Mlp::Cache c;
  m.forward_cached(x, c);
  Gradients g = m.make_gradients();
  m.backward(c, y, g);
  const double p = sigmoid(0.7);
  CHECK(g.db[0][0] == Approx(2 * (p - 0.2) * p * (1 - p)).epsilon(1e-12));
  CHECK(g.dw[0][0] == 0.0);
}

TEST_CASE("Adam") {
  Mlp m = Mlp::zeros({{1, 1}, {Activation::Identity}, LossKind::MSE});
  SUBCASE("zero gradient leaves parameters") {
    Adam opt(m, {});
    opt.step(m, m.make_gradients());
    CHECK(m.layers()[0].b[0] == 0.0);
    CHECK(m.layers()[0].w[0] == 0.0);
  }
  SUBCASE("first step has magnitude eta") {
    Adam opt(m, {.learning_rate = 0.01});
    Gradients g = m.make_gradients();
    g.db[0][0] = -37.0;
    g.dw[0][0] = 1e-3;
    opt.step(m, g);
    CHECK(m.layers()[0].b[0] == Approx(0.01).epsilon(1e-6));
    CHECK(m.layers()[0].w[0] == Approx(-0.01).epsilon(1e-4));
  }
  SUBCASE("converges on a quadratic") {
    Adam opt(m, {.learning_rate = 0.1});
    for (int k = 0; k < 200; ++k) {
      Gradients g = m.make_gradients();
      g.db[0][0] = 2 * (m.layers()[0].b[0] - 3.0);
      opt.step(m, g);
    }
    CHECK(std::abs(m.layers()[0].b[0] - 3.0) < 1e-3);
  }
}

TEST_CASE("training fits a constant label") {
  Mlp m(msnn_spec(), 4);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> x, y;
  for (int i = 0; i < 200; ++i) {
    x.push_back({u(rng), u(rng), u(rng)});
    y.push_back({0.3});
  }
  const TrainHistory h = train(m, x, y, {.epochs = 60, .batch_size = 8, .learning_rate = 1e-2, .patience = 0});
  REQUIRE(h.val_loss.size() == 60);
  CHECK(h.val_loss.back() < 1e-4);
  CHECK(h.best_epoch >= 0);
}

TEST_CASE("normalizer") {
  const Normalizer n = Normalizer::fit({{0, 10}, {4, 20}, {2, 15}});
  CHECK(n.normalize(0, 2) == Approx(0.5));
  CHECK(n.normalize(1, 20) == Approx(1.0));
  CHECK(n.denormalize(1, 0.5) == Approx(15));
}

TEST_CASE("model file round trip") {
  ModelFile f;
  f.model = Mlp(msnn_spec(), 17);
  f.input_norm = Normalizer::fit({{0.1, -3, 2}, {0.7, 5, 9}});
  f.meta["type"] = "III";
  std::stringstream ss;
  write_model(ss, f);
  const ModelFile g = read_model(ss);
  REQUIRE(g.model.layers().size() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(g.model.layers()[l].w == f.model.layers()[l].w);
    CHECK(g.model.layers()[l].b == f.model.layers()[l].b);
  }
  CHECK(g.model.spec().activations == f.model.spec().activations);
  REQUIRE(g.input_norm.has_value());
  CHECK(g.input_norm->lo == f.input_norm->lo);
  CHECK(g.input_norm->hi == f.input_norm->hi);
  CHECK(g.meta.at("type") == "III");
  std::stringstream bad("not a model");
  CHECK_THROWS_AS(read_model(bad), FormatError);
}

}
