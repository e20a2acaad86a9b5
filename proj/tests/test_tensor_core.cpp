#include <cmath>

#include "doctest.h"
#include "pidcnn/ops.hpp"
#include "pidcnn/optim.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace pidcnn;
using namespace pidcnn::testing;

namespace {

Tensor random_float(Rng& rng, Shape shape) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

// Per-channel mean and population variance over (N,T,H,W).
std::pair<std::vector<double>, std::vector<double>> channel_moments(const Tensor& y) {
  const auto& s = y.shape();
  const std::size_t block = s[2] * s[3] * s[4];
  std::vector<double> mean(s[1], 0.0), var(s[1], 0.0);
  for (std::size_t c = 0; c < s[1]; ++c) {
    for (std::size_t n = 0; n < s[0]; ++n)
      for (std::size_t i = 0; i < block; ++i) mean[c] += y[(n * s[1] + c) * block + i];
    mean[c] /= static_cast<double>(s[0] * block);
    for (std::size_t n = 0; n < s[0]; ++n)
      for (std::size_t i = 0; i < block; ++i) {
        const double d = y[(n * s[1] + c) * block + i] - mean[c];
        var[c] += d * d;
      }
    var[c] /= static_cast<double>(s[0] * block);
  }
  return {mean, var};
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("shape invariants") {
    Tensor t({2, 3, 4});
    CHECK(t.size() == 24);
    CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
    CHECK_THROWS_AS(Tensor({1, 1, 1, 1, 1, 1}), ShapeError);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<float>(3)), ShapeError);
    t.at({1, 2, 3}) = 5.0f;
    CHECK(t[23] == 5.0f);
    CHECK(t.reshaped({4, 6})[23] == 5.0f);
  }
}

TEST_SUITE("conv_ct33") {
  TEST_CASE("delta kernel is the identity") {
    Rng rng(1);
    Tape<float> tape;
    auto x = tape.constant(random_float(rng, {1, 1, 2, 5, 6}));
    Tensor w({1, 1, 1, 3, 3});
    w.at({0, 0, 0, 1, 1}) = 1.0f;
    auto y = conv_ct33(x, tape.constant(w), tape.constant(Tensor({1})));
    CHECK(y.value() == x.value());
  }

  TEST_CASE("zero kernel yields the bias everywhere") {
    Rng rng(2);
    Tape<float> tape;
    auto x = tape.constant(random_float(rng, {2, 3, 1, 4, 4}));
    auto y = conv_ct33(x, tape.constant(Tensor({2, 3, 1, 3, 3})), tape.constant(Tensor({2}, 1.5f)));
    for (float v : y.value().data()) CHECK(v == 1.5f);
  }

  TEST_CASE("random case matches the loop oracle") {
    Rng rng(3);
    Tape<float> tape;
    const Tensor xv = random_float(rng, {1, 2, 3, 8, 8});
    const Tensor wv = random_float(rng, {4, 2, 1, 3, 3});
    const Tensor bv = random_float(rng, {4});
    auto y = conv_ct33(tape.constant(xv), tape.constant(wv), tape.constant(bv));
    CHECK(y.shape() == Shape{1, 4, 3, 8, 8});
    CHECK(normwise_relative_difference(y.value(), naive_conv_ct33(xv, wv, bv)) < 1e-5);

    Tape<double> tape64;
    const Tensor64 x64 = xv.cast<double>(), w64 = wv.cast<double>(), b64 = bv.cast<double>();
    auto y64 = conv_ct33(tape64.constant(x64), tape64.constant(w64), tape64.constant(b64));
    CHECK(max_relative_difference(y64.value(), naive_conv_ct33(x64, w64, b64), 1e-12) < 1e-10);
  }

  TEST_CASE("channel mismatch is rejected with a diagnostic") {
    Tape<float> tape;
    auto x = tape.constant(Tensor({1, 3, 1, 4, 4}));
    auto w = tape.constant(Tensor({2, 2, 1, 3, 3}));
    auto b = tape.constant(Tensor({2}));
    try {
      conv_ct33(x, w, b);
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      CHECK(std::string(e.what()).find("Cin") != std::string::npos);
    }
  }

  TEST_CASE("gradient check") {
    Rng rng(4);
    const auto r = check_input_gradients(
        {random_tensor(rng, {2, 2, 2, 5, 4}), random_tensor(rng, {3, 2, 1, 3, 3}), random_tensor(rng, {3})},
        [](Tape<double>& t, const std::vector<Traced64>& in) { return weighted_sum(t, conv_ct33(in[0], in[1], in[2]), 9); });
    INFO(r.worst);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_SUITE("batch_norm") {
  TEST_CASE("train mode standardises each channel") {
    Rng rng(5);
    Tape<float> tape;
    Tensor x = random_float(rng, {4, 3, 2, 5, 5});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] * 3.0f + 7.0f;
    RunningStats<float> stats;
    auto y = batch_norm(tape.constant(x), tape.constant(Tensor({3}, 1.0f)), tape.constant(Tensor({3})), stats);
    auto [mean, var] = channel_moments(y.value());
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(std::abs(mean[c]) < 1e-5);
      CHECK(std::abs(var[c] - 1.0) < 1e-4);  // epsilon 1e-5 shrinks var by ~1e-5/var(x)
    }
    REQUIRE(stats.mean);
    CHECK((*stats.mean)[0] != 0.0f);  // momentum blend moved away from the initial 0
  }

  TEST_CASE("affine parameters set mean and spread") {
    Rng rng(6);
    Tensor x = random_float(rng, {8, 2, 1, 6, 6});
    // standardise first
    {
      Tape<float> tape;
      RunningStats<float> s;
      x = batch_norm(tape.constant(x), tape.constant(Tensor({2}, 1.0f)), tape.constant(Tensor({2})), s).value();
    }
    Tape<float> tape;
    RunningStats<float> stats;
    auto y = batch_norm(tape.constant(x), tape.constant(Tensor({2}, 2.0f)), tape.constant(Tensor({2}, 3.0f)), stats);
    auto [mean, var] = channel_moments(y.value());
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(mean[c] == doctest::Approx(3.0).epsilon(1e-5));
      CHECK(std::sqrt(var[c]) == doctest::Approx(2.0).epsilon(1e-4));
    }
  }

  TEST_CASE("eval mode without running statistics is an error") {
    Tape<float> tape;
    RunningStats<float> empty;
    CHECK_THROWS_WITH_AS(batch_norm(tape.constant(Tensor({1, 2, 1, 2, 2})), tape.constant(Tensor({2}, 1.0f)),
                                    tape.constant(Tensor({2})), empty, {Mode::eval}),
                         doctest::Contains("initialise"), std::logic_error);
  }

  TEST_CASE("train mode needs two values per channel") {
    Tape<float> tape;
    RunningStats<float> stats;
    CHECK_THROWS_AS(batch_norm(tape.constant(Tensor({1, 2, 1, 1, 1})), tape.constant(Tensor({2}, 1.0f)),
                               tape.constant(Tensor({2})), stats),
                    ShapeError);
  }

  TEST_CASE("gradient check, train mode") {
    Rng rng(7);
    const auto r = check_input_gradients(
        {random_tensor(rng, {2, 3, 1, 4, 4}), random_tensor(rng, {3}, 0.5, 1.5), random_tensor(rng, {3})},
        [](Tape<double>& t, const std::vector<Traced64>& in) {
          RunningStats<double> stats;
          return weighted_sum(t, batch_norm(in[0], in[1], in[2], stats), 11);
        });
    INFO(r.worst);
    CHECK(r.max_rel_error < 1e-4);
  }

  TEST_CASE("gradient check, eval mode") {
    Rng rng(8);
    const auto r = check_input_gradients(
        {random_tensor(rng, {2, 3, 2, 3, 3}), random_tensor(rng, {3}, 0.5, 1.5), random_tensor(rng, {3})},
        [](Tape<double>& t, const std::vector<Traced64>& in) {
          RunningStats<double> stats{Tensor64({3}, std::vector<double>{0.1, -0.2, 0.3}),
                                     Tensor64({3}, std::vector<double>{0.5, 1.0, 2.0})};
          return weighted_sum(t, batch_norm(in[0], in[1], in[2], stats, {Mode::eval}), 12);
        });
    INFO(r.worst);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_SUITE("activations") {
  TEST_CASE("prelu compresses negatives and keeps positives") {
    Tape<float> tape;
    auto x = tape.constant(Tensor({1, 1, 1, 1, 2}, std::vector<float>{-5.0f, 7.0f}));
    auto y = prelu(x, tape.constant(Tensor({1}, 0.2f)));
    CHECK(y.value()[0] == doctest::Approx(-1.0));
    CHECK(y.value()[1] == 7.0f);
  }

  TEST_CASE("prelu is invertible for positive alpha") {
    Rng rng(9);
    Tape<double> tape;
    const Tensor64 xv = random_tensor(rng, {2, 3, 1, 4, 4}, -10.0, 10.0);
    const Tensor64 alpha({3}, std::vector<double>{0.2, 0.25, 0.7});
    auto y = prelu(tape.constant(xv), tape.constant(alpha));
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const double v = y.value()[i];
      const double back = v >= 0 ? v : v / alpha[(i / 16) % 3];
      CHECK(std::abs(back - xv[i]) < 1e-6);
    }
  }

  TEST_CASE("prelu channel count must match alpha") {
    Tape<float> tape;
    CHECK_THROWS_AS(prelu(tape.constant(Tensor({1, 3, 1, 2, 2})), tape.constant(Tensor({2}))), ShapeError);
  }

  TEST_CASE("prelu gradient check") {
    Rng rng(10);
    const auto r = check_input_gradients({random_away_from_zero(rng, {2, 3, 2, 3, 3}, 1e-3), random_tensor(rng, {3})},
                                         [](Tape<double>& t, const std::vector<Traced64>& in) {
                                           return weighted_sum(t, prelu(in[0], in[1]), 13);
                                         });
    CHECK(r.max_rel_error < 1e-4);
  }

  TEST_CASE("relu values and gradient") {
    Tape<float> tape;
    auto y = relu(tape.constant(Tensor({2}, std::vector<float>{-3.0f, 4.0f})));
    CHECK(y.value()[0] == 0.0f);
    CHECK(y.value()[1] == 4.0f);

    Rng rng(11);
    const auto r = check_input_gradients({random_away_from_zero(rng, {2, 2, 1, 4, 4}, 1e-3)},
                                         [](Tape<double>& t, const std::vector<Traced64>& in) {
                                           return weighted_sum(t, relu(in[0]), 14);
                                         });
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_SUITE("pooling") {
  TEST_CASE("average of a constant is the constant") {
    Tape<float> tape;
    auto y = avg_pool2(tape.constant(Tensor({1, 2, 1, 4, 6}, 3.25f)));
    CHECK(y.shape() == Shape{1, 2, 1, 2, 3});
    for (float v : y.value().data()) CHECK(v == 3.25f);
  }

  TEST_CASE("2x2 window arithmetic") {
    Tape<float> tape;
    auto x = tape.constant(Tensor({1, 1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4}));
    CHECK(avg_pool2(x).value()[0] == 2.5f);
    CHECK(max_pool2(x).value()[0] == 4.0f);
    CHECK(max_pool2(tape.constant(Tensor({1, 1, 1, 2, 2}, -2.0f))).value()[0] == -2.0f);
  }

  TEST_CASE("average pooling equals the strided integral-kernel convolution") {
    Rng rng(12);
    Tape<double> tape;
    const Tensor64 xv = random_tensor(rng, {2, 3, 2, 8, 6});
    auto y = avg_pool2(tape.constant(xv));
    CHECK(max_relative_difference(y.value(), conv_integral_stride2(xv), 1e-9) < 1e-6);
  }

  TEST_CASE("odd extents are rejected") {
    Tape<float> tape;
    CHECK_THROWS_AS(avg_pool2(tape.constant(Tensor({1, 1, 1, 3, 4}))), ShapeError);
    CHECK_THROWS_AS(max_pool2(tape.constant(Tensor({1, 1, 1, 4, 5}))), ShapeError);
  }

  TEST_CASE("avg_pool2 gradient check") {
    Rng rng(13);
    const auto r = check_input_gradients({random_tensor(rng, {2, 2, 2, 4, 6})},
                                         [](Tape<double>& t, const std::vector<Traced64>& in) {
                                           return weighted_sum(t, avg_pool2(in[0]), 15);
                                         });
    CHECK(r.max_rel_error < 1e-4);
  }

  TEST_CASE("max_pool2 routes each window's gradient to one element") {
    Rng rng(14);
    Tape<double> tape;
    auto x = tape.leaf(random_tensor(rng, {1, 2, 1, 4, 4}));
    tape.backward(sum(max_pool2(x)));
    const auto& g = *x.grad();
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t wy = 0; wy < 2; ++wy)
        for (std::size_t wx = 0; wx < 2; ++wx) {
          int ones = 0;
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx) ones += g.at({0, c, 0, 2 * wy + dy, 2 * wx + dx}) == 1.0;
          CHECK(ones == 1);
        }

    // Ties: the first element in row-major order takes the gradient.
    Tape<double> tie;
    auto flat = tie.leaf(Tensor64({1, 1, 1, 2, 2}, 1.0));
    tie.backward(sum(max_pool2(flat)));
    CHECK(flat.grad()->values() == std::vector<double>{1.0, 0.0, 0.0, 0.0});

    // Distinct values at least 1e-3 apart so a finite-difference step never flips an argmax.
    Tensor64 distinct({2, 2, 1, 4, 4});
    std::vector<double> vals(distinct.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.01 * static_cast<double>(i) - 0.3;
    for (std::size_t i = vals.size(); i > 1; --i) std::swap(vals[i - 1], vals[rng.below(i)]);
    for (std::size_t i = 0; i < vals.size(); ++i) distinct[i] = vals[i];
    const auto r = check_input_gradients({distinct}, [](Tape<double>& t, const std::vector<Traced64>& in) {
      return weighted_sum(t, max_pool2(in[0]), 16);
    });
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_SUITE("concat") {
  TEST_CASE("layout, slicing and round trip") {
    Rng rng(15);
    Tape<float> tape;
    auto a = tape.constant(random_float(rng, {1, 2, 3, 4, 4}));
    auto b = tape.constant(random_float(rng, {1, 2, 3, 4, 4}));
    auto c = concat_channels(a, b);
    CHECK(c.shape() == Shape{1, 4, 3, 4, 4});
    CHECK(c.value().at({0, 2, 1, 3, 2}) == b.value().at({0, 0, 1, 3, 2}));
    CHECK(slice_channels(c, 0, 2).value() == a.value());
    CHECK(slice_channels(c, 2, 2).value() == b.value());
  }

  TEST_CASE("extent mismatch is rejected") {
    Tape<float> tape;
    CHECK_THROWS_AS(concat_channels(tape.constant(Tensor({1, 2, 1, 4, 4})), tape.constant(Tensor({1, 2, 1, 4, 2}))),
                    ShapeError);
    CHECK_THROWS_AS(concat_channels(tape.constant(Tensor({2, 2, 1, 4, 4})), tape.constant(Tensor({1, 2, 1, 4, 4}))),
                    ShapeError);
  }

  TEST_CASE("gradient splits between the parts") {
    Rng rng(16);
    const auto r = check_input_gradients({random_tensor(rng, {2, 1, 2, 2, 2}), random_tensor(rng, {2, 3, 2, 2, 2})},
                                         [](Tape<double>& t, const std::vector<Traced64>& in) {
                                           auto c = concat_channels(in[0], in[1]);
                                           return weighted_sum(t, mul(c, c), 17);
                                         });
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_SUITE("fully_connected") {
  TEST_CASE("identity and zero weights") {
    Rng rng(17);
    Tape<float> tape;
    auto x = tape.constant(random_float(rng, {3, 4}));
    Tensor eye({4, 4});
    for (std::size_t i = 0; i < 4; ++i) eye.at({i, i}) = 1.0f;
    CHECK(fully_connected(x, tape.constant(eye), tape.constant(Tensor({4}))).value() == x.value());

    const Tensor bias({2}, std::vector<float>{0.5f, -1.5f});
    auto y = fully_connected(x, tape.constant(Tensor({4, 2})), tape.constant(bias));
    for (std::size_t n = 0; n < 3; ++n) {
      CHECK(y.value().at({n, 0}) == 0.5f);
      CHECK(y.value().at({n, 1}) == -1.5f);
    }
  }

  TEST_CASE("random case matches dot products") {
    Rng rng(18);
    Tape<float> tape;
    const Tensor xv = random_float(rng, {5, 16}), wv = random_float(rng, {16, 3}), bv = random_float(rng, {3});
    auto y = fully_connected(tape.constant(xv), tape.constant(wv), tape.constant(bv));
    CHECK(normwise_relative_difference(y.value(), naive_affine(xv, wv, bv)) < 1e-5);
  }

  TEST_CASE("shape mismatch is rejected") {
    Tape<float> tape;
    CHECK_THROWS_AS(fully_connected(tape.constant(Tensor({2, 5})), tape.constant(Tensor({4, 3})),
                                    tape.constant(Tensor({3}))),
                    ShapeError);
    CHECK_THROWS_AS(fully_connected(tape.constant(Tensor({2, 4})), tape.constant(Tensor({4, 3})),
                                    tape.constant(Tensor({2}))),
                    ShapeError);
  }

  TEST_CASE("gradient check") {
    Rng rng(19);
    const auto r = check_input_gradients(
        {random_tensor(rng, {4, 6}), random_tensor(rng, {6, 3}), random_tensor(rng, {3})},
        [](Tape<double>& t, const std::vector<Traced64>& in) {
          return weighted_sum(t, fully_connected(in[0], in[1], in[2]), 18);
        });
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_SUITE("mse_loss") {
  TEST_CASE("values") {
    Tape<float> tape;
    const Tensor target({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
    CHECK(mse_loss(tape.constant(target), target).value()[0] == 0.0f);
    Tensor shifted = target;
    for (auto& v : shifted.data()) v += 1.0f;
    CHECK(mse_loss(tape.constant(shifted), target).value()[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(mse_loss(tape.constant(Tensor({3, 2})), target), ShapeError);
  }

  TEST_CASE("gradient check") {
    Rng rng(20);
    const Tensor64 target = random_tensor(rng, {4, 3});
    const auto r = check_input_gradients({random_tensor(rng, {4, 3})},
                                         [&](Tape<double>&, const std::vector<Traced64>& in) { return mse_loss(in[0], target); });
    CHECK(r.max_rel_error < 1e-6);
  }
}

TEST_SUITE("backward") {
  TEST_CASE("sum(w * x) gives grad(w) = x") {
    Rng rng(21);
    ParameterStore<float> store;
    auto& w = store.add("w", random_float(rng, {2, 3}));
    Tape<float> tape;
    const Tensor xv = random_float(rng, {2, 3});
    tape.backward(sum(mul(tape.parameter(w), tape.constant(xv))));
    REQUIRE(w.grad);
    CHECK(*w.grad == xv);
  }

  TEST_CASE("two uses of one parameter accumulate") {
    ParameterStore<float> store;
    auto& w = store.add("w", Tensor({1}, 0.7f));
    Tape<float> tape;
    auto a = tape.parameter(w);
    auto b = tape.parameter(w);
    CHECK(a.id() == b.id());
    tape.backward(sum(add(a, b)));
    CHECK((*w.grad)[0] == 2.0f);
  }

  TEST_CASE("bound but unreachable parameters get zero gradient") {
    ParameterStore<float> store;
    auto& used = store.add("used", Tensor({2}, 1.0f));
    auto& unused = store.add("unused", Tensor({3}, 1.0f));
    Tape<float> tape;
    auto u = tape.parameter(used);
    tape.parameter(unused);
    tape.backward(sum(u));
    REQUIRE(unused.grad);
    CHECK(*unused.grad == Tensor({3}));
  }

  TEST_CASE("non-scalar loss is rejected") {
    Tape<float> tape;
    auto x = tape.leaf(Tensor({2}));
    CHECK_THROWS_AS(tape.backward(x), ShapeError);
  }

  TEST_CASE("tape replay is deterministic") {
    auto run = [] {
      Rng rng(22);
      Tape<float> tape;
      auto x = tape.leaf(random_float(rng, {2, 2, 1, 4, 4}));
      auto w = tape.leaf(random_float(rng, {2, 2, 1, 3, 3}));
      auto b = tape.leaf(random_float(rng, {2}));
      RunningStats<float> st;
      auto y = avg_pool2(batch_norm(conv_ct33(x, w, b), tape.leaf(Tensor({2}, 1.0f)), tape.leaf(Tensor({2})), st));
      auto loss = sum(mul(y, y));
      tape.backward(loss);
      return std::make_pair(loss.value(), *w.grad());
    };
    const auto a = run(), b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}

TEST_SUITE("adam") {
  TEST_CASE("zero gradient leaves parameters unchanged") {
    ParameterStore<float> store;
    auto& p = store.add("p", Tensor({3}, std::vector<float>{1, -2, 3}));
    p.grad = Tensor({3});
    adam_step(store, AdamConfig{});
    CHECK(p.value == Tensor({3}, std::vector<float>{1, -2, 3}));
    CHECK(p.step == 1);
    CHECK(!p.grad);
  }

  TEST_CASE("first step moves by -lr * sign(g)") {
    for (double g : {0.3, -5.0}) {
      ParameterStore<double> store;
      auto& p = store.add("p", Tensor64({1}, 2.0));
      p.grad = Tensor64({1}, g);
      adam_step(store, AdamConfig{.learning_rate = 0.01});
      CHECK(p.value[0] - 2.0 == doctest::Approx(-0.01 * (g > 0 ? 1 : -1)).epsilon(1e-6));
    }
  }

  TEST_CASE("missing gradient names the parameter") {
    ParameterStore<float> store;
    store.add("alpha", Tensor({1}));
    CHECK_THROWS_WITH(adam_step(store, AdamConfig{}), doctest::Contains("alpha"));
    CHECK_THROWS(AdamConfig{.beta1 = 1.0}.validate());
    CHECK_THROWS(AdamConfig{.epsilon = 0.0}.validate());
  }

  TEST_CASE("minimises (w - 3)^2 like the scalar recurrence") {
    // Oracle: the textbook recurrence written out for one scalar.
    double w_ref = 0.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 100; ++t) {
      const double g = 2.0 * (w_ref - 3.0);
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      w_ref -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    }

    ParameterStore<double> store;
    auto& w = store.add("w", Tensor64({1}, 0.0));
    for (int t = 0; t < 100; ++t) {
      Tape<double> tape;
      auto wv = tape.parameter(w);
      auto d = sub(wv, tape.constant(Tensor64({1}, 3.0)));
      tape.backward(mul(d, d));
      adam_step(store, AdamConfig{.learning_rate = 0.1});
    }
    CHECK(w.value[0] == doctest::Approx(w_ref).epsilon(1e-12));
    CHECK(std::abs(w.value[0] - 3.0) < 0.05);
  }
}
