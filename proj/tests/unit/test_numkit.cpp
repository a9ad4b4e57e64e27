// Copyright 2026 The unsupseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "checks.hpp"
#include "unsupseg/errors.hpp"
#include "unsupseg/numkit/adam.hpp"
#include "unsupseg/numkit/grad_check.hpp"
#include "unsupseg/numkit/layers.hpp"
#include "unsupseg/numkit/tensor.hpp"
#include "unsupseg/rng.hpp"

using namespace unsupseg;
using numkit::Mode;
using numkit::Parameter;
using numkit::Tensor;

namespace {

constexpr int kSeeds = 32;

// Direct double loop over the definition.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b,
                          std::size_t stride) {
  const std::size_t c_out = w.dim(0), c_in = w.dim(1), k = w.dim(2);
  const std::size_t out_len = (x.dim(1) - k) / stride + 1;
  Tensor<double> y({c_out, out_len});
  for (std::size_t c = 0; c < c_out; ++c)
    for (std::size_t t = 0; t < out_len; ++t) {
      double s = b[c];
      for (std::size_t ci = 0; ci < c_in; ++ci)
        for (std::size_t j = 0; j < k; ++j) s += w(c, ci, j) * x(ci, t * stride + j);
      y(c, t) = s;
    }
  return y;
}

double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  REQUIRE(a.shape() == b.shape());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("tensor shapes must be positive and match the data") {
  CHECK_THROWS_AS(Tensor<float>({0, 3}), ContractError);
  CHECK_THROWS_AS(Tensor<float>({2, 2}, std::vector<float>(3)), ContractError);
  Tensor<float> t({2, 3}, 1.5f);
  CHECK(t.size() == 6);
  CHECK(t.all_finite());
  t[4] = std::numeric_limits<float>::quiet_NaN();
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("conv1d sliding window over 1..10") {
  Tensor<double> x({1, 10});
  for (std::size_t i = 0; i < 10; ++i) x[i] = static_cast<double>(i + 1);
  const Tensor<double> w({1, 1, 3}, 1.0);
  const Tensor<double> b({1}, 0.0);
  const Tensor<double> y = numkit::conv1d_forward(x, w, b, 2);
  REQUIRE(y.shape() == numkit::Shape{1, 4});
  CHECK(y[0] == 6.0);
  CHECK(y[1] == 12.0);
  CHECK(y[2] == 18.0);
  CHECK(y[3] == 24.0);
}

TEST_CASE("conv1d identity kernel") {
  Rng rng(3);
  const Tensor<double> x = testing::random_tensor({1, 17}, rng);
  const Tensor<double> w({1, 1, 1}, 1.0);
  CHECK(numkit::conv1d_forward(x, w, Tensor<double>({1}, 0.0), 1) == x);
  const Tensor<double> g = testing::random_tensor({1, 17}, rng);
  CHECK(numkit::conv1d_backward(g, x, w, 1).input == g);
}

TEST_CASE("conv1d matches direct summation") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng(derive_seed(seed, "conv-direct"));
    const std::size_t c_in = 1 + rng.below(5), c_out = 1 + rng.below(20);
    const std::size_t k = 1 + rng.below(10), stride = 1 + rng.below(5);
    const std::size_t length = k + rng.below(80);
    const Tensor<double> x = testing::random_tensor({c_in, length}, rng);
    const Tensor<double> w = testing::random_tensor({c_out, c_in, k}, rng);
    const Tensor<double> b = testing::random_tensor({c_out}, rng);
    CHECK(max_abs_diff(numkit::conv1d_forward(x, w, b, stride), naive_conv(x, w, b, stride)) < 1e-12);

    const Tensor<float> y32 = numkit::conv1d_forward(x.cast<float>(), w.cast<float>(), b.cast<float>(), stride);
    CHECK(max_abs_diff(y32.cast<double>(), naive_conv(x, w, b, stride)) < 1e-4);
  }
}

TEST_CASE("conv output length formula holds for every small configuration") {
  for (std::size_t length = 1; length <= 64; ++length) {
    for (std::size_t k = 1; k <= length; ++k) {
      for (std::size_t s = 1; s <= k; ++s) {
        std::size_t windows = 0;
        for (std::size_t start = 0; start + k <= length; start += s) ++windows;
        REQUIRE(numkit::conv_out_length(length, k, s) == windows);
      }
    }
  }
}

TEST_CASE("conv shorter than its kernel reports the required length") {
  try {
    numkit::conv_out_length(3, 4, 1);
    FAIL("expected InputTooShortError");
  } catch (const InputTooShortError& e) {
    CHECK(e.required() == 4);
  }
  CHECK_THROWS_AS(numkit::conv1d_forward(Tensor<double>({1, 3}), Tensor<double>({1, 1, 4}), 1), InputTooShortError);
}

TEST_CASE("default stack lengths for one second") {
  const std::size_t kernels[] = {10, 8, 4, 4, 4};
  const std::size_t strides[] = {5, 4, 2, 2, 2};
  const std::size_t expected[] = {3199, 798, 398, 198, 98};
  std::size_t length = 16000;
  for (int l = 0; l < 5; ++l) {
    length = numkit::conv_out_length(length, kernels[l], strides[l]);
    CHECK(length == expected[l]);
  }
}

TEST_CASE("conv backward with zero upstream gradient is zero") {
  Rng rng(11);
  const Tensor<double> x = testing::random_tensor({2, 13}, rng);
  const Tensor<double> w = testing::random_tensor({3, 2, 4}, rng);
  const auto g = numkit::conv1d_backward(Tensor<double>({3, 5}), x, w, 2);
  CHECK(g.input == Tensor<double>({2, 13}));
  CHECK(g.weight == Tensor<double>({3, 2, 4}));
  CHECK(g.bias == Tensor<double>({3}));
}

TEST_CASE("conv backward rejects mismatched shapes") {
  const Tensor<double> x({2, 13}), w({3, 2, 4});
  CHECK_THROWS_AS(numkit::conv1d_backward(Tensor<double>({3, 6}), x, w, 2), ContractError);
  CHECK_THROWS_AS(numkit::conv1d_backward(Tensor<double>({2, 5}), x, w, 2), ContractError);
  CHECK_THROWS_AS(numkit::conv1d_forward(x, Tensor<double>({3, 1, 4}), 2), ContractError);
}

TEST_CASE("conv gradients on a 2x13 input with k=4, stride 2") {
  Rng rng(2024);
  std::vector<Parameter<double>> p;
  p.emplace_back("input", testing::random_tensor({2, 13}, rng));
  p.emplace_back("weight", testing::random_tensor({3, 2, 4}, rng));
  p.emplace_back("bias", testing::random_tensor({3}, rng));
  const Tensor<double> r = testing::random_tensor({3, 5}, rng);
  auto loss = [&] {
    const Tensor<double> y = numkit::conv1d_forward(p[0].value, p[1].value, p[2].value, 2);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
    return s;
  };
  auto analytic = [&] {
    auto g = numkit::conv1d_backward(r, p[0].value, p[1].value, 2);
    p[0].grad = g.input;
    p[1].grad = g.weight;
    p[2].grad = g.bias;
  };
  std::vector<Parameter<double>*> ptrs{&p[0], &p[1], &p[2]};
  numkit::GradCheckOptions options;
  options.tol = 1e-6;
  const auto report = numkit::grad_check(loss, analytic, ptrs, options);
  CHECK(report.passed());
  CHECK(report.max_rel_error() < 1e-6);
}

TEST_CASE("every layer primitive matches central differences across seeds") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    CAPTURE(seed);
    CHECK(testing::check_conv1d(seed, true).max_rel_error() < 1e-5);
    CHECK(testing::check_conv1d(seed, false).max_rel_error() < 1e-5);
    CHECK(testing::check_batchnorm(seed, Mode::kTrain).max_rel_error() < 1e-5);
    CHECK(testing::check_batchnorm(seed, Mode::kEval).max_rel_error() < 1e-5);
    CHECK(testing::check_leaky_relu(seed).max_rel_error() < 1e-8);
    CHECK(testing::check_linear(seed).max_rel_error() < 1e-6);
  }
}

TEST_CASE("batch norm of a constant channel is zero in train mode") {
  const Tensor<double> x({2, 7}, 3.25);
  auto stats = numkit::BatchNormState<double>::fresh(2);
  const Tensor<double> y = numkit::batchnorm(x, Tensor<double>({2}, 1.0), Tensor<double>({2}, 0.0), stats,
                                             Mode::kTrain, numkit::BatchNormOptions{});
  for (double v : y.data()) CHECK(v == 0.0);
}

TEST_CASE("batch norm leaves standardized input unchanged") {
  Rng rng(5);
  Tensor<double> x = testing::random_tensor({3, 50}, rng);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (double v : x.row(c)) mean += v;
    mean /= 50.0;
    for (double v : x.row(c)) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / 50.0);
    for (double& v : x.row(c)) v = (v - mean) / sd;
  }
  auto stats = numkit::BatchNormState<double>::fresh(3);
  const Tensor<double> y = numkit::batchnorm(x, Tensor<double>({3}, 1.0), Tensor<double>({3}, 0.0), stats,
                                             Mode::kTrain, numkit::BatchNormOptions{0.1, 1e-12});
  CHECK(max_abs_diff(x, y) < 1e-4);
}

TEST_CASE("batch norm pools statistics over the batch and tracks them by EMA") {
  Rng rng(8);
  const Tensor<double> a = testing::random_tensor({2, 5}, rng, -3.0, 3.0);
  const Tensor<double> b = testing::random_tensor({2, 9}, rng, -3.0, 3.0);
  const std::vector<Tensor<double>> batch{a, b};
  auto stats = numkit::BatchNormState<double>::fresh(2);
  const numkit::BatchNormOptions options{0.1, 1e-5};
  const auto y = numkit::batchnorm_train<double>(batch, Tensor<double>({2}, 1.0), Tensor<double>({2}, 0.0), stats,
                                                 options, nullptr);
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> pooled;
    for (double v : a.row(c)) pooled.push_back(v);
    for (double v : b.row(c)) pooled.push_back(v);
    double mean = 0.0;
    for (double v : pooled) mean += v;
    mean /= static_cast<double>(pooled.size());
    double ss = 0.0;
    for (double v : pooled) ss += (v - mean) * (v - mean);
    const double biased = ss / static_cast<double>(pooled.size());
    const double unbiased = ss / static_cast<double>(pooled.size() - 1);
    CHECK(stats.running_mean[c] == doctest::Approx(0.1 * mean).epsilon(1e-12));
    CHECK(stats.running_var[c] == doctest::Approx(0.9 + 0.1 * unbiased).epsilon(1e-12));
    CHECK(y[1](c, 3) == doctest::Approx((b(c, 3) - mean) / std::sqrt(biased + 1e-5)).epsilon(1e-12));
  }
  CHECK(stats.updates == 1);
}

TEST_CASE("batch norm in eval mode without tracked statistics warns and uses (0, 1)") {
  std::vector<std::string> warnings;
  numkit::set_warning_handler([&](std::string_view m) { warnings.emplace_back(m); });
  const Tensor<double> x({1, 3}, std::vector<double>{1.0, -2.0, 0.5});
  auto stats = numkit::BatchNormState<double>::fresh(1);
  const Tensor<double> y = numkit::batchnorm(x, Tensor<double>({1}, 2.0), Tensor<double>({1}, 0.25), stats,
                                             Mode::kEval, numkit::BatchNormOptions{});
  numkit::set_warning_handler(nullptr);
  CHECK(warnings.size() == 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(2.0 * x[i] / std::sqrt(1.0 + 1e-5) + 0.25));
}

TEST_CASE("leaky relu values and slopes") {
  const Tensor<double> x({1, 3}, std::vector<double>{2.0, -1.0, 0.0});
  const Tensor<double> y = numkit::leaky_relu_forward(x, 0.01);
  CHECK(y[0] == 2.0);
  CHECK(y[1] == doctest::Approx(-0.01));
  CHECK(y[2] == 0.0);
  const Tensor<double> g = numkit::leaky_relu_backward(Tensor<double>({1, 3}, 1.0), x, 0.01);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == doctest::Approx(0.01));
}

TEST_CASE("linear projection") {
  Rng rng(4);
  const Tensor<double> x = testing::random_tensor({3, 6}, rng);
  Tensor<double> eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
  CHECK(numkit::linear_forward(x, eye, Tensor<double>({3})) == x);

  const Tensor<double> col({3, 1}, std::vector<double>{1.0, 2.0, 3.0});
  const Tensor<double> y = numkit::linear_forward(col, Tensor<double>({1, 3}, 1.0), Tensor<double>({1}));
  CHECK(y[0] == 6.0);
  CHECK_THROWS_AS(numkit::linear_forward(x, Tensor<double>({2, 4}), Tensor<double>({2})), ContractError);
}

TEST_CASE("matmul result of an element does not depend on the matrix size") {
  Rng rng(12);
  const std::size_t k = 300;
  const Tensor<float> a = testing::random_tensor({13, k}, rng).cast<float>();
  const Tensor<float> b = testing::random_tensor({k, 41}, rng).cast<float>();
  std::vector<float> full(13 * 41, 0.0f);
  numkit::matmul_accumulate<float>(a.data(), b.data(), full, 13, k, 41);
  for (std::size_t r : {0u, 5u, 12u}) {
    std::vector<float> row(41, 0.0f);
    numkit::matmul_accumulate<float>(a.data().subspan(r * k, k), b.data(), row, 1, k, 41);
    for (std::size_t c = 0; c < 41; ++c) REQUIRE(row[c] == full[r * 41 + c]);
  }
}

TEST_CASE("adam first step moves by lr times the gradient sign") {
  Parameter<double> p("theta", Tensor<double>({1}, 0.0));
  p.grad[0] = 1.0;
  std::vector<Parameter<double>*> ptrs{&p};
  numkit::adam_step<double>(ptrs, numkit::AdamOptions{});
  CHECK(std::fabs(p.value[0] + 1e-4) < 1e-8);
  CHECK(p.step_count == 1);
  CHECK(p.grad[0] == 0.0);
}

TEST_CASE("adam with zero gradients leaves values unchanged") {
  Rng rng(1);
  Parameter<double> p("theta", testing::random_tensor({4, 3}, rng));
  const Tensor<double> before = p.value;
  std::vector<Parameter<double>*> ptrs{&p};
  for (int i = 0; i < 3; ++i) numkit::adam_step<double>(ptrs, numkit::AdamOptions{});
  CHECK(p.value == before);
  CHECK(p.step_count == 3);
}

TEST_CASE("adam matches a scalar reference over consecutive steps") {
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8, g = -0.37;
  Parameter<double> p("theta", Tensor<double>({1}, 0.5));
  std::vector<Parameter<double>*> ptrs{&p};
  double theta = 0.5, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double m_hat = m / (1 - std::pow(b1, t));
    const double v_hat = v / (1 - std::pow(b2, t));
    theta -= lr * m_hat / (std::sqrt(v_hat) + eps);
    p.grad[0] = g;
    numkit::adam_step<double>(ptrs, numkit::AdamOptions{lr, b1, b2, eps});
    CHECK(std::fabs(p.value[0] - theta) < 1e-10);
  }
}

TEST_CASE("adam step size stays within lr under a constant gradient") {
  Rng rng(6);
  Parameter<double> p("theta", testing::random_tensor({16}, rng));
  const Tensor<double> g = testing::random_tensor({16}, rng, -5.0, 5.0);
  std::vector<Parameter<double>*> ptrs{&p};
  const double lr = 1e-4;
  for (int step = 0; step < 100; ++step) {
    const Tensor<double> before = p.value;
    p.grad = g;
    numkit::adam_step<double>(ptrs, numkit::AdamOptions{lr});
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::fabs(p.value[i] - before[i]) <= lr * (1.0 + 1e-6));
  }
}

TEST_CASE("adam aborts on a non-finite gradient and names the parameter") {
  Parameter<double> a("good", Tensor<double>({2}, 1.0));
  Parameter<double> b("bad", Tensor<double>({2}, 1.0));
  a.grad[0] = 0.5;
  b.grad[1] = std::numeric_limits<double>::infinity();
  std::vector<Parameter<double>*> ptrs{&a, &b};
  try {
    numkit::adam_step<double>(ptrs, numkit::AdamOptions{});
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("bad") != std::string::npos);
  }
  CHECK(a.value == Tensor<double>({2}, 1.0));
  CHECK(a.step_count == 0);
}

TEST_CASE("grad_check on a quadratic") {
  Rng rng(9);
  Parameter<double> p("theta", testing::random_tensor({10}, rng));
  auto loss = [&] {
    double s = 0.0;
    for (double v : p.value.data()) s += 0.5 * v * v;
    return s;
  };
  auto analytic = [&] { p.grad = p.value; };
  std::vector<Parameter<double>*> ptrs{&p};
  CHECK(numkit::grad_check(loss, analytic, ptrs).max_rel_error() < 1e-8);
}

TEST_CASE("grad_check reports a doubled weight gradient") {
  Rng rng(10);
  std::vector<Parameter<double>> p;
  p.emplace_back("input", testing::random_tensor({3, 5}, rng));
  p.emplace_back("weight", testing::random_tensor({2, 3}, rng));
  p.emplace_back("bias", testing::random_tensor({2}, rng));
  const Tensor<double> r = testing::random_tensor({2, 5}, rng);
  auto loss = [&] {
    const Tensor<double> y = numkit::linear_forward(p[0].value, p[1].value, p[2].value);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
    return s;
  };
  auto analytic = [&] {
    auto g = numkit::linear_backward(r, p[0].value, p[1].value);
    p[0].grad = g.input;
    for (double& v : g.weight.data()) v *= 2.0;
    p[1].grad = g.weight;
    p[2].grad = g.bias;
  };
  std::vector<Parameter<double>*> ptrs{&p[0], &p[1], &p[2]};
  const auto report = numkit::grad_check(loss, analytic, ptrs);
  CHECK_FALSE(report.passed());
  CHECK(report.find("weight")->max_rel_error == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(report.find("input")->max_rel_error < 1e-8);
}

TEST_CASE("grad_check retries coordinates that straddle a kink") {
  // |x| at x = 5e-4: the ±1e-3 evaluations sit on opposite sides of 0.
  Parameter<double> p("x", Tensor<double>({1}, 5e-4));
  auto loss = [&] { return std::fabs(p.value[0]); };
  auto analytic = [&] { p.grad[0] = 1.0; };
  std::vector<Parameter<double>*> ptrs{&p};
  numkit::GradCheckOptions options;
  options.region = [&] { return p.value[0] > 0.0 ? 1u : 0u; };
  options.fallback_steps = {1e-4};
  const auto report = numkit::grad_check(loss, analytic, ptrs, options);
  CHECK(report.refined() == 1);
  CHECK(report.kinked() == 0);
  CHECK(report.max_rel_error() < 1e-8);

  options.fallback_steps.clear();
  const auto strict = numkit::grad_check(loss, analytic, ptrs, options);
  CHECK(strict.kinked() == 1);
  CHECK(strict.checked() == 0);
}

TEST_CASE("forward passes are deterministic") {
  Rng rng(13);
  const Tensor<float> x = testing::random_tensor({4, 300}, rng).cast<float>();
  const Tensor<float> w = testing::random_tensor({8, 4, 5}, rng).cast<float>();
  CHECK(numkit::conv1d_forward(x, w, 2) == numkit::conv1d_forward(x, w, 2));
}
