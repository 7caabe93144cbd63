// Copyright 2026 The Revelight Authors. All Rights Reserved.
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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "revelight/errors.hpp"
#include "revelight/kernels.hpp"
#include "revelight/models.hpp"
#include "test_util.hpp"

using namespace revelight;
using testutil::fd_grad;

TEST_CASE("feature blocks split the remainder over the leading parties") {
  CHECK(partition_features(10, 3) == std::vector<std::size_t>{4, 3, 3});
  CHECK(partition_features(32, 4) == std::vector<std::size_t>{8, 8, 8, 8});
  CHECK(partition_features(5, 5) == std::vector<std::size_t>{1, 1, 1, 1, 1});
  CHECK_THROWS_AS(partition_features(5, 0), DomainError);
  CHECK_THROWS_AS(partition_features(3, 4), DomainError);
}

TEST_CASE("partition then concatenate is the identity") {
  const Dataset d = testutil::toy_dataset(7, 10, 1);
  const auto dims = partition_features(10, 3);
  const PartitionedDataset p = partition(d, dims);
  CHECK(p.parties() == 3);
  CHECK(p.block_dims() == dims);
  CHECK(p.blocks[1].row(2)[0] == d.row(2)[4]);
  const Dataset back = concatenate(p);
  CHECK(back.features == d.features);
  CHECK(back.labels == d.labels);
  const std::vector<std::size_t> bad{4, 4};
  CHECK_THROWS_AS(partition(d, bad), ShapeError);
}

TEST_CASE("linear local model is a dot product") {
  const LocalModel m = LocalModel::linear(3);
  const Vec w{1.0, -2.0, 0.5}, x{3.0, 1.0, 4.0};
  CHECK(local_forward(m, w, x) == Vec{3.0 - 2.0 + 2.0});
  Vec g(3, 0.0);
  const Vec up{2.0};
  local_backward(m, w, x, up, g);
  CHECK(g == Vec{6.0, 2.0, 8.0});
  CHECK_THROWS_AS(local_forward(m, Vec{1.0}, x), ShapeError);
}

TEST_CASE("mlp forward matches a hand computation") {
  // 2 -> 2 (rectifier) -> 1, weights laid out W1, b1, W2, b2.
  const LocalModel m = LocalModel::mlp(2, {2}, 1);
  CHECK(m.param_count() == 2 * 2 + 2 + 1 * 2 + 1);
  const Vec w{1.0, 2.0, -1.0, 1.0, 0.5, -3.0, 2.0, 4.0, -1.0};
  const Vec x{1.0, 1.0};
  // hidden pre-activations: 1+2+0.5 = 3.5 and -1+1-3 = -3 -> relu (3.5, 0)
  CHECK(local_forward(m, w, x)[0] == doctest::Approx(2.0 * 3.5 + 4.0 * 0.0 - 1.0));
}

TEST_CASE("mlp backward agrees with finite differences") {
  const LocalModel m = LocalModel::mlp(4, {5, 3}, 2);
  const Vec w = testutil::normals(m.param_count(), 3, 0.7);
  const Vec x = testutil::normals(4, 4);
  const Vec up{0.3, -1.2};
  Vec g(m.param_count(), 0.0);
  local_backward(m, w, x, up, g);
  const auto fd = fd_grad(
      [&](std::span<const double> v) {
        const Vec c = local_forward(m, v, x);
        return up[0] * c[0] + up[1] * c[1];
      },
      w);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(g[j] == doctest::Approx(fd[j]).epsilon(1e-5));
}

TEST_CASE("logistic head value and gradient") {
  const GlobalModel g = GlobalModel::logistic(3);
  const Vec c{0.2, -0.5, 1.0};
  CHECK(global_value(g, {}, c, 1) == doctest::Approx(std::log1p(std::exp(-0.7))));
  CHECK(global_value(g, {}, c, -1) == doctest::Approx(std::log1p(std::exp(0.7))));
  CHECK(global_value(g, {}, Vec{0.0, 0.0, 0.0}, 1) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(global_value(g, {}, c, 0), DomainError);
  Vec gc(3), gw;
  global_backward(g, {}, c, -1, gc, gw);
  const auto fd = fd_grad([&](std::span<const double> v) { return global_value(g, {}, v, -1); }, c);
  for (std::size_t j = 0; j < 3; ++j) CHECK(gc[j] == doctest::Approx(fd[j]).epsilon(1e-6));
  CHECK(global_predict(g, {}, c) == 1);
}

TEST_CASE("softplus is stable for large arguments") {
  CHECK(softplus(800.0) == doctest::Approx(800.0));
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(softplus(-800.0) < 1e-300);
}

TEST_CASE("softmax head is cross-entropy and its gradients match finite differences") {
  const GlobalModel g = GlobalModel::softmax_fcn(2, 2, 3);
  CHECK(g.param_count() == 3 * 4);
  const Vec w0 = testutil::normals(12, 5);
  const Vec c = testutil::normals(4, 6);
  // direct cross-entropy
  double z[3], top = -1e300;
  for (int k = 0; k < 3; ++k) {
    z[k] = 0.0;
    for (int j = 0; j < 4; ++j) z[k] += w0[k * 4 + j] * c[j];
    top = std::max(top, z[k]);
  }
  const double lse = std::log(std::exp(z[0]) + std::exp(z[1]) + std::exp(z[2]));
  CHECK(global_value(g, w0, c, 2) == doctest::Approx(lse - z[2]));
  CHECK_THROWS_AS(global_value(g, w0, c, 3), DomainError);

  Vec gc(4), gw(12, 0.0);
  global_backward(g, w0, c, 1, gc, gw);
  const auto fdc = fd_grad([&](std::span<const double> v) { return global_value(g, w0, v, 1); }, c);
  const auto fdw = fd_grad([&](std::span<const double> v) { return global_value(g, v, c, 1); }, w0);
  for (std::size_t j = 0; j < 4; ++j) CHECK(gc[j] == doctest::Approx(fdc[j]).epsilon(1e-6));
  for (std::size_t j = 0; j < 12; ++j) CHECK(gw[j] == doctest::Approx(fdw[j]).epsilon(1e-6));
}

TEST_CASE("nonconvex regulariser value, shifted value and gradient") {
  const Vec w{0.0, 1.0, -2.0};
  CHECK(nonconvex_reg(w) == doctest::Approx(0.0 + 0.5 + 0.8));
  const Vec u{1.0, -1.0, 0.5};
  Vec shifted(3);
  for (int j = 0; j < 3; ++j) shifted[j] = w[j] + 0.1 * u[j];
  CHECK(nonconvex_reg_at(w, 0.1, u) == doctest::Approx(nonconvex_reg(shifted)));
  Vec g(3, 0.0);
  nonconvex_reg_grad(w, 2.0, g);
  const auto fd = fd_grad([](std::span<const double> v) { return 2.0 * nonconvex_reg(v); }, w);
  for (int j = 0; j < 3; ++j) CHECK(g[j] == doctest::Approx(fd[j]).epsilon(1e-6));
}

TEST_CASE("composite objective equals a direct per-sample loop") {
  const Dataset d = testutil::toy_dataset(20, 6, 7);
  const auto dims = partition_features(6, 2);
  const PartitionedDataset p = partition(d, dims);
  const ModelSpec spec = make_glm_spec(dims);
  ModelState s(spec);
  const Vec w = testutil::normals(6, 8, 0.3);
  std::copy(w.begin(), w.begin() + 3, s.mutable_local(0).begin());
  std::copy(w.begin() + 3, w.end(), s.mutable_local(1).begin());
  double loss = 0.0;
  for (std::size_t i = 0; i < d.n; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < 6; ++j) z += w[j] * d.row(i)[j];
    loss += std::log1p(std::exp(-d.labels[i] * z));
  }
  const double lambda = 0.01;
  const double expect = loss / d.n + lambda * nonconvex_reg(w);
  CHECK(composite_objective(s, p, lambda, spec) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(sample_cost(s, p, spec, lambda, 3) ==
        doctest::Approx(std::log1p(std::exp(-d.labels[3] * sample_outputs(s, p, spec, 3)[0] -
                                             d.labels[3] * sample_outputs(s, p, spec, 3)[1])) +
                        lambda * nonconvex_reg(w)));
}

TEST_CASE("model spec rejects data it cannot consume") {
  const Dataset d = testutil::toy_dataset(5, 4, 9);
  const PartitionedDataset p = partition(d, std::vector<std::size_t>{2, 2});
  CHECK_NOTHROW(make_glm_spec(std::vector<std::size_t>{2, 2}).validate(p));
  CHECK_THROWS_AS(make_glm_spec(std::vector<std::size_t>{3, 1}).validate(p), ShapeError);
  CHECK_THROWS_AS(make_glm_spec(std::vector<std::size_t>{4}).validate(p), ShapeError);
}

TEST_CASE("updates reject bad directions and leave the block untouched") {
  const ModelSpec spec = make_glm_spec(std::vector<std::size_t>{2, 3});
  ModelState s(spec);
  s.step_local(1, 0.5, Vec{1.0, 2.0, 3.0});
  CHECK(std::vector<double>(s.local(1).begin(), s.local(1).end()) == Vec{-0.5, -1.0, -1.5});
  CHECK_THROWS_AS(s.step_local(1, 0.5, Vec{1.0}), ShapeError);
  CHECK_THROWS_AS(s.step_local(0, 1.0, Vec{1.0, INFINITY}), NumericError);
  CHECK(s.local(0)[0] == 0.0);
  CHECK_THROWS_AS(s.step_local(0, 1e308, Vec{1e308, 0.0}), NumericError);
  CHECK(s.local(0)[0] == 0.0);
  CHECK(s.total_params() == 5);
  CHECK(s.flatten().size() == 5);
}

TEST_CASE("initial weights are deterministic in the seed") {
  ModelSpec spec;
  spec.local = {LocalModel::mlp(3, {4}, 2), LocalModel::mlp(2, {4}, 2)};
  spec.global = GlobalModel::softmax_fcn(2, 2, 3);
  const ModelState a = ModelState::initial(spec, 5);
  const ModelState b = ModelState::initial(spec, 5);
  const ModelState c = ModelState::initial(spec, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.w0().size() == 12);
}

TEST_CASE("analytic gradient of the composite objective matches finite differences") {
  const Dataset d = testutil::toy_dataset(15, 5, 10);
  const auto dims = partition_features(5, 2);
  const PartitionedDataset p = partition(d, dims);
  Dataset d3 = d;
  for (int& y : d3.labels) y = y > 0 ? 1 : 0;
  const PartitionedDataset p3 = partition(d3, dims);
  ModelSpec spec;
  spec.local = {LocalModel::mlp(3, {3}, 2), LocalModel::mlp(2, {3}, 2)};
  spec.global = GlobalModel::softmax_fcn(2, 2, 2);
  const ModelState s = ModelState::initial(spec, 3);
  const double lambda = 0.05;
  const Vec g = kernels::gradient_serial(s, p3, lambda, spec);
  const Vec flat = s.flatten();
  const auto fd = fd_grad(
      [&](std::span<const double> v) {
        ModelState t(spec);
        std::size_t off = 0;
        for (double& x : t.mutable_w0()) x = v[off++];
        for (std::size_t m = 0; m < 2; ++m)
          for (double& x : t.mutable_local(m)) x = v[off++];
        return kernels::objective_serial(t, p3, lambda, spec);
      },
      flat);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(g[j] == doctest::Approx(fd[j]).epsilon(1e-5));
  (void)p;
}
