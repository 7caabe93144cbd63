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

#include "doctest.h"
#include "revelight/kernels.hpp"
#include "revelight/models.hpp"
#include "test_util.hpp"

using namespace revelight;
using kernels::McGrad;
using kernels::McValue;

namespace {

struct Fixture {
  ModelSpec spec;
  PartitionedDataset data;
  ModelState state;
};

Fixture glm_fixture() {
  const Dataset d = testutil::toy_dataset(2000, 12, 21);
  const auto dims = partition_features(12, 3);
  Fixture f{make_glm_spec(dims), partition(d, dims), ModelState(make_glm_spec(dims))};
  const Vec w = testutil::normals(12, 22, 0.4);
  std::size_t off = 0;
  for (std::size_t m = 0; m < 3; ++m)
    for (double& x : f.state.mutable_local(m)) x = w[off++];
  return f;
}

Fixture mlp_fixture() {
  Dataset d = testutil::toy_dataset(700, 6, 23);
  for (std::size_t i = 0; i < d.n; ++i) d.labels[i] = int(i % 3);
  const auto dims = partition_features(6, 2);
  ModelSpec spec;
  spec.local = {LocalModel::mlp(3, {4}, 2), LocalModel::mlp(3, {4}, 2)};
  spec.global = GlobalModel::softmax_fcn(2, 2, 3);
  return Fixture{spec, partition(d, dims), ModelState::initial(spec, 24)};
}

}  // namespace

TEST_CASE("objective, gradient and accuracy agree between serial and parallel") {
  for (const Fixture& f : {glm_fixture(), mlp_fixture()}) {
    const double a = kernels::objective_serial(f.state, f.data, 1e-3, f.spec);
    const double b = kernels::objective_parallel(f.state, f.data, 1e-3, f.spec);
    CHECK(b == doctest::Approx(a).epsilon(1e-12));
    const Vec ga = kernels::gradient_serial(f.state, f.data, 1e-3, f.spec);
    const Vec gb = kernels::gradient_parallel(f.state, f.data, 1e-3, f.spec);
    REQUIRE(ga.size() == gb.size());
    for (std::size_t j = 0; j < ga.size(); ++j) CHECK(gb[j] == doctest::Approx(ga[j]).epsilon(1e-10));
    CHECK(kernels::accuracy_serial(f.state, f.data, f.spec) ==
          kernels::accuracy_parallel(f.state, f.data, f.spec));
  }
}

TEST_CASE("accuracy counts matching predictions") {
  Fixture f = glm_fixture();
  // all-zero weights predict +1 (score 0 maps to the positive class)
  ModelState zero(f.spec);
  std::size_t pos = 0;
  const Dataset d = concatenate(f.data);
  for (int y : d.labels) pos += y == 1;
  const double acc = kernels::accuracy_serial(zero, f.data, f.spec);
  CHECK((acc == doctest::Approx(double(pos) / d.n) || acc == doctest::Approx(1.0 - double(pos) / d.n)));
}

TEST_CASE("monte-carlo kernels see the same draws serially and in parallel") {
  auto f = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::sin(x) + 0.5 * x * x;
    return s;
  };
  const Vec w = testutil::normals(6, 30);
  for (Scheme s : {Scheme::kGaussian, Scheme::kSphere}) {
    for (std::size_t draws : {1ul, 1000ul, 5000ul}) {
      const McValue a = kernels::smoothed_value_serial(f, w, 0.1, s, draws, 31);
      const McValue b = kernels::smoothed_value_parallel(f, w, 0.1, s, draws, 31);
      CHECK(b.mean == doctest::Approx(a.mean).epsilon(1e-12));
      CHECK(b.std_error == doctest::Approx(a.std_error).epsilon(1e-9));
      const McGrad ga = kernels::smoothed_grad_serial(f, w, 0.1, s, draws, 31);
      const McGrad gb = kernels::smoothed_grad_parallel(f, w, 0.1, s, draws, 31);
      for (std::size_t j = 0; j < w.size(); ++j) {
        CHECK(gb.mean[j] == doctest::Approx(ga.mean[j]).epsilon(1e-10));
        CHECK(gb.std_error[j] == doctest::Approx(ga.std_error[j]).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("a different seed gives a different estimate") {
  auto f = [](std::span<const double> v) { return v[0] * v[0] * v[1]; };
  const Vec w{1.0, 2.0};
  CHECK(kernels::smoothed_value_serial(f, w, 0.3, Scheme::kGaussian, 500, 1).mean !=
        kernels::smoothed_value_serial(f, w, 0.3, Scheme::kGaussian, 500, 2).mean);
}

TEST_CASE("thread count is positive") { CHECK(kernels::max_threads() >= 1); }
