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

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>

#include "revelight/data.hpp"
#include "revelight/kernels.hpp"
#include "revelight/models.hpp"
#include "revelight/verify.hpp"

namespace {

using namespace revelight;

struct Problem {
  ModelSpec spec;
  PartitionedDataset data;
  ModelState state;
};

Problem make_problem(std::size_t n, bool mlp) {
  SyntheticSpec s;
  s.n = n;
  s.dim = 64;
  s.seed = 3;
  if (mlp) {
    s.family = SyntheticFamily::kBlobs;
    s.classes = 4;
  }
  const Dataset d = make_synthetic(s);
  const auto dims = partition_features(64, 4);
  Problem p{make_glm_spec(dims), partition(d, dims), ModelState(make_glm_spec(dims))};
  if (mlp) {
    p.spec.local.clear();
    for (std::size_t m : dims) p.spec.local.push_back(LocalModel::mlp(m, {16}, 2));
    p.spec.global = GlobalModel::softmax_fcn(4, 2, 4);
  }
  p.state = ModelState::initial(p.spec, 5);
  return p;
}

template <double (*Fn)(const ModelState&, const PartitionedDataset&, double, const ModelSpec&)>
void BM_Objective(benchmark::State& st) {
  const Problem p = make_problem(static_cast<std::size_t>(st.range(0)), st.range(1) != 0);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(p.state, p.data, 1e-4, p.spec));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <Vec (*Fn)(const ModelState&, const PartitionedDataset&, double, const ModelSpec&)>
void BM_Gradient(benchmark::State& st) {
  const Problem p = make_problem(static_cast<std::size_t>(st.range(0)), st.range(1) != 0);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(p.state, p.data, 1e-4, p.spec));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

using GradFn = kernels::McGrad (*)(const kernels::ScalarFn&, std::span<const double>, double,
                                   Scheme, std::size_t, std::uint64_t);

template <GradFn Fn>
void BM_SmoothedGrad(benchmark::State& st) {
  const Quadratic q = random_quadratic(16, 1, 0);
  const Vec w(16, 0.5);
  const kernels::ScalarFn f = [&](std::span<const double> v) { return q.value(v); };
  const auto draws = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(Fn(f, w, 1e-2, Scheme::kGaussian, draws, 7));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (long n : {4096, 32768})
    for (long mlp : {0, 1}) b->Args({n, mlp});
}

}  // namespace

BENCHMARK(BM_Objective<kernels::objective_serial>)->Name("objective/serial")->Apply(sizes);
BENCHMARK(BM_Objective<kernels::objective_parallel>)->Name("objective/parallel")->Apply(sizes);
BENCHMARK(BM_Gradient<kernels::gradient_serial>)->Name("gradient/serial")->Apply(sizes);
BENCHMARK(BM_Gradient<kernels::gradient_parallel>)->Name("gradient/parallel")->Apply(sizes);
BENCHMARK(BM_SmoothedGrad<kernels::smoothed_grad_serial>)->Name("smoothed_grad/serial")->Arg(20000);
BENCHMARK(BM_SmoothedGrad<kernels::smoothed_grad_parallel>)->Name("smoothed_grad/parallel")->Arg(20000);

BENCHMARK_MAIN();
