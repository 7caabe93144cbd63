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

#include "revelight/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "revelight/errors.hpp"
#include "revelight/rng.hpp"

namespace revelight::kernels {

namespace {

std::size_t chunks_for(std::size_t count, std::size_t chunk) {
  return (count + chunk - 1) / chunk;
}

double regularizer_total(const ModelState& state) {
  double reg = 0.0;
  for (std::size_t m = 0; m < state.parties(); ++m) reg += nonconvex_reg(state.local(m));
  return reg;
}

double sample_loss(const ModelState& state, const PartitionedDataset& data,
                   const ModelSpec& spec, std::size_t i) {
  const Vec c = sample_outputs(state, data, spec, i);
  return global_value(spec.global, state.w0(), c, data.labels[i]);
}

bool sample_correct(const ModelState& state, const PartitionedDataset& data,
                    const ModelSpec& spec, std::size_t i) {
  const Vec c = sample_outputs(state, data, spec, i);
  return global_predict(spec.global, state.w0(), c) == data.labels[i];
}

// Accumulates the loss gradient of sample i into `grad` (flatten() layout).
void accumulate_sample_gradient(const ModelState& state, const PartitionedDataset& data,
                                const ModelSpec& spec, std::size_t i, Vec& grad) {
  const Vec c = sample_outputs(state, data, spec, i);
  Vec grad_c(c.size());
  const std::size_t d0 = state.w0().size();
  global_backward(spec.global, state.w0(), c, data.labels[i], grad_c,
                  std::span<double>(grad.data(), d0));
  std::size_t off = d0, c_off = 0;
  const std::size_t k = spec.global.party_output_dim;
  for (std::size_t m = 0; m < spec.local.size(); ++m) {
    const std::size_t dm = state.local(m).size();
    local_backward(spec.local[m], state.local(m), data.blocks[m].row(i),
                   std::span<const double>(grad_c.data() + c_off, k),
                   std::span<double>(grad.data() + off, dm));
    off += dm;
    c_off += k;
  }
}

void finish_gradient(const ModelState& state, double lambda_eff, std::size_t n, Vec& grad) {
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : grad) v *= inv;
  std::size_t off = state.w0().size();
  for (std::size_t m = 0; m < state.parties(); ++m) {
    const auto w = state.local(m);
    nonconvex_reg_grad(w, lambda_eff, std::span<double>(grad.data() + off, w.size()));
    off += w.size();
  }
}

void check(const ModelState& state, const PartitionedDataset& data, const ModelSpec& spec) {
  spec.validate(data);
  if (state.parties() != spec.parties())
    throw ShapeError("model state has " + std::to_string(state.parties()) +
                     " local blocks, spec has " + std::to_string(spec.parties()));
  if (data.n == 0) throw ShapeError("empty dataset");
}

McValue finish_value(double fw, double sum, double sumsq, std::size_t draws) {
  const double m = static_cast<double>(draws);
  McValue out;
  out.mean = fw + sum / m;
  if (draws > 1) {
    const double var = std::max(0.0, (sumsq - sum * sum / m) / (m - 1.0));
    out.std_error = std::sqrt(var / m);
  }
  return out;
}

McGrad finish_grad(const Vec& sum, const Vec& sumsq, std::size_t draws) {
  const double m = static_cast<double>(draws);
  McGrad out;
  out.mean.resize(sum.size());
  out.std_error.assign(sum.size(), 0.0);
  for (std::size_t j = 0; j < sum.size(); ++j) {
    out.mean[j] = sum[j] / m;
    if (draws > 1) {
      const double var = std::max(0.0, (sumsq[j] - sum[j] * sum[j] / m) / (m - 1.0));
      out.std_error[j] = std::sqrt(var / m);
    }
  }
  return out;
}

// One Monte-Carlo draw: returns f(w + mu u) - f(w) and leaves u in `u`.
double perturbed_diff(const ScalarFn& f, std::span<const double> w, double fw,
                      double mu, Scheme scheme, std::uint64_t seed, std::size_t k,
                      Vec& u, Vec& point) {
  Stream stream(seed, 0, Purpose::kMonteCarlo, k);
  sample_direction_into(scheme, stream, u);
  for (std::size_t j = 0; j < w.size(); ++j) point[j] = w[j] + mu * u[j];
  return f(point) - fw;
}

void check_draws(std::size_t draws, std::span<const double> w) {
  if (draws == 0) throw DomainError("Monte-Carlo draw count must be positive");
  if (w.empty()) throw DomainError("cannot smooth a zero-dimensional function");
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double objective_serial(const ModelState& state, const PartitionedDataset& data,
                        double lambda_eff, const ModelSpec& spec) {
  check(state, data, spec);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) sum += sample_loss(state, data, spec, i);
  return sum / static_cast<double>(data.n) + lambda_eff * regularizer_total(state);
}

double objective_parallel(const ModelState& state, const PartitionedDataset& data,
                          double lambda_eff, const ModelSpec& spec) {
  check(state, data, spec);
  const std::size_t nchunks = chunks_for(data.n, kSampleChunk);
  std::vector<double> partial(nchunks, 0.0);
  const auto n_chunks = static_cast<std::ptrdiff_t>(nchunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ch = 0; ch < n_chunks; ++ch) {
    const std::size_t lo = static_cast<std::size_t>(ch) * kSampleChunk;
    const std::size_t hi = std::min(data.n, lo + kSampleChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += sample_loss(state, data, spec, i);
    partial[static_cast<std::size_t>(ch)] = s;
  }
  double sum = 0.0;
  for (double s : partial) sum += s;
  return sum / static_cast<double>(data.n) + lambda_eff * regularizer_total(state);
}

Vec gradient_serial(const ModelState& state, const PartitionedDataset& data,
                    double lambda_eff, const ModelSpec& spec) {
  check(state, data, spec);
  Vec grad(state.total_params(), 0.0);
  for (std::size_t i = 0; i < data.n; ++i) accumulate_sample_gradient(state, data, spec, i, grad);
  finish_gradient(state, lambda_eff, data.n, grad);
  return grad;
}

Vec gradient_parallel(const ModelState& state, const PartitionedDataset& data,
                      double lambda_eff, const ModelSpec& spec) {
  check(state, data, spec);
  const std::size_t dim = state.total_params();
  const std::size_t nchunks = chunks_for(data.n, kSampleChunk);
  std::vector<Vec> partial(nchunks);
  const auto n_chunks = static_cast<std::ptrdiff_t>(nchunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ch = 0; ch < n_chunks; ++ch) {
    const std::size_t lo = static_cast<std::size_t>(ch) * kSampleChunk;
    const std::size_t hi = std::min(data.n, lo + kSampleChunk);
    Vec g(dim, 0.0);
    for (std::size_t i = lo; i < hi; ++i) accumulate_sample_gradient(state, data, spec, i, g);
    partial[static_cast<std::size_t>(ch)] = std::move(g);
  }
  Vec grad(dim, 0.0);
  for (const Vec& g : partial)
    for (std::size_t j = 0; j < dim; ++j) grad[j] += g[j];
  finish_gradient(state, lambda_eff, data.n, grad);
  return grad;
}

double accuracy_serial(const ModelState& state, const PartitionedDataset& data,
                       const ModelSpec& spec) {
  check(state, data, spec);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.n; ++i) hits += sample_correct(state, data, spec, i) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.n);
}

double accuracy_parallel(const ModelState& state, const PartitionedDataset& data,
                         const ModelSpec& spec) {
  check(state, data, spec);
  std::size_t hits = 0;
  const auto n = static_cast<std::ptrdiff_t>(data.n);
#pragma omp parallel for schedule(static) reduction(+ : hits)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    hits += sample_correct(state, data, spec, static_cast<std::size_t>(i)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.n);
}

McValue smoothed_value_serial(const ScalarFn& f, std::span<const double> w, double mu,
                              Scheme scheme, std::size_t draws, std::uint64_t seed) {
  check_draws(draws, w);
  const double fw = f(w);
  if (mu == 0.0) return {fw, 0.0};
  Vec u(w.size()), point(w.size());
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    const double d = perturbed_diff(f, w, fw, mu, scheme, seed, k, u, point);
    sum += d;
    sumsq += d * d;
  }
  return finish_value(fw, sum, sumsq, draws);
}

McValue smoothed_value_parallel(const ScalarFn& f, std::span<const double> w, double mu,
                                Scheme scheme, std::size_t draws, std::uint64_t seed) {
  check_draws(draws, w);
  const double fw = f(w);
  if (mu == 0.0) return {fw, 0.0};
  const std::size_t nchunks = chunks_for(draws, kDrawChunk);
  std::vector<double> sums(nchunks, 0.0), sumsqs(nchunks, 0.0);
  const auto n_chunks = static_cast<std::ptrdiff_t>(nchunks);
#pragma omp parallel
  {
    Vec u(w.size()), point(w.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t ch = 0; ch < n_chunks; ++ch) {
      const std::size_t lo = static_cast<std::size_t>(ch) * kDrawChunk;
      const std::size_t hi = std::min(draws, lo + kDrawChunk);
      double s = 0.0, sq = 0.0;
      for (std::size_t k = lo; k < hi; ++k) {
        const double d = perturbed_diff(f, w, fw, mu, scheme, seed, k, u, point);
        s += d;
        sq += d * d;
      }
      sums[static_cast<std::size_t>(ch)] = s;
      sumsqs[static_cast<std::size_t>(ch)] = sq;
    }
  }
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t ch = 0; ch < nchunks; ++ch) {
    sum += sums[ch];
    sumsq += sumsqs[ch];
  }
  return finish_value(fw, sum, sumsq, draws);
}

McGrad smoothed_grad_serial(const ScalarFn& f, std::span<const double> w, double mu,
                            Scheme scheme, std::size_t draws, std::uint64_t seed) {
  check_draws(draws, w);
  if (!(mu > 0.0)) throw DomainError("smoothing radius must be positive");
  const std::size_t dim = w.size();
  const double scale = zoe_prefactor(scheme, dim) / mu;
  const double fw = f(w);
  Vec u(dim), point(dim), sum(dim, 0.0), sumsq(dim, 0.0);
  for (std::size_t k = 0; k < draws; ++k) {
    const double d = scale * perturbed_diff(f, w, fw, mu, scheme, seed, k, u, point);
    for (std::size_t j = 0; j < dim; ++j) {
      const double e = d * u[j];
      sum[j] += e;
      sumsq[j] += e * e;
    }
  }
  return finish_grad(sum, sumsq, draws);
}

McGrad smoothed_grad_parallel(const ScalarFn& f, std::span<const double> w, double mu,
                              Scheme scheme, std::size_t draws, std::uint64_t seed) {
  check_draws(draws, w);
  if (!(mu > 0.0)) throw DomainError("smoothing radius must be positive");
  const std::size_t dim = w.size();
  const double scale = zoe_prefactor(scheme, dim) / mu;
  const double fw = f(w);
  const std::size_t nchunks = chunks_for(draws, kDrawChunk);
  std::vector<Vec> sums(nchunks), sumsqs(nchunks);
  const auto n_chunks = static_cast<std::ptrdiff_t>(nchunks);
#pragma omp parallel
  {
    Vec u(dim), point(dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ch = 0; ch < n_chunks; ++ch) {
      const std::size_t lo = static_cast<std::size_t>(ch) * kDrawChunk;
      const std::size_t hi = std::min(draws, lo + kDrawChunk);
      Vec s(dim, 0.0), sq(dim, 0.0);
      for (std::size_t k = lo; k < hi; ++k) {
        const double d = scale * perturbed_diff(f, w, fw, mu, scheme, seed, k, u, point);
        for (std::size_t j = 0; j < dim; ++j) {
          const double e = d * u[j];
          s[j] += e;
          sq[j] += e * e;
        }
      }
      sums[static_cast<std::size_t>(ch)] = std::move(s);
      sumsqs[static_cast<std::size_t>(ch)] = std::move(sq);
    }
  }
  Vec sum(dim, 0.0), sumsq(dim, 0.0);
  for (std::size_t ch = 0; ch < nchunks; ++ch)
    for (std::size_t j = 0; j < dim; ++j) {
      sum[j] += sums[ch][j];
      sumsq[j] += sumsqs[ch][j];
    }
  return finish_grad(sum, sumsq, draws);
}

}  // namespace revelight::kernels
