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

#pragma once

// Data-parallel inner loops. Each kernel has a serial reference (plain
// left-to-right accumulation, kept for testing) and an OpenMP version.
//
// The OpenMP versions reduce over fixed-size chunks whose partial results are
// combined in chunk order, so their output does not depend on the thread
// count and repeated runs are bit-identical. They differ from the serial
// reference only by floating-point reassociation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "revelight/direction.hpp"
#include "revelight/models.hpp"

namespace revelight::kernels {

inline constexpr std::size_t kSampleChunk = 256;
inline constexpr std::size_t kDrawChunk = 1024;

/// Number of OpenMP threads the kernels will use (1 without OpenMP).
int max_threads();

double objective_serial(const ModelState& state, const PartitionedDataset& data,
                        double lambda_eff, const ModelSpec& spec);
double objective_parallel(const ModelState& state, const PartitionedDataset& data,
                          double lambda_eff, const ModelSpec& spec);

/// Full analytic gradient of the composite objective, laid out like
/// ModelState::flatten(). Requires every model to expose gradients.
Vec gradient_serial(const ModelState& state, const PartitionedDataset& data,
                    double lambda_eff, const ModelSpec& spec);
Vec gradient_parallel(const ModelState& state, const PartitionedDataset& data,
                      double lambda_eff, const ModelSpec& spec);

/// Fraction of samples whose predicted label matches.
double accuracy_serial(const ModelState& state, const PartitionedDataset& data,
                       const ModelSpec& spec);
double accuracy_parallel(const ModelState& state, const PartitionedDataset& data,
                         const ModelSpec& spec);

using ScalarFn = std::function<double(std::span<const double>)>;

struct McValue {
  double mean = 0.0;
  double std_error = 0.0;
};

struct McGrad {
  Vec mean;
  Vec std_error;
};

/// Monte-Carlo estimate of f_mu(w) = E_u f(w + mu u). Draw k uses the stream
/// (seed, 0, kMonteCarlo, k), so serial and parallel runs see the same draws.
McValue smoothed_value_serial(const ScalarFn& f, std::span<const double> w,
                              double mu, Scheme scheme, std::size_t draws,
                              std::uint64_t seed);
McValue smoothed_value_parallel(const ScalarFn& f, std::span<const double> w,
                                double mu, Scheme scheme, std::size_t draws,
                                std::uint64_t seed);

/// Monte-Carlo mean of the two-point estimator (k/mu)[f(w+mu u) - f(w)] u,
/// with k = zoe_prefactor(scheme, dim). `f` must be safe to call concurrently.
McGrad smoothed_grad_serial(const ScalarFn& f, std::span<const double> w,
                            double mu, Scheme scheme, std::size_t draws,
                            std::uint64_t seed);
McGrad smoothed_grad_parallel(const ScalarFn& f, std::span<const double> w,
                              double mu, Scheme scheme, std::size_t draws,
                              std::uint64_t seed);

}  // namespace revelight::kernels
