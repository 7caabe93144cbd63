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

#include "revelight/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "revelight/errors.hpp"
#include "revelight/rng.hpp"

namespace revelight {

void SmoothingConfig::validate() const {
  for (std::size_t m = 0; m < mu.size(); ++m)
    if (!(mu[m] > 0.0))
      throw DomainError("smoothing radius for block " + std::to_string(m) + " must be positive");
}

Vec client_block_zoe(double h, double h_bar, double reg_at_w, double reg_at_perturbed,
                     double lambda_eff, double mu, const Direction& u) {
  if (!(mu > 0.0)) throw DomainError("smoothing radius must be positive");
  const double f_w = h + lambda_eff * reg_at_w;
  const double f_pert = h_bar + lambda_eff * reg_at_perturbed;
  const double coeff = zoe_prefactor(u.scheme, u.dim()) / mu * (f_pert - f_w);
  Vec g(u.u.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = coeff * u.u[j];
  return g;
}

std::optional<Vec> server_block_zoe(double h, double h_hat, double mu, const Direction& u0) {
  if (u0.dim() == 0) return std::nullopt;
  if (!(mu > 0.0)) throw DomainError("smoothing radius must be positive");
  const double coeff = zoe_prefactor(u0.scheme, u0.dim()) / mu * (h_hat - h);
  Vec g(u0.u.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = coeff * u0.u[j];
  return g;
}

McValue smoothed_value_mc(const ScalarFn& f, std::span<const double> w, double mu,
                          Scheme scheme, std::size_t draws, std::uint64_t seed) {
  return kernels::smoothed_value_parallel(f, w, mu, scheme, draws, seed);
}

McGrad smoothed_grad_mc(const ScalarFn& f, std::span<const double> w, double mu,
                        Scheme scheme, std::size_t draws, std::uint64_t seed) {
  return kernels::smoothed_grad_parallel(f, w, mu, scheme, draws, seed);
}

HyperParams prescribe_hyperparams(std::size_t horizon, std::size_t tau, double lipschitz,
                                  double m0, std::span<const std::size_t> dims,
                                  Scheme scheme, bool has_server_block) {
  if (horizon == 0) throw DomainError("horizon T must be at least 1");
  if (!(lipschitz > 0.0)) throw DomainError("Lipschitz estimate must be positive");
  if (!(m0 > 0.0)) throw DomainError("rate constant m0 must be positive");
  if (dims.empty()) throw DomainError("no parameter blocks given");

  const std::size_t max_dim = *std::max_element(dims.begin(), dims.end());
  const double sqrt_t = std::sqrt(static_cast<double>(horizon));

  HyperParams hp;
  hp.horizon = horizon;
  hp.tau = tau;
  hp.m0 = m0;
  hp.lipschitz = lipschitz;
  hp.eta = std::min(1.0 / (4.0 * static_cast<double>(tau + 1) * lipschitz), m0 / sqrt_t);
  const std::size_t local_blocks = has_server_block ? dims.size() - 1 : dims.size();
  hp.eta_server = hp.eta / static_cast<double>(std::max<std::size_t>(1, local_blocks));

  double mu;
  if (scheme == Scheme::kGaussian) {
    hp.d_star = static_cast<double>(max_dim) + 3.0;
    mu = 1.0 / (sqrt_t * lipschitz * std::pow(hp.d_star, 1.5));
  } else {
    hp.d_star = static_cast<double>(max_dim);
    mu = 1.0 / (sqrt_t * lipschitz * hp.d_star);
  }
  hp.mu.assign(dims.size(), mu);
  return hp;
}

namespace {

Vec fd_gradient(const ScalarFn& f, std::span<const double> x, double step) {
  Vec g(x.size()), p(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    p[j] = x[j] + step;
    const double hi = f(p);
    p[j] = x[j] - step;
    const double lo = f(p);
    p[j] = x[j];
    g[j] = (hi - lo) / (2.0 * step);
  }
  return g;
}

}  // namespace

double estimate_lipschitz(const ScalarFn& f, std::span<const double> center,
                          std::uint64_t seed, std::size_t pairs, double radius) {
  if (center.empty()) throw DomainError("cannot estimate smoothness in zero dimensions");
  if (pairs == 0) throw DomainError("need at least one point pair");
  constexpr double kStep = 1e-5;
  const std::size_t dim = center.size();
  double best = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    Stream rng(seed, 0, Purpose::kLipschitz, k);
    Vec a(dim), b(dim);
    double dist2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      a[j] = center[j] + radius * rng.normal();
      b[j] = center[j] + radius * rng.normal();
      dist2 += (a[j] - b[j]) * (a[j] - b[j]);
    }
    if (dist2 == 0.0) continue;
    const Vec ga = fd_gradient(f, a, kStep), gb = fd_gradient(f, b, kStep);
    double diff2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) diff2 += (ga[j] - gb[j]) * (ga[j] - gb[j]);
    best = std::max(best, std::sqrt(diff2 / dist2));
  }
  return best;
}

}  // namespace revelight
