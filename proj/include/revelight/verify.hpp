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

// Numerical checks of the estimator and smoothing properties on quadratics,
// convergence-rate fits and speedup bookkeeping.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "revelight/direction.hpp"
#include "revelight/kernels.hpp"

namespace revelight {

/// pass <=> measured <= bound + slack.
struct BoundReport {
  std::string quantity;
  double measured = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool pass = true;
};

BoundReport make_report(std::string quantity, double measured, double bound, double slack);

/// f(w) = 0.5 w'Hw + b'w with symmetric H.
struct Quadratic {
  std::size_t dim = 0;
  std::vector<double> h;  // dim x dim, row-major
  std::vector<double> b;

  double value(std::span<const double> w) const;
  std::vector<double> grad(std::span<const double> w) const;
  double trace() const;
  /// Spectral norm of H, i.e. the gradient Lipschitz constant.
  double lipschitz() const;
};

/// H = (A + A') / 2 with A_ij ~ N(0, 1/dim), b ~ N(0, 1).
Quadratic random_quadratic(std::size_t dim, std::uint64_t seed, std::uint64_t index);

/// Smoothed value E f(w + mu u) of a quadratic: f + mu^2 trace(H) / 2 for
/// Gaussian u and f + mu^2 trace(H) / (2 dim) for u on the unit sphere.
double smoothed_quadratic_value(const Quadratic& f, std::span<const double> w, double mu,
                                Scheme scheme);

struct SmoothingCheck {
  std::vector<std::size_t> dims{2, 4, 8, 16};
  std::vector<double> mus{1e-1, 1e-2};
  std::size_t trials = 50;
  std::size_t draws = 20000;
  std::uint64_t seed = 0;
};

/// Per trial, Monte-Carlo |f_mu - f| against L d mu^2 / 2 and
/// ||grad f_mu - grad f||^2 against mu^2 L^2 (d+3)^3 / 4 (Gaussian) or
/// mu^2 L^2 d^2 / 4 (sphere). The value slack is 3 standard errors; the
/// gradient slack is 9 times the summed squared standard errors.
std::vector<BoundReport> check_smoothing_bounds(Scheme scheme, const SmoothingCheck& cfg);

/// Coordinate-wise |MC mean of the estimator - grad| <= 3 standard errors,
/// one report per coordinate.
std::vector<BoundReport> check_unbiasedness(const kernels::ScalarFn& f,
                                            std::span<const double> grad,
                                            std::span<const double> w, double mu, Scheme scheme,
                                            std::size_t draws, std::uint64_t seed,
                                            const std::string& label = "grad");

struct UnbiasednessCheck {
  std::vector<std::size_t> dims{2, 4, 8, 16};
  std::size_t instances = 50;
  std::size_t draws = 100000;
  double mu = 1e-2;
  std::uint64_t seed = 0;
};

/// Runs check_unbiasedness on random quadratics (where grad f_mu = grad f).
/// Throws DomainError when draws < 10^4.
std::vector<BoundReport> check_unbiasedness(Scheme scheme, const UnbiasednessCheck& cfg);

double pass_fraction(std::span<const BoundReport> reports);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r2 = 0.0;
};

/// Least-squares line through (log t, log y). Throws DomainError for fewer
/// than two points or non-positive values.
RateFit fit_loglog_slope(std::span<const double> t, std::span<const double> y);

/// Fits the running mean of `grad_norm2` (true squared gradient norms at
/// checkpoints t) against t over the window [0.2 T, T], T = last checkpoint.
/// Throws UsageError when fewer than ten checkpoints fall in the window.
RateFit fit_convergence_rate(std::span<const double> t, std::span<const double> grad_norm2);

/// speedup(q) = times[1] / times[q]. Throws UsageError without a q = 1
/// entry or for a non-positive time.
std::map<std::size_t, double> compute_speedup(const std::map<std::size_t, double>& times);

/// CSV with header quantity,measured,bound,slack,pass.
void write_report_csv(std::ostream& out, std::span<const BoundReport> reports);
/// Aligned plain-text table.
void write_report_text(std::ostream& out, std::span<const BoundReport> reports);

}  // namespace revelight
