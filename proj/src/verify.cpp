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

#include "revelight/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>

#include "revelight/errors.hpp"
#include "revelight/estimator.hpp"
#include "revelight/rng.hpp"

namespace revelight {

namespace {

std::string cell_label(const char* what, Scheme s, std::size_t d, std::size_t trial) {
  return std::string(what) + "/" + std::string(to_string(s)) + "/d=" + std::to_string(d) + "/" +
         std::to_string(trial);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

BoundReport make_report(std::string quantity, double measured, double bound, double slack) {
  return BoundReport{std::move(quantity), measured, bound, slack, measured <= bound + slack};
}

double Quadratic::value(std::span<const double> w) const {
  double v = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    double hw = 0.0;
    for (std::size_t j = 0; j < dim; ++j) hw += h[i * dim + j] * w[j];
    v += 0.5 * w[i] * hw + b[i] * w[i];
  }
  return v;
}

std::vector<double> Quadratic::grad(std::span<const double> w) const {
  std::vector<double> g(b);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) g[i] += h[i * dim + j] * w[j];
  return g;
}

double Quadratic::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim; ++i) t += h[i * dim + i];
  return t;
}

double Quadratic::lipschitz() const {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      h.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const Eigen::MatrixXd sym = m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Quadratic random_quadratic(std::size_t dim, std::uint64_t seed, std::uint64_t index) {
  if (dim == 0) throw DomainError("quadratic needs dim > 0");
  Stream s(seed, static_cast<std::uint16_t>(dim), Purpose::kInstance, index);
  Quadratic q;
  q.dim = dim;
  std::vector<double> a(dim * dim);
  const double sd = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& v : a) v = sd * s.normal();
  q.h.resize(dim * dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) q.h[i * dim + j] = 0.5 * (a[i * dim + j] + a[j * dim + i]);
  q.b.resize(dim);
  for (double& v : q.b) v = s.normal();
  return q;
}

double smoothed_quadratic_value(const Quadratic& f, std::span<const double> w, double mu,
                                Scheme scheme) {
  const double second = scheme == Scheme::kGaussian ? 1.0 : 1.0 / static_cast<double>(f.dim);
  return f.value(w) + 0.5 * mu * mu * f.trace() * second;
}

std::vector<BoundReport> check_smoothing_bounds(Scheme scheme, const SmoothingCheck& cfg) {
  if (cfg.trials == 0) throw DomainError("need at least one trial");
  std::vector<BoundReport> out;
  for (std::size_t d : cfg.dims) {
    for (double mu : cfg.mus) {
      for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const Quadratic q = random_quadratic(d, cfg.seed, trial);
        Stream ws(cfg.seed, static_cast<std::uint16_t>(d), Purpose::kInstance, 1'000'000 + trial);
        std::vector<double> w(d);
        for (double& v : w) v = ws.normal();
        const double L = q.lipschitz();
        const kernels::ScalarFn f = [&q](std::span<const double> x) { return q.value(x); };
        const std::uint64_t mc_seed = cfg.seed ^ (0x9E3779B97F4A7C15ull * (trial + 1) + d);
        const std::string tag = "/" + std::string(to_string(scheme)) + "/d=" + std::to_string(d) +
                                "/mu=" + num(mu) + "/" + std::to_string(trial);

        const McValue fv = smoothed_value_mc(f, w, mu, scheme, cfg.draws, mc_seed);
        out.push_back(make_report("value_bias" + tag, std::abs(fv.mean - q.value(w)),
                                  L * static_cast<double>(d) * mu * mu / 2.0, 3.0 * fv.std_error));

        const double dd = static_cast<double>(d);
        const double gbound = scheme == Scheme::kGaussian
                                  ? mu * mu * L * L * std::pow(dd + 3.0, 3.0) / 4.0
                                  : mu * mu * L * L * dd * dd / 4.0;
        if (mu == 0.0) {
          out.push_back(make_report("grad_bias" + tag, 0.0, 0.0, 0.0));
          continue;
        }
        const McGrad g = smoothed_grad_mc(f, w, mu, scheme, cfg.draws, mc_seed + 1);
        const std::vector<double> exact = q.grad(w);
        double err = 0.0, noise = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          err += (g.mean[j] - exact[j]) * (g.mean[j] - exact[j]);
          noise += g.std_error[j] * g.std_error[j];
        }
        out.push_back(make_report("grad_bias" + tag, err, gbound, 9.0 * noise));
      }
    }
  }
  return out;
}

std::vector<BoundReport> check_unbiasedness(const kernels::ScalarFn& f,
                                            std::span<const double> grad,
                                            std::span<const double> w, double mu, Scheme scheme,
                                            std::size_t draws, std::uint64_t seed,
                                            const std::string& label) {
  if (grad.size() != w.size()) throw ShapeError("gradient and point differ in length");
  const McGrad g = smoothed_grad_mc(f, w, mu, scheme, draws, seed);
  std::vector<BoundReport> out;
  for (std::size_t j = 0; j < w.size(); ++j)
    out.push_back(make_report(label + "[" + std::to_string(j) + "]", std::abs(g.mean[j] - grad[j]),
                              0.0, 3.0 * g.std_error[j]));
  return out;
}

std::vector<BoundReport> check_unbiasedness(Scheme scheme, const UnbiasednessCheck& cfg) {
  if (cfg.draws < 10000) throw DomainError("unbiasedness check needs at least 10^4 draws");
  std::vector<BoundReport> out;
  for (std::size_t d : cfg.dims) {
    for (std::size_t k = 0; k < cfg.instances; ++k) {
      const Quadratic q = random_quadratic(d, cfg.seed, k);
      Stream ws(cfg.seed, static_cast<std::uint16_t>(d), Purpose::kInstance, 2'000'000 + k);
      std::vector<double> w(d);
      for (double& v : w) v = ws.normal();
      const kernels::ScalarFn f = [&q](std::span<const double> x) { return q.value(x); };
      const std::uint64_t mc_seed = cfg.seed ^ (0xD1B54A32D192ED03ull * (k + 1) + d);
      auto cells = check_unbiasedness(f, q.grad(w), w, cfg.mu, scheme, cfg.draws, mc_seed,
                                      cell_label("unbiased", scheme, d, k));
      out.insert(out.end(), cells.begin(), cells.end());
    }
  }
  return out;
}

double pass_fraction(std::span<const BoundReport> reports) {
  if (reports.empty()) return 1.0;
  const auto ok = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  return static_cast<double>(ok) / static_cast<double>(reports.size());
}

RateFit fit_loglog_slope(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw ShapeError("fit needs equally many t and y values");
  if (t.size() < 2) throw DomainError("fit needs at least two points");
  const std::size_t n = t.size();
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd rhs(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(t[k] > 0.0) || !(y[k] > 0.0)) throw DomainError("log-log fit needs positive values");
    a(k, 0) = std::log(t[k]);
    a(k, 1) = 1.0;
    rhs(k) = std::log(y[k]);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd resid = rhs - a * coef;
  const double mean = rhs.mean();
  const double ss_tot = (rhs.array() - mean).square().sum();
  RateFit fit;
  fit.slope = coef(0);
  fit.intercept = coef(1);
  fit.t_lo = *std::min_element(t.begin(), t.end());
  fit.t_hi = *std::max_element(t.begin(), t.end());
  fit.r2 = ss_tot > 0.0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
  return fit;
}

RateFit fit_convergence_rate(std::span<const double> t, std::span<const double> grad_norm2) {
  if (t.size() != grad_norm2.size()) throw ShapeError("checkpoint times and values differ in length");
  if (t.empty()) throw UsageError("no checkpoints");
  const double horizon = *std::max_element(t.begin(), t.end());
  std::vector<double> ts, ys;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0.0)) continue;
    sum += grad_norm2[k];
    ++count;
    if (t[k] >= 0.2 * horizon) {
      ts.push_back(t[k]);
      ys.push_back(sum / static_cast<double>(count));
    }
  }
  if (ts.size() < 10)
    throw UsageError("rate fit needs at least 10 checkpoints in [0.2T, T], got " +
                     std::to_string(ts.size()));
  return fit_loglog_slope(ts, ys);
}

std::map<std::size_t, double> compute_speedup(const std::map<std::size_t, double>& times) {
  const auto base = times.find(1);
  if (base == times.end()) throw UsageError("speedup needs the single-party time");
  std::map<std::size_t, double> out;
  for (const auto& [q, time] : times) {
    if (!(time > 0.0) || !std::isfinite(time))
      throw UsageError("training time for q=" + std::to_string(q) + " must be positive");
    out[q] = base->second / time;
  }
  return out;
}

void write_report_csv(std::ostream& out, std::span<const BoundReport> reports) {
  out << "quantity,measured,bound,slack,pass\n";
  char buf[128];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g", r.measured, r.bound, r.slack);
    out << r.quantity << ',' << buf << ',' << (r.pass ? 1 : 0) << '\n';
  }
}

void write_report_text(std::ostream& out, std::span<const BoundReport> reports) {
  std::size_t width = 8;
  for (const auto& r : reports) width = std::max(width, r.quantity.size());
  out << std::left << std::setw(static_cast<int>(width)) << "quantity" << "  " << std::right
      << std::setw(14) << "measured" << std::setw(14) << "bound" << std::setw(14) << "slack"
      << "  pass\n";
  for (const auto& r : reports)
    out << std::left << std::setw(static_cast<int>(width)) << r.quantity << "  " << std::right
        << std::setw(14) << std::setprecision(6) << r.measured << std::setw(14) << r.bound
        << std::setw(14) << r.slack << "  " << (r.pass ? "yes" : "NO") << '\n';
}

}  // namespace revelight
