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

#include "revelight/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "revelight/errors.hpp"
#include "revelight/kernels.hpp"
#include "revelight/rng.hpp"

namespace revelight {

namespace {

std::string dims_msg(const char* what, std::size_t got, std::size_t want) {
  return std::string(what) + ": got " + std::to_string(got) + ", expected " +
         std::to_string(want);
}

// Layer widths input -> hidden... -> output.
std::vector<std::size_t> mlp_widths(const LocalModel& m) {
  std::vector<std::size_t> widths{m.input_dim};
  widths.insert(widths.end(), m.hidden.begin(), m.hidden.end());
  widths.push_back(m.out_dim);
  return widths;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.n = rows.size();
  out.dim = dim;
  out.features.reserve(out.n * dim);
  out.labels.reserve(out.n);
  for (std::size_t r : rows) {
    if (r >= n) throw ShapeError("subset row " + std::to_string(r) + " out of range");
    auto x = row(r);
    out.features.insert(out.features.end(), x.begin(), x.end());
    out.labels.push_back(labels[r]);
  }
  return out;
}

std::vector<std::size_t> PartitionedDataset::block_dims() const {
  std::vector<std::size_t> dims;
  dims.reserve(blocks.size());
  for (const auto& b : blocks) dims.push_back(b.dim);
  return dims;
}

std::size_t PartitionedDataset::total_dim() const {
  std::size_t d = 0;
  for (const auto& b : blocks) d += b.dim;
  return d;
}

void PartitionedDataset::validate() const {
  if (labels.size() != n) throw ShapeError(dims_msg("label count", labels.size(), n));
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    const auto& b = blocks[m];
    if (b.rows != n || b.values.size() != b.rows * b.dim)
      throw ShapeError("party " + std::to_string(m) + " does not hold n feature rows");
  }
}

std::vector<std::size_t> partition_features(std::size_t total, std::size_t q) {
  if (q == 0 || q > total)
    throw DomainError("cannot split " + std::to_string(total) + " features into " +
                      std::to_string(q) + " blocks");
  std::vector<std::size_t> dims(q, total / q);
  for (std::size_t m = 0; m < total % q; ++m) ++dims[m];
  return dims;
}

PartitionedDataset partition(const Dataset& data,
                             std::span<const std::size_t> block_dims) {
  const std::size_t sum = std::accumulate(block_dims.begin(), block_dims.end(), std::size_t{0});
  if (sum != data.dim) throw ShapeError(dims_msg("block dims sum", sum, data.dim));
  PartitionedDataset out;
  out.n = data.n;
  out.labels = data.labels;
  std::size_t offset = 0;
  for (std::size_t d : block_dims) {
    FeatureBlock b;
    b.rows = data.n;
    b.dim = d;
    b.values.resize(data.n * d);
    for (std::size_t i = 0; i < data.n; ++i) {
      auto x = data.row(i);
      std::copy_n(x.begin() + offset, d, b.values.begin() + i * d);
    }
    out.blocks.push_back(std::move(b));
    offset += d;
  }
  return out;
}

Dataset concatenate(const PartitionedDataset& data) {
  Dataset out;
  out.n = data.n;
  out.dim = data.total_dim();
  out.labels = data.labels;
  out.features.reserve(out.n * out.dim);
  for (std::size_t i = 0; i < data.n; ++i)
    for (const auto& b : data.blocks) {
      auto x = b.row(i);
      out.features.insert(out.features.end(), x.begin(), x.end());
    }
  return out;
}

LocalModel LocalModel::linear(std::size_t input_dim) {
  LocalModel m;
  m.kind = LocalKind::kLinear;
  m.input_dim = input_dim;
  m.out_dim = 1;
  return m;
}

LocalModel LocalModel::mlp(std::size_t input_dim, std::vector<std::size_t> hidden,
                           std::size_t output_dim) {
  if (output_dim == 0) throw DomainError("mlp output_dim must be positive");
  LocalModel m;
  m.kind = LocalKind::kMlp;
  m.input_dim = input_dim;
  m.hidden = std::move(hidden);
  m.out_dim = output_dim;
  return m;
}

std::size_t LocalModel::param_count() const {
  if (kind == LocalKind::kLinear) return input_dim;
  const auto widths = mlp_widths(*this);
  std::size_t count = 0;
  for (std::size_t l = 1; l < widths.size(); ++l)
    count += widths[l] * widths[l - 1] + widths[l];
  return count;
}

Vec local_forward(const LocalModel& model, std::span<const double> w,
                  std::span<const double> x) {
  if (w.size() != model.param_count())
    throw ShapeError(dims_msg("local weights", w.size(), model.param_count()));
  if (x.size() != model.input_dim)
    throw ShapeError(dims_msg("local features", x.size(), model.input_dim));

  if (model.kind == LocalKind::kLinear) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    return {s};
  }

  const auto widths = mlp_widths(model);
  Vec a(x.begin(), x.end());
  std::size_t off = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    const std::size_t in = widths[l - 1], out = widths[l];
    const double* W = w.data() + off;
    const double* b = W + out * in;
    Vec z(out);
    for (std::size_t r = 0; r < out; ++r) {
      double s = b[r];
      for (std::size_t k = 0; k < in; ++k) s += W[r * in + k] * a[k];
      z[r] = (l + 1 < widths.size()) ? std::max(0.0, s) : s;
    }
    a = std::move(z);
    off += out * in + out;
  }
  return a;
}

void local_backward(const LocalModel& model, std::span<const double> w,
                    std::span<const double> x, std::span<const double> upstream,
                    std::span<double> grad_w) {
  if (grad_w.size() != model.param_count() || w.size() != model.param_count())
    throw ShapeError(dims_msg("local gradient", grad_w.size(), model.param_count()));
  if (upstream.size() != model.output_dim())
    throw ShapeError(dims_msg("upstream gradient", upstream.size(), model.output_dim()));
  if (x.size() != model.input_dim)
    throw ShapeError(dims_msg("local features", x.size(), model.input_dim));

  if (model.kind == LocalKind::kLinear) {
    for (std::size_t j = 0; j < x.size(); ++j) grad_w[j] += upstream[0] * x[j];
    return;
  }

  const auto widths = mlp_widths(model);
  const std::size_t layers = widths.size() - 1;
  std::vector<Vec> acts{Vec(x.begin(), x.end())};
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (std::size_t l = 1; l <= layers; ++l) {
    const std::size_t in = widths[l - 1], out = widths[l];
    offsets.push_back(off);
    const double* W = w.data() + off;
    const double* b = W + out * in;
    Vec z(out);
    for (std::size_t r = 0; r < out; ++r) {
      double s = b[r];
      for (std::size_t k = 0; k < in; ++k) s += W[r * in + k] * acts.back()[k];
      z[r] = (l < layers) ? std::max(0.0, s) : s;
    }
    acts.push_back(std::move(z));
    off += out * in + out;
  }

  Vec delta(upstream.begin(), upstream.end());
  for (std::size_t l = layers; l >= 1; --l) {
    const std::size_t in = widths[l - 1], out = widths[l];
    const double* W = w.data() + offsets[l - 1];
    double* gW = grad_w.data() + offsets[l - 1];
    double* gb = gW + out * in;
    const Vec& prev = acts[l - 1];
    for (std::size_t r = 0; r < out; ++r) {
      gb[r] += delta[r];
      for (std::size_t k = 0; k < in; ++k) gW[r * in + k] += delta[r] * prev[k];
    }
    if (l == 1) break;
    Vec next(in, 0.0);
    for (std::size_t k = 0; k < in; ++k) {
      if (prev[k] <= 0.0) continue;  // rectifier was inactive
      double s = 0.0;
      for (std::size_t r = 0; r < out; ++r) s += W[r * in + k] * delta[r];
      next[k] = s;
    }
    delta = std::move(next);
  }
}

GlobalModel GlobalModel::logistic(std::size_t parties) {
  GlobalModel g;
  g.kind = GlobalKind::kLogistic;
  g.parties = parties;
  g.party_output_dim = 1;
  g.classes = 2;
  return g;
}

GlobalModel GlobalModel::softmax_fcn(std::size_t parties, std::size_t output_dim,
                                     std::size_t classes) {
  if (classes < 2) throw DomainError("softmax head needs at least two classes");
  GlobalModel g;
  g.kind = GlobalKind::kSoftmaxFcn;
  g.parties = parties;
  g.party_output_dim = output_dim;
  g.classes = classes;
  return g;
}

std::size_t GlobalModel::param_count() const {
  return kind == GlobalKind::kLogistic ? 0 : classes * input_dim();
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

namespace {

void check_global_inputs(const GlobalModel& model, std::span<const double> w0,
                         std::span<const double> c, int label) {
  if (c.size() != model.input_dim())
    throw ShapeError(dims_msg("party outputs", c.size(), model.input_dim()));
  if (w0.size() != model.param_count())
    throw ShapeError(dims_msg("global weights", w0.size(), model.param_count()));
  if (model.kind == GlobalKind::kLogistic) {
    if (label != 1 && label != -1)
      throw DomainError("logistic label " + std::to_string(label) + " not in {-1,+1}");
  } else if (label < 0 || static_cast<std::size_t>(label) >= model.classes) {
    throw DomainError("class label " + std::to_string(label) + " outside [0," +
                      std::to_string(model.classes) + ")");
  }
}

void logits(const GlobalModel& model, std::span<const double> w0,
            std::span<const double> c, Vec& out) {
  const std::size_t in = model.input_dim();
  out.assign(model.classes, 0.0);
  for (std::size_t k = 0; k < model.classes; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < in; ++j) s += w0[k * in + j] * c[j];
    out[k] = s;
  }
}

double logsumexp(const Vec& z) {
  const double top = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - top);
  return top + std::log(s);
}

}  // namespace

double global_value(const GlobalModel& model, std::span<const double> w0,
                    std::span<const double> c, int label) {
  check_global_inputs(model, w0, c, label);
  if (model.kind == GlobalKind::kLogistic) {
    double s = 0.0;
    for (double v : c) s += v;
    return softplus(-label * s);
  }
  Vec z;
  logits(model, w0, c, z);
  return logsumexp(z) - z[static_cast<std::size_t>(label)];
}

void global_backward(const GlobalModel& model, std::span<const double> w0,
                     std::span<const double> c, int label,
                     std::span<double> grad_c, std::span<double> grad_w0) {
  check_global_inputs(model, w0, c, label);
  if (grad_c.size() != c.size()) throw ShapeError(dims_msg("grad_c", grad_c.size(), c.size()));
  if (grad_w0.size() != w0.size())
    throw ShapeError(dims_msg("grad_w0", grad_w0.size(), w0.size()));

  if (model.kind == GlobalKind::kLogistic) {
    double s = 0.0;
    for (double v : c) s += v;
    const double z = -label * s;
    // d/ds softplus(-y s) = -y * sigmoid(-y s)
    const double sig = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    std::fill(grad_c.begin(), grad_c.end(), -label * sig);
    return;
  }

  Vec z;
  logits(model, w0, c, z);
  const double lse = logsumexp(z);
  const std::size_t in = model.input_dim();
  std::fill(grad_c.begin(), grad_c.end(), 0.0);
  for (std::size_t k = 0; k < model.classes; ++k) {
    const double p = std::exp(z[k] - lse) - (static_cast<int>(k) == label ? 1.0 : 0.0);
    for (std::size_t j = 0; j < in; ++j) {
      grad_w0[k * in + j] += p * c[j];
      grad_c[j] += p * w0[k * in + j];
    }
  }
}

int global_predict(const GlobalModel& model, std::span<const double> w0,
                   std::span<const double> c) {
  if (model.kind == GlobalKind::kLogistic) {
    double s = 0.0;
    for (double v : c) s += v;
    return s >= 0.0 ? 1 : -1;
  }
  Vec z;
  logits(model, w0, c, z);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double nonconvex_reg(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) {
    const double sq = v * v;
    s += sq / (1.0 + sq);
  }
  return s;
}

double nonconvex_reg_at(std::span<const double> w, double mu,
                        std::span<const double> u) {
  if (u.size() != w.size()) throw ShapeError(dims_msg("direction", u.size(), w.size()));
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double v = w[j] + mu * u[j];
    const double sq = v * v;
    s += sq / (1.0 + sq);
  }
  return s;
}

void nonconvex_reg_grad(std::span<const double> w, double scale,
                        std::span<double> out) {
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double d = 1.0 + w[j] * w[j];
    out[j] += scale * 2.0 * w[j] / (d * d);
  }
}

void ModelSpec::validate(const PartitionedDataset& data) const {
  data.validate();
  if (local.size() != data.parties())
    throw ShapeError(dims_msg("local model count", local.size(), data.parties()));
  if (global.parties != local.size())
    throw ShapeError(dims_msg("global head parties", global.parties, local.size()));
  for (std::size_t m = 0; m < local.size(); ++m) {
    if (local[m].input_dim != data.blocks[m].dim)
      throw ShapeError("party " + std::to_string(m) + ": " +
                       dims_msg("input dim", local[m].input_dim, data.blocks[m].dim));
    if (local[m].output_dim() != global.party_output_dim)
      throw ShapeError("party " + std::to_string(m) + ": " +
                       dims_msg("output dim", local[m].output_dim(), global.party_output_dim));
  }
}

std::vector<std::size_t> ModelSpec::local_param_counts() const {
  std::vector<std::size_t> dims;
  for (const auto& m : local) dims.push_back(m.param_count());
  return dims;
}

bool ModelSpec::any_black_box() const {
  return std::any_of(local.begin(), local.end(), [](const LocalModel& m) { return m.black_box; });
}

ModelSpec make_glm_spec(std::span<const std::size_t> block_dims) {
  ModelSpec spec;
  for (std::size_t d : block_dims) spec.local.push_back(LocalModel::linear(d));
  spec.global = GlobalModel::logistic(block_dims.size());
  return spec;
}

ModelState::ModelState(const ModelSpec& spec)
    : w0_(spec.global.param_count(), 0.0) {
  for (const auto& m : spec.local) w_.emplace_back(m.param_count(), 0.0);
}

ModelState ModelState::initial(const ModelSpec& spec, std::uint64_t seed, double scale) {
  ModelState s(spec);
  for (std::size_t m = 0; m < spec.local.size(); ++m) {
    const auto& lm = spec.local[m];
    if (lm.kind == LocalKind::kLinear) continue;
    Stream rng(seed, static_cast<std::uint16_t>(m + 1), Purpose::kInit, 0);
    const auto widths = mlp_widths(lm);
    std::size_t off = 0;
    for (std::size_t l = 1; l < widths.size(); ++l) {
      const double sd = scale / std::sqrt(static_cast<double>(widths[l - 1]));
      for (std::size_t k = 0; k < widths[l] * widths[l - 1]; ++k) s.w_[m][off + k] = sd * rng.normal();
      off += widths[l] * widths[l - 1] + widths[l];
    }
  }
  if (!s.w0_.empty()) {
    Stream rng(seed, 0, Purpose::kInit, 0);
    const double sd = scale / std::sqrt(static_cast<double>(spec.global.input_dim()));
    for (double& v : s.w0_) v = sd * rng.normal();
  }
  return s;
}

void apply_step(Vec& block, double eta, std::span<const double> direction,
                const char* what) {
  if (direction.size() != block.size())
    throw ShapeError(dims_msg(what, direction.size(), block.size()));
  Vec next(block.size());
  for (std::size_t j = 0; j < block.size(); ++j) {
    next[j] = block[j] - eta * direction[j];
    if (!std::isfinite(next[j]))
      throw NumericError(std::string(what) + ": update produced a non-finite entry");
  }
  block = std::move(next);
}

void ModelState::step_local(std::size_t m, double eta, std::span<const double> direction) {
  apply_step(w_.at(m), eta, direction, "local update");
}

void ModelState::step_global(double eta, std::span<const double> direction) {
  apply_step(w0_, eta, direction, "global update");
}

Vec ModelState::flatten() const {
  Vec out(w0_);
  for (const auto& w : w_) out.insert(out.end(), w.begin(), w.end());
  return out;
}

std::size_t ModelState::total_params() const {
  std::size_t d = w0_.size();
  for (const auto& w : w_) d += w.size();
  return d;
}

Vec sample_outputs(const ModelState& state, const PartitionedDataset& data,
                   const ModelSpec& spec, std::size_t i) {
  Vec c;
  c.reserve(spec.global.input_dim());
  for (std::size_t m = 0; m < spec.local.size(); ++m) {
    const Vec cm = local_forward(spec.local[m], state.local(m), data.blocks[m].row(i));
    c.insert(c.end(), cm.begin(), cm.end());
  }
  return c;
}

double sample_cost(const ModelState& state, const PartitionedDataset& data,
                   const ModelSpec& spec, double lambda_eff, std::size_t i) {
  const Vec c = sample_outputs(state, data, spec, i);
  double reg = 0.0;
  for (std::size_t m = 0; m < state.parties(); ++m) reg += nonconvex_reg(state.local(m));
  return global_value(spec.global, state.w0(), c, data.labels[i]) + lambda_eff * reg;
}

double composite_objective(const ModelState& state, const PartitionedDataset& data,
                           double lambda_eff, const ModelSpec& spec) {
  return kernels::objective_parallel(state, data, lambda_eff, spec);
}

}  // namespace revelight
