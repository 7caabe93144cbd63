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

// Composite vertical-federated objective
//
//   f(w0, w) = (1/n) sum_i F0(w0, c_i1..c_iq; y_i) + lambda_eff * sum_m g(w_m),
//   c_im = F_m(w_m; x_im),
//
// with linear or rectifier-MLP local models, a logistic or softmax global
// head, and the bounded nonconvex regularizer g(w) = sum_j w_j^2 / (1 + w_j^2).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace revelight {

using Vec = std::vector<double>;

/// Dense row-major feature matrix held by one party.
struct FeatureBlock {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
};

/// Unpartitioned data as it comes off disk or out of a generator.
struct Dataset {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> features;  // n x dim, row-major
  std::vector<int> labels;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Features split column-wise into q contiguous blocks; labels belong to the
/// server role only.
struct PartitionedDataset {
  std::size_t n = 0;
  std::vector<FeatureBlock> blocks;
  std::vector<int> labels;

  std::size_t parties() const { return blocks.size(); }
  std::vector<std::size_t> block_dims() const;
  std::size_t total_dim() const;
  /// Throws ShapeError when a block disagrees with n or labels are missing.
  void validate() const;
};

/// Block sizes for q nearly-equal contiguous slices of `total` features; the
/// remainder goes to the leading blocks.
std::vector<std::size_t> partition_features(std::size_t total, std::size_t q);

PartitionedDataset partition(const Dataset& data,
                             std::span<const std::size_t> block_dims);
Dataset concatenate(const PartitionedDataset& data);

enum class LocalKind { kLinear, kMlp };

struct LocalModel {
  LocalKind kind = LocalKind::kLinear;
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;  // mlp only; rectifier after each
  std::size_t out_dim = 1;
  /// Declared black box: value queries only, no gradients exposed.
  bool black_box = false;

  static LocalModel linear(std::size_t input_dim);
  static LocalModel mlp(std::size_t input_dim, std::vector<std::size_t> hidden,
                        std::size_t output_dim);

  std::size_t output_dim() const { return kind == LocalKind::kLinear ? 1 : out_dim; }
  std::size_t param_count() const;
};

/// c = F_m(w; x). Throws ShapeError on a dimension mismatch.
Vec local_forward(const LocalModel& model, std::span<const double> w,
                  std::span<const double> x);

/// grad_w += J_w(F_m)^T upstream, where upstream has output_dim entries.
void local_backward(const LocalModel& model, std::span<const double> w,
                    std::span<const double> x, std::span<const double> upstream,
                    std::span<double> grad_w);

enum class GlobalKind { kLogistic, kSoftmaxFcn };

struct GlobalModel {
  GlobalKind kind = GlobalKind::kLogistic;
  std::size_t parties = 1;
  std::size_t party_output_dim = 1;
  std::size_t classes = 2;

  static GlobalModel logistic(std::size_t parties);
  /// Single linear layer (classes x parties*output_dim, no bias) + softmax.
  static GlobalModel softmax_fcn(std::size_t parties, std::size_t output_dim,
                                 std::size_t classes);

  std::size_t input_dim() const { return parties * party_output_dim; }
  std::size_t param_count() const;
};

/// F0(w0, c; y). `c` is the concatenation of the q party outputs in party
/// order. Throws DomainError for a label outside the model's classes.
double global_value(const GlobalModel& model, std::span<const double> w0,
                    std::span<const double> c, int label);

/// Fills dF0/dc (size input_dim) and accumulates dF0/dw0 into grad_w0.
void global_backward(const GlobalModel& model, std::span<const double> w0,
                     std::span<const double> c, int label,
                     std::span<double> grad_c, std::span<double> grad_w0);

int global_predict(const GlobalModel& model, std::span<const double> w0,
                   std::span<const double> c);

/// Stable log(1 + exp(z)).
double softplus(double z);

double nonconvex_reg(std::span<const double> w);
/// g(w + mu * u) without materialising the shifted vector.
double nonconvex_reg_at(std::span<const double> w, double mu,
                        std::span<const double> u);
/// out += scale * grad g(w).
void nonconvex_reg_grad(std::span<const double> w, double scale,
                        std::span<double> out);

struct ModelSpec {
  std::vector<LocalModel> local;
  GlobalModel global;

  std::size_t parties() const { return local.size(); }
  /// Throws ShapeError when the spec cannot consume `data`.
  void validate(const PartitionedDataset& data) const;
  /// d_1..d_q.
  std::vector<std::size_t> local_param_counts() const;
  bool any_black_box() const;
};

/// Logistic GLM over the given blocks: linear local models, logistic head.
ModelSpec make_glm_spec(std::span<const std::size_t> block_dims);

/// block <- block - eta * direction. Throws ShapeError on a size mismatch and
/// NumericError (leaving the block untouched) if an entry would be non-finite.
void apply_step(Vec& block, double eta, std::span<const double> direction,
                const char* what);

/// Parameter blocks w0 (server) and w_1..w_q (parties).
class ModelState {
 public:
  ModelState() = default;
  explicit ModelState(const ModelSpec& spec);

  /// Zero linear weights; MLP and softmax weights from N(0, scale/fan_in).
  static ModelState initial(const ModelSpec& spec, std::uint64_t seed,
                            double scale = 1.0);

  std::span<const double> w0() const { return w0_; }
  std::span<const double> local(std::size_t m) const { return w_.at(m); }
  std::span<double> mutable_w0() { return w0_; }
  std::span<double> mutable_local(std::size_t m) { return w_.at(m); }
  std::size_t parties() const { return w_.size(); }

  /// w_m <- w_m - eta * direction. Rejects (and leaves the block untouched)
  /// a wrong-sized direction or a step producing a non-finite entry.
  void step_local(std::size_t m, double eta, std::span<const double> direction);
  void step_global(double eta, std::span<const double> direction);

  /// [w0, w_1, ..., w_q] flattened.
  Vec flatten() const;
  std::size_t total_params() const;

  bool operator==(const ModelState&) const = default;

 private:
  Vec w0_;
  std::vector<Vec> w_;
};

/// Concatenated party outputs c_i for sample i.
Vec sample_outputs(const ModelState& state, const PartitionedDataset& data,
                   const ModelSpec& spec, std::size_t i);

/// Per-sample cost f_i = F0(w0, c_i; y_i) + lambda_eff * sum_m g(w_m).
double sample_cost(const ModelState& state, const PartitionedDataset& data,
                   const ModelSpec& spec, double lambda_eff, std::size_t i);

/// f = (1/n) sum_i F0 + lambda_eff * sum_m g(w_m). Uses the parallel kernel;
/// see kernels.hpp for the serial reference.
double composite_objective(const ModelState& state,
                           const PartitionedDataset& data, double lambda_eff,
                           const ModelSpec& spec);

}  // namespace revelight
