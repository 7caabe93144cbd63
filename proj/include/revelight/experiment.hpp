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

// Flat key = value configuration and end-to-end experiment orchestration.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "revelight/data.hpp"
#include "revelight/engine.hpp"
#include "revelight/models.hpp"

namespace revelight {

/// Parsed `key = value` lines; `#` starts a comment. Keys are unique.
class ConfigMap {
 public:
  /// Throws ConfigError naming the line of a malformed or repeated entry.
  static ConfigMap parse(std::istream& in);
  static ConfigMap load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;
  /// Keys never read through a getter; used to reject typos.
  std::vector<std::string> unused() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> read_;
};

struct ExperimentSpec {
  RunConfig run;

  // Data: a file, or the built-in generator when `dataset` is empty.
  std::string dataset;
  DataFormat format = DataFormat::kLibsvm;
  std::string labels_path;
  std::optional<std::size_t> features;  // declared width for file data
  SyntheticSpec synthetic;
  bool holdout = true;

  // Model.
  std::string model = "glm";  // glm or mlp
  std::vector<std::size_t> hidden;
  std::size_t output_dim = 1;
  bool black_box = false;
  double init_scale = 1.0;

  /// Stop once loss - f* <= gap, with f* from full-batch gradient descent.
  std::optional<double> stop_gap;
  std::string out_dir = ".";

  /// Builds a spec from config keys; unknown keys are a ConfigError.
  static ExperimentSpec from_config(const ConfigMap& cfg);
};

struct ExperimentData {
  PartitionedDataset train;
  PartitionedDataset test;
  ModelSpec model;
  ModelState init;
};

/// Loads or generates the data, applies the hold-out split and partitions
/// features across cfg.run.q parties.
ExperimentData prepare_experiment(const ExperimentSpec& spec);

/// Minimum of the composite objective by full-batch gradient descent with
/// backtracking. Needs differentiable models.
double reference_optimum(const ModelSpec& spec, const PartitionedDataset& data, double lambda_eff,
                         const ModelState& start, std::size_t max_iters = 20000);

struct ExperimentOutput {
  RunResult result;
  std::string summary;  // algorithm,seed,final_loss,final_acc,total_bytes,vtime
  std::string metrics_path;
  std::string transcript_path;  // empty for nonfed
  std::optional<double> target_loss;
};

/// Runs the configured algorithm and writes metrics.csv, transcript.jsonl
/// (federated algorithms) and summary.csv into spec.out_dir.
ExperimentOutput run_experiment(const ExperimentSpec& spec);

struct CommRow {
  std::size_t block_dim = 0;
  CommRatio ratio;
};

/// For each block size, synthetic data with q blocks of that width, one
/// function-value run and one gradient-baseline run over the same schedule.
std::vector<CommRow> bench_comm(const ExperimentSpec& base, const std::vector<std::size_t>& blocks);

struct SpeedupRow {
  std::size_t q = 0;
  double time = 0.0;  // virtual time to the stop loss
  bool reached = false;
  double speedup = 0.0;
};

/// Trains with each party count until the stop criterion (required) and
/// reports time-to-target speedups relative to q = 1.
std::vector<SpeedupRow> speedup_sweep(const ExperimentSpec& base, const std::vector<std::size_t>& qs);

}  // namespace revelight
