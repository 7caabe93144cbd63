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

// Training drivers: asynchronous and synchronous function-value protocols, a
// centralized counterpart, and a baseline that ships intermediate gradients.
//
// In virtual-clock mode everything runs on one thread as a discrete-event
// simulation and is bit-reproducible from the seed. Wall-clock mode runs the
// parties on worker threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "revelight/direction.hpp"
#include "revelight/models.hpp"
#include "revelight/wire.hpp"

namespace revelight {

enum class Algorithm { kAsyRevelGau, kAsyRevelUni, kSynRevel, kNonFed, kTig };
enum class ClockMode { kVirtual, kWall };
enum class ComputeDist { kFixed, kExponential };

std::string_view to_string(Algorithm a);
/// asyrevel_gau, asyrevel_uni, synrevel, nonfed, tig. ConfigError otherwise.
Algorithm parse_algorithm(std::string_view text);
std::string_view to_string(ClockMode c);
ClockMode parse_clock(std::string_view text);
std::string_view to_string(ComputeDist c);
ComputeDist parse_compute_dist(std::string_view text);

struct Straggler {
  std::optional<std::size_t> party;
  double slowdown = 1.0;
};

struct RunConfig {
  Algorithm algorithm = Algorithm::kAsyRevelGau;
  std::size_t q = 1;
  /// Update events for the asynchronous drivers, rounds for SynREVEL.
  std::size_t T = 0;
  double eta = 1e-3;
  double eta_server = 0.0;  // 0 means eta / q
  double mu = 1e-3;
  double lambda_eff = 0.0;
  std::size_t tau = 0;
  std::vector<double> p;  // activation probabilities; empty means uniform
  std::uint64_t seed = 0;
  Straggler straggler;
  ClockMode clock = ClockMode::kVirtual;
  /// Direction family for synrevel and nonfed; the asyrevel variants fix it.
  Scheme scheme = Scheme::kGaussian;

  // Delay model. Party m computes for compute_time * slowdown / (q p_m) on
  // average; every message takes `latency` to arrive.
  double compute_time = 1.0;
  ComputeDist compute_dist = ComputeDist::kExponential;
  double latency = 0.0;

  /// All parties use the shared sample stream indexed by their step count.
  bool shared_samples = false;
  std::size_t eval_every = 0;  // 0 means once per n events
  std::optional<double> stop_loss;
  bool keep_transcript = true;
  std::size_t threads = 0;  // wall clock only; 0 means REVELIGHT_THREADS or q

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
  Scheme effective_scheme() const;
  double server_eta() const;
  /// Activation probability of party m.
  double activation_prob(std::size_t m) const;
  /// Mean compute time of party m.
  double mean_compute(std::size_t m) const;
};

struct MetricRow {
  std::size_t t = 0;
  double vtime = 0.0;
  double wtime = 0.0;
  double loss = 0.0;
  double acc = 0.0;
  std::size_t bytes_up = 0;
  std::size_t bytes_down = 0;
  std::uint64_t staleness = 0;
  double gnorm2 = 0.0;
};

struct RunMetrics {
  std::vector<MetricRow> rows;

  /// Header t,vtime,wtime,loss,acc,bytes_up,bytes_down,staleness,gnorm2 and
  /// one row per evaluation, floats with 12 significant digits.
  void write_csv(std::ostream& out) const;
};

struct RunResult {
  RunMetrics metrics;
  ModelState final_state;
  Transcript transcript;
  std::vector<std::size_t> activations;  // per party
  std::vector<std::uint32_t> schedule;   // party of each applied update
  std::size_t events = 0;
  double vtime = 0.0;
  std::uint64_t max_staleness = 0;
  bool reached_stop = false;
};

/// Training data plus an optional held-out set for accuracy.
struct RunData {
  const PartitionedDataset* train = nullptr;
  const PartitionedDataset* test = nullptr;  // null means accuracy on train
};

/// Called at every evaluation point with the event index and current weights.
using Checkpoint = std::function<void(std::size_t t, const ModelState& state)>;

RunResult run_asyrevel(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                       const ModelState& init, const Checkpoint& on_eval = {});
RunResult run_synrevel(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                       const ModelState& init, const Checkpoint& on_eval = {});
/// Block ZOO-SGD on one node, replaying the zero-latency activation order and
/// the parties' sample and direction streams.
RunResult run_nonfederated(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                           const ModelState& init, const Checkpoint& on_eval = {});
/// Throws UnsupportedError when any model is a declared black box.
RunResult run_tig_baseline(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                           const ModelState& init, const Checkpoint& on_eval = {});
/// Dispatches on cfg.algorithm.
RunResult run(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
              const ModelState& init, const Checkpoint& on_eval = {});

/// Party order of the first `events` updates when messages arrive instantly.
std::vector<std::uint32_t> activation_order(const RunConfig& cfg, std::size_t events);

/// Per-message transfer cost: latency plus size over bandwidth.
struct LinkModel {
  double latency_us = 50.0;
  double bytes_per_us = 125.0;
};

/// Ratios are baseline cost over function-value cost.
struct CommRatio {
  std::size_t asy_bytes = 0;
  std::size_t tig_bytes = 0;
  double byte_ratio = 0.0;
  double asy_time_us = 0.0;
  double tig_time_us = 0.0;
  double time_ratio = 0.0;
};

/// Compares traffic of a function-value run and a gradient-baseline run over
/// the same schedule. Throws UsageError when the schedules differ or either
/// transcript was not kept.
CommRatio measure_comm(const RunResult& asy, const RunResult& tig, const LinkModel& link = {});

}  // namespace revelight
