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

// Party and server roles of the function-value protocol.
//
// A party samples an index, perturbs its own block along a fresh direction and
// uploads the output pair (c, c_hat). The server assembles the remaining
// outputs from its cache, replies with (h, h_bar) and, when the global head
// has weights, takes its own two-point step. Cache cells older than the
// staleness bound are re-queried before use.
//
// Time here is the number of applied party updates; the caller supplies it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "revelight/direction.hpp"
#include "revelight/models.hpp"
#include "revelight/wire.hpp"

namespace revelight {

/// Last output received from each party for each sample.
class ServerCache {
 public:
  ServerCache() = default;
  ServerCache(std::size_t n, std::vector<std::size_t> output_dims);

  std::size_t samples() const { return n_; }
  std::size_t parties() const { return dims_.size(); }
  bool populated(std::size_t i, std::size_t m) const;
  /// Throws ProtocolError for an unpopulated cell.
  std::span<const double> latest(std::size_t i, std::size_t m) const;
  std::uint64_t stamp(std::size_t i, std::size_t m) const;
  /// Throws ProtocolError on a stamp older than the stored one and ShapeError
  /// on a wrong output length.
  void store(std::size_t i, std::size_t m, std::span<const double> c, std::uint64_t stamp);
  bool warm() const { return filled_ == n_ * dims_.size(); }

 private:
  std::size_t cell(std::size_t i, std::size_t m) const;

  std::size_t n_ = 0;
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offset_;  // per party, into a row of `values_`
  std::size_t row_width_ = 0;
  std::vector<double> values_;
  std::vector<std::uint64_t> stamps_;
  std::vector<char> set_;
  std::size_t filled_ = 0;
};

struct PartyConfig {
  Scheme scheme = Scheme::kGaussian;
  double mu = 1e-3;
  double eta = 1e-3;
  double lambda_eff = 0.0;
  std::uint64_t seed = 0;
};

class Party {
 public:
  Party(std::uint32_t id, LocalModel model, const FeatureBlock& block, Vec w, PartyConfig cfg);

  std::uint32_t id() const { return id_; }
  const LocalModel& model() const { return model_; }
  std::span<const double> weights() const { return w_; }
  /// Number of updates applied so far; also the seq of the next Upload.
  std::uint32_t steps() const { return steps_; }
  bool pending() const { return pending_.has_value(); }

  /// Uniform index from this party's sample stream for its next step.
  std::uint32_t draw_sample() const;
  /// Computes c and c_hat for `sample` (own draw when absent) with a fresh
  /// direction. Throws ProtocolError while a previous Upload is unanswered.
  Upload begin_step(std::optional<std::uint32_t> sample = std::nullopt);
  /// Applies the block update for the pending Upload and returns the squared
  /// norm of the estimate. Throws ProtocolError for a Reply that does not
  /// answer the pending Upload.
  double finish_step(const Reply& reply);
  /// Current output for the queried sample.
  Refresh answer(const Query& query) const;
  /// Initial upload for the cache: c_hat = c.
  Upload warmup_upload(std::uint32_t sample) const;

 private:
  struct Pending {
    std::uint32_t sample = 0;
    std::uint32_t seq = 0;
    Direction u;
    double reg_w = 0.0;
    double reg_perturbed = 0.0;
  };

  Vec output(std::span<const double> w, std::uint32_t sample) const;

  std::uint32_t id_;
  LocalModel model_;
  const FeatureBlock* block_;
  Vec w_;
  PartyConfig cfg_;
  std::uint32_t steps_ = 0;
  std::optional<Pending> pending_;
};

struct ServerConfig {
  Scheme scheme = Scheme::kGaussian;
  double mu = 1e-3;
  double eta = 1e-3;
  std::size_t tau = 0;
  std::uint64_t seed = 0;
};

class Server {
 public:
  Server(GlobalModel model, std::vector<int> labels, Vec w0, ServerConfig cfg);

  const GlobalModel& model() const { return model_; }
  std::span<const double> w0() const { return w0_; }
  const ServerCache& cache() const { return cache_; }
  ServerCache& mutable_cache() { return cache_; }
  std::size_t handled() const { return handled_; }
  std::uint64_t max_staleness() const { return max_staleness_; }
  std::uint32_t next_query_seq() const { return query_seq_; }

  void ingest_warmup(const Upload& up);
  /// Stores an upload's output without replying (synchronous rounds).
  void ingest_upload(const Upload& up, std::uint64_t stamp);
  /// `stamp` is the time at which the party computed the value.
  void ingest_refresh(const Refresh& r, std::uint64_t stamp);
  /// Cells of other parties that must be refreshed before `up` can be handled
  /// at time `now`: unpopulated or older than tau.
  std::vector<Query> stale_cells(std::uint32_t party, std::uint32_t sample, std::uint64_t now);
  std::vector<Query> stale_cells(const Upload& up, std::uint64_t now) {
    return stale_cells(up.party, up.sample, now);
  }
  /// Outputs for sample `i` with party `m`'s entry replaced by `c`.
  Vec assemble(std::size_t i, std::size_t m, std::span<const double> c) const;
  /// Computes the Reply from the pre-update cache, steps w0 when the head has
  /// weights, then stores c in the cache. Throws ProtocolError for an unknown
  /// sample or party, or when a cell used is staler than tau.
  Reply handle_upload(const Upload& up, std::uint64_t now);

  /// Checks the sample and party ids of an incoming message.
  void check_ids(std::uint32_t party, std::uint32_t sample) const;
  /// Oldest cell of another party that `up` would read at time `now`.
  std::uint64_t staleness_of(std::size_t i, std::size_t m, std::uint64_t now) const;
  /// Applies w0 <- w0 - eta * direction (used by the gradient baseline).
  void step_w0(std::span<const double> direction);
  void note_staleness(std::uint64_t s);

 private:
  GlobalModel model_;
  std::vector<int> labels_;
  Vec w0_;
  ServerConfig cfg_;
  ServerCache cache_;
  std::size_t handled_ = 0;
  std::uint64_t max_staleness_ = 0;
  std::uint32_t query_seq_ = 0;
};

/// Every party uploads its initial output for every sample; the transcript
/// receives exactly n * q Upload entries at time 0.
void warmup_cache(std::span<Party> parties, Server& server, Transcript& transcript);

/// Parties, server and transcript driven in lockstep on one thread, with
/// refreshes answered immediately. Used for replay tests and small runs.
class Federation {
 public:
  Federation(const ModelSpec& spec, const PartitionedDataset& data, const ModelState& init,
             const PartyConfig& party_cfg, const ServerConfig& server_cfg,
             bool keep_transcript = true);

  void warmup();
  /// One full activation of party m; returns the squared estimate norm.
  double client_step(std::size_t m, std::optional<std::uint32_t> sample = std::nullopt);

  std::uint64_t now() const { return now_; }
  ModelState snapshot() const;
  std::vector<Party>& parties() { return parties_; }
  Server& server() { return server_; }
  const Transcript& transcript() const { return transcript_; }

 private:
  const ModelSpec* spec_;
  std::vector<Party> parties_;
  Server server_;
  Transcript transcript_;
  std::uint64_t now_ = 0;
};

}  // namespace revelight
