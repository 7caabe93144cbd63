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

#include "revelight/protocol.hpp"

#include <algorithm>
#include <string>

#include "revelight/errors.hpp"
#include "revelight/estimator.hpp"
#include "revelight/rng.hpp"

namespace revelight {

namespace {

std::string cell_name(std::size_t i, std::size_t m) {
  return "(sample " + std::to_string(i) + ", party " + std::to_string(m) + ")";
}

}  // namespace

ServerCache::ServerCache(std::size_t n, std::vector<std::size_t> output_dims)
    : n_(n), dims_(std::move(output_dims)) {
  offset_.reserve(dims_.size());
  for (std::size_t d : dims_) {
    offset_.push_back(row_width_);
    row_width_ += d;
  }
  values_.assign(n_ * row_width_, 0.0);
  stamps_.assign(n_ * dims_.size(), 0);
  set_.assign(n_ * dims_.size(), 0);
}

std::size_t ServerCache::cell(std::size_t i, std::size_t m) const {
  if (i >= n_ || m >= dims_.size())
    throw ProtocolError("cache cell " + cell_name(i, m) + " out of range");
  return i * dims_.size() + m;
}

bool ServerCache::populated(std::size_t i, std::size_t m) const { return set_[cell(i, m)] != 0; }

std::span<const double> ServerCache::latest(std::size_t i, std::size_t m) const {
  if (!populated(i, m)) throw ProtocolError("cache cell " + cell_name(i, m) + " is empty");
  return {values_.data() + i * row_width_ + offset_[m], dims_[m]};
}

std::uint64_t ServerCache::stamp(std::size_t i, std::size_t m) const { return stamps_[cell(i, m)]; }

void ServerCache::store(std::size_t i, std::size_t m, std::span<const double> c,
                        std::uint64_t stamp) {
  const std::size_t k = cell(i, m);
  if (c.size() != dims_[m])
    throw ShapeError("cache cell " + cell_name(i, m) + " expects " + std::to_string(dims_[m]) +
                     " values, got " + std::to_string(c.size()));
  if (set_[k] && stamp < stamps_[k])
    throw ProtocolError("cache cell " + cell_name(i, m) + " stamp would decrease");
  std::copy(c.begin(), c.end(), values_.begin() + i * row_width_ + offset_[m]);
  stamps_[k] = stamp;
  if (!set_[k]) {
    set_[k] = 1;
    ++filled_;
  }
}

Party::Party(std::uint32_t id, LocalModel model, const FeatureBlock& block, Vec w, PartyConfig cfg)
    : id_(id), model_(std::move(model)), block_(&block), w_(std::move(w)), cfg_(cfg) {
  if (w_.size() != model_.param_count())
    throw ShapeError("party " + std::to_string(id) + " weights have " + std::to_string(w_.size()) +
                     " entries, model needs " + std::to_string(model_.param_count()));
  if (block.dim != model_.input_dim)
    throw ShapeError("party " + std::to_string(id) + " feature block width does not match model");
}

std::uint32_t Party::draw_sample() const {
  Stream s(cfg_.seed, static_cast<std::uint16_t>(id_ + 1), Purpose::kSample, steps_);
  return static_cast<std::uint32_t>(s.below(block_->rows));
}

Vec Party::output(std::span<const double> w, std::uint32_t sample) const {
  if (sample >= block_->rows) throw ProtocolError("sample " + std::to_string(sample) + " unknown");
  return local_forward(model_, w, block_->row(sample));
}

Upload Party::begin_step(std::optional<std::uint32_t> sample) {
  if (pending_) throw ProtocolError("party " + std::to_string(id_) + " already has an Upload in flight");
  const std::uint32_t i = sample ? *sample : draw_sample();
  Stream dir_stream(cfg_.seed, static_cast<std::uint16_t>(id_ + 1), Purpose::kClientDirection, steps_);
  Pending p;
  p.sample = i;
  p.seq = steps_;
  p.u = sample_direction(cfg_.scheme, w_.size(), dir_stream);
  Vec shifted(w_.size());
  for (std::size_t j = 0; j < w_.size(); ++j) shifted[j] = w_[j] + cfg_.mu * p.u.u[j];
  p.reg_w = nonconvex_reg(w_);
  p.reg_perturbed = nonconvex_reg(shifted);
  Upload up{id_, i, steps_, output(w_, i), output(shifted, i)};
  pending_ = std::move(p);
  return up;
}

double Party::finish_step(const Reply& reply) {
  if (!pending_ || reply.party != id_ || reply.sample != pending_->sample ||
      reply.seq != pending_->seq)
    throw ProtocolError("Reply for sample " + std::to_string(reply.sample) + " (seq " +
                        std::to_string(reply.seq) + ") has no pending Upload at party " +
                        std::to_string(id_));
  const Vec g = client_block_zoe(reply.h, reply.h_bar, pending_->reg_w, pending_->reg_perturbed,
                                 cfg_.lambda_eff, cfg_.mu, pending_->u);
  apply_step(w_, cfg_.eta, g, "local update");
  pending_.reset();
  ++steps_;
  double norm2 = 0.0;
  for (double v : g) norm2 += v * v;
  return norm2;
}

Refresh Party::answer(const Query& query) const {
  if (query.party != id_) throw ProtocolError("Query addressed to another party");
  return Refresh{id_, query.sample, query.seq, output(w_, query.sample)};
}

Upload Party::warmup_upload(std::uint32_t sample) const {
  Vec c = output(w_, sample);
  return Upload{id_, sample, 0, c, c};
}

Server::Server(GlobalModel model, std::vector<int> labels, Vec w0, ServerConfig cfg)
    : model_(std::move(model)), labels_(std::move(labels)), w0_(std::move(w0)), cfg_(cfg) {
  if (w0_.size() != model_.param_count()) throw ShapeError("server weights do not match the head");
  cache_ = ServerCache(labels_.size(),
                       std::vector<std::size_t>(model_.parties, model_.party_output_dim));
}

void Server::check_ids(std::uint32_t party, std::uint32_t sample) const {
  if (sample >= labels_.size())
    throw ProtocolError("unknown sample id " + std::to_string(sample));
  if (party >= model_.parties) throw ProtocolError("unknown party id " + std::to_string(party));
}

void Server::ingest_warmup(const Upload& up) {
  check_ids(up.party, up.sample);
  cache_.store(up.sample, up.party, up.c, 0);
}

void Server::ingest_upload(const Upload& up, std::uint64_t stamp) {
  check_ids(up.party, up.sample);
  cache_.store(up.sample, up.party, up.c, stamp);
}

void Server::ingest_refresh(const Refresh& r, std::uint64_t stamp) {
  check_ids(r.party, r.sample);
  cache_.store(r.sample, r.party, r.c, stamp);
}

std::uint64_t Server::staleness_of(std::size_t i, std::size_t m, std::uint64_t now) const {
  std::uint64_t worst = 0;
  for (std::size_t j = 0; j < model_.parties; ++j) {
    if (j == m) continue;
    const std::uint64_t s = cache_.stamp(i, j);
    worst = std::max(worst, now > s ? now - s : 0);
  }
  return worst;
}

std::vector<Query> Server::stale_cells(std::uint32_t party, std::uint32_t sample,
                                      std::uint64_t now) {
  check_ids(party, sample);
  std::vector<Query> out;
  for (std::uint32_t j = 0; j < model_.parties; ++j) {
    if (j == party) continue;
    const bool fresh = cache_.populated(sample, j) &&
                       now - std::min(now, cache_.stamp(sample, j)) <= cfg_.tau;
    if (!fresh) out.push_back(Query{j, sample, query_seq_++});
  }
  return out;
}

Vec Server::assemble(std::size_t i, std::size_t m, std::span<const double> c) const {
  Vec out;
  out.reserve(model_.input_dim());
  for (std::size_t j = 0; j < model_.parties; ++j) {
    if (j == m) {
      if (c.size() != model_.party_output_dim) throw ShapeError("upload output has wrong length");
      out.insert(out.end(), c.begin(), c.end());
    } else {
      const auto cj = cache_.latest(i, j);
      out.insert(out.end(), cj.begin(), cj.end());
    }
  }
  return out;
}

void Server::note_staleness(std::uint64_t s) { max_staleness_ = std::max(max_staleness_, s); }

void Server::step_w0(std::span<const double> direction) {
  apply_step(w0_, cfg_.eta, direction, "global update");
}

Reply Server::handle_upload(const Upload& up, std::uint64_t now) {
  check_ids(up.party, up.sample);
  for (std::size_t j = 0; j < model_.parties; ++j)
    if (j != up.party && !cache_.populated(up.sample, j))
      throw ProtocolError("cache cell " + cell_name(up.sample, j) + " used before warm-up");
  const std::uint64_t age = staleness_of(up.sample, up.party, now);
  if (age > cfg_.tau)
    throw ProtocolError("cached output of age " + std::to_string(age) + " exceeds the delay bound");
  note_staleness(age);

  const int y = labels_[up.sample];
  Vec c = assemble(up.sample, up.party, up.c);
  const double h = global_value(model_, w0_, c, y);
  const Vec c_hat = assemble(up.sample, up.party, up.c_hat);
  const double h_bar = global_value(model_, w0_, c_hat, y);

  if (!w0_.empty()) {
    Stream s(cfg_.seed, 0, Purpose::kServerDirection, handled_);
    const Direction u0 = sample_direction(cfg_.scheme, w0_.size(), s);
    Vec shifted(w0_.size());
    for (std::size_t j = 0; j < w0_.size(); ++j) shifted[j] = w0_[j] + cfg_.mu * u0.u[j];
    const double h_hat = global_value(model_, shifted, c, y);
    if (auto g = server_block_zoe(h, h_hat, cfg_.mu, u0)) step_w0(*g);
  }
  cache_.store(up.sample, up.party, up.c, now);
  ++handled_;
  return Reply{up.party, up.sample, up.seq, h, h_bar};
}

void warmup_cache(std::span<Party> parties, Server& server, Transcript& transcript) {
  const std::size_t n = server.cache().samples();
  for (std::uint32_t i = 0; i < n; ++i) {
    for (auto& p : parties) {
      const Upload up = p.warmup_upload(i);
      transcript.append(0.0, Flow::kUp, up);
      server.ingest_warmup(up);
    }
  }
}

Federation::Federation(const ModelSpec& spec, const PartitionedDataset& data,
                       const ModelState& init, const PartyConfig& party_cfg,
                       const ServerConfig& server_cfg, bool keep_transcript)
    : spec_(&spec),
      server_(spec.global, data.labels, Vec(init.w0().begin(), init.w0().end()), server_cfg),
      transcript_(keep_transcript) {
  spec.validate(data);
  parties_.reserve(spec.parties());
  for (std::uint32_t m = 0; m < spec.parties(); ++m) {
    const auto w = init.local(m);
    parties_.emplace_back(m, spec.local[m], data.blocks[m], Vec(w.begin(), w.end()), party_cfg);
  }
}

void Federation::warmup() { warmup_cache(parties_, server_, transcript_); }

double Federation::client_step(std::size_t m, std::optional<std::uint32_t> sample) {
  Party& party = parties_.at(m);
  const double t = static_cast<double>(now_);
  const Upload up = party.begin_step(sample);
  transcript_.append(t, Flow::kUp, up);
  for (const Query& q : server_.stale_cells(up, now_)) {
    transcript_.append(t, Flow::kDown, q);
    const Refresh r = parties_.at(q.party).answer(q);
    transcript_.append(t, Flow::kUp, r);
    server_.ingest_refresh(r, now_);
  }
  const Reply reply = server_.handle_upload(up, now_);
  transcript_.append(t, Flow::kDown, reply);
  const double norm2 = party.finish_step(reply);
  ++now_;
  return norm2;
}

ModelState Federation::snapshot() const {
  ModelState s(*spec_);
  std::copy(server_.w0().begin(), server_.w0().end(), s.mutable_w0().begin());
  for (std::size_t m = 0; m < parties_.size(); ++m) {
    const auto w = parties_[m].weights();
    std::copy(w.begin(), w.end(), s.mutable_local(m).begin());
  }
  return s;
}

}  // namespace revelight
