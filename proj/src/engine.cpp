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

#include "revelight/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <ostream>
#include <queue>
#include <thread>

#include "revelight/errors.hpp"
#include "revelight/kernels.hpp"
#include "revelight/protocol.hpp"
#include "revelight/rng.hpp"

namespace revelight {

namespace {

template <class E>
struct NamedEnum {
  E value;
  std::string_view name;
};

constexpr NamedEnum<Algorithm> kAlgorithms[] = {
    {Algorithm::kAsyRevelGau, "asyrevel_gau"}, {Algorithm::kAsyRevelUni, "asyrevel_uni"},
    {Algorithm::kSynRevel, "synrevel"},        {Algorithm::kNonFed, "nonfed"},
    {Algorithm::kTig, "tig"},
};
constexpr NamedEnum<ClockMode> kClocks[] = {{ClockMode::kVirtual, "virtual"},
                                            {ClockMode::kWall, "wall"}};
constexpr NamedEnum<ComputeDist> kDists[] = {{ComputeDist::kFixed, "fixed"},
                                             {ComputeDist::kExponential, "exponential"}};

template <class E, std::size_t N>
std::string_view name_of(const NamedEnum<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "unknown";
}

template <class E, std::size_t N>
E parse_named(const NamedEnum<E> (&table)[N], std::string_view text, const char* what) {
  for (const auto& e : table)
    if (e.name == text) return e.value;
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

double draw_compute(const RunConfig& cfg, std::size_t m, std::uint64_t k) {
  const double mean = cfg.mean_compute(m);
  if (cfg.compute_dist == ComputeDist::kFixed) return mean;
  Stream s(cfg.seed, static_cast<std::uint16_t>(m + 1), Purpose::kComputeTime, k);
  return s.exponential(mean);
}

std::uint32_t shared_sample(const RunConfig& cfg, std::uint64_t index, std::size_t n) {
  Stream s(cfg.seed, 0, Purpose::kSample, index);
  return static_cast<std::uint32_t>(s.below(n));
}

std::size_t eval_period(const RunConfig& cfg, std::size_t n) {
  return cfg.eval_every > 0 ? cfg.eval_every : std::max<std::size_t>(n, 1);
}

// Evaluation schedule, stop rule and metric rows.
class Recorder {
 public:
  Recorder(const RunConfig& cfg, const RunData& data, const ModelSpec& spec, const Checkpoint& cb)
      : cfg_(cfg), data_(data), spec_(spec), cb_(cb),
        every_(eval_period(cfg, data.train->n)), start_(std::chrono::steady_clock::now()) {}

  bool due(std::size_t t) const { return t % every_ == 0; }
  bool stopped() const { return stopped_; }
  double wall_seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  /// Appends a row; returns true once the stop loss has been reached.
  bool record(std::size_t t, double vtime, const ModelState& state, const Transcript& transcript,
              std::uint64_t staleness, double gnorm2) {
    MetricRow row;
    row.t = t;
    row.vtime = vtime;
    row.wtime = cfg_.clock == ClockMode::kWall ? wall_seconds() : 0.0;
    row.loss = composite_objective(state, *data_.train, cfg_.lambda_eff, spec_);
    row.acc = kernels::accuracy_parallel(state, data_.test ? *data_.test : *data_.train, spec_);
    row.bytes_up = transcript.bytes_up();
    row.bytes_down = transcript.bytes_down();
    row.staleness = staleness;
    row.gnorm2 = gnorm2;
    metrics.rows.push_back(row);
    if (cb_) cb_(t, state);
    if (cfg_.stop_loss && row.loss <= *cfg_.stop_loss) stopped_ = true;
    return stopped_;
  }

  RunMetrics metrics;

 private:
  const RunConfig& cfg_;
  const RunData& data_;
  const ModelSpec& spec_;
  const Checkpoint& cb_;
  std::size_t every_;
  std::chrono::steady_clock::time_point start_;
  bool stopped_ = false;
};

void check_inputs(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                  const ModelState& init) {
  cfg.validate();
  if (!data.train) throw UsageError("no training data");
  if (spec.parties() != cfg.q)
    throw ConfigError("config has q=" + std::to_string(cfg.q) + " but the model has " +
                      std::to_string(spec.parties()) + " parties");
  spec.validate(*data.train);
  if (data.test) spec.validate(*data.test);
  if (init.parties() != spec.parties() || init.total_params() != ModelState(spec).total_params())
    throw ShapeError("initial weights do not match the model");
}

PartyConfig party_config(const RunConfig& cfg) {
  return PartyConfig{cfg.effective_scheme(), cfg.mu, cfg.eta, cfg.lambda_eff, cfg.seed};
}

ServerConfig server_config(const RunConfig& cfg) {
  return ServerConfig{cfg.effective_scheme(), cfg.mu, cfg.server_eta(), cfg.tau, cfg.seed};
}

ModelState assemble_state(const ModelSpec& spec, const Server& server,
                          const std::vector<std::span<const double>>& locals) {
  ModelState s(spec);
  std::copy(server.w0().begin(), server.w0().end(), s.mutable_w0().begin());
  for (std::size_t m = 0; m < locals.size(); ++m)
    std::copy(locals[m].begin(), locals[m].end(), s.mutable_local(m).begin());
  return s;
}

std::vector<Party> make_parties(const RunConfig& cfg, const PartitionedDataset& train,
                                const ModelSpec& spec, const ModelState& init) {
  std::vector<Party> parties;
  parties.reserve(spec.parties());
  for (std::uint32_t m = 0; m < spec.parties(); ++m) {
    const auto w = init.local(m);
    parties.emplace_back(m, spec.local[m], train.blocks[m], Vec(w.begin(), w.end()),
                         party_config(cfg));
  }
  return parties;
}

Server make_server(const RunConfig& cfg, const PartitionedDataset& train, const ModelSpec& spec,
                   const ModelState& init) {
  return Server(spec.global, train.labels, Vec(init.w0().begin(), init.w0().end()),
                server_config(cfg));
}

struct Finished {
  double gnorm2 = 0.0;
  std::optional<Frame> report;
};

// Function-value protocol behind the generic asynchronous drivers.
class ZooAdapter {
 public:
  ZooAdapter(const RunConfig& cfg, const PartitionedDataset& train, const ModelSpec& spec,
             const ModelState& init)
      : spec_(spec), parties_(make_parties(cfg, train, spec, init)),
        server_(make_server(cfg, train, spec, init)) {}

  void warmup(Transcript& t) { warmup_cache(parties_, server_, t); }
  std::uint32_t steps(std::size_t m) const { return parties_[m].steps(); }
  Frame begin(std::size_t m, std::optional<std::uint32_t> s) {
    return to_frame(parties_[m].begin_step(s));
  }
  std::vector<Query> stale(const Frame& up, std::uint64_t now) {
    return server_.stale_cells(up.party, up.sample, now);
  }
  Frame answer(const Frame& query) {
    return to_frame(parties_.at(query.party).answer(std::get<Query>(from_frame(query))));
  }
  void ingest_refresh(const Frame& r, std::uint64_t stamp) {
    server_.ingest_refresh(std::get<Refresh>(from_frame(r)), stamp);
  }
  Frame serve(const Frame& up, std::uint64_t now) {
    return to_frame(server_.handle_upload(std::get<Upload>(from_frame(up)), now));
  }
  Finished finish(std::size_t m, const Frame& reply) {
    return {parties_[m].finish_step(std::get<Reply>(from_frame(reply))), std::nullopt};
  }
  ModelState snapshot() const {
    std::vector<std::span<const double>> locals;
    for (const auto& p : parties_) locals.push_back(p.weights());
    return assemble_state(spec_, server_, locals);
  }
  std::uint64_t max_staleness() const { return server_.max_staleness(); }

 private:
  const ModelSpec& spec_;
  std::vector<Party> parties_;
  Server server_;
};

// Gradient-transmitting baseline: parties upload c, the server returns the
// loss and dF0/dc_m, parties back-propagate locally and report their block
// gradient for convergence monitoring.
class TigAdapter {
 public:
  TigAdapter(const RunConfig& cfg, const PartitionedDataset& train, const ModelSpec& spec,
             const ModelState& init)
      : cfg_(cfg), spec_(spec), train_(train), server_(make_server(cfg, train, spec, init)) {
    for (std::size_t m = 0; m < spec.parties(); ++m) {
      const auto w = init.local(m);
      w_.emplace_back(w.begin(), w.end());
    }
    steps_.assign(spec.parties(), 0);
    pending_.assign(spec.parties(), std::nullopt);
  }

  void warmup(Transcript& t) {
    for (std::uint32_t i = 0; i < train_.n; ++i)
      for (std::uint32_t m = 0; m < spec_.parties(); ++m) {
        Vec c = output(m, i);
        const Upload up{m, i, 0, c, c};
        t.append(0.0, Flow::kUp, up);
        server_.ingest_warmup(up);
      }
  }
  std::uint32_t steps(std::size_t m) const { return steps_[m]; }

  Frame begin(std::size_t m, std::optional<std::uint32_t> s) {
    if (pending_[m]) throw ProtocolError("party " + std::to_string(m) + " already has an upload in flight");
    std::uint32_t i = 0;
    if (s) {
      i = *s;
    } else {
      Stream st(cfg_.seed, static_cast<std::uint16_t>(m + 1), Purpose::kSample, steps_[m]);
      i = static_cast<std::uint32_t>(st.below(train_.n));
    }
    pending_[m] = i;
    Frame f;
    f.tag = Tag::kTigUpload;
    f.party = static_cast<std::uint32_t>(m);
    f.sample = i;
    f.seq = steps_[m];
    f.payload = output(m, i);
    f.veclen = static_cast<std::uint16_t>(f.payload.size());
    return f;
  }
  std::vector<Query> stale(const Frame& up, std::uint64_t now) {
    return server_.stale_cells(up.party, up.sample, now);
  }
  Frame answer(const Frame& query) {
    const Query q = std::get<Query>(from_frame(query));
    return to_frame(Refresh{q.party, q.sample, q.seq, output(q.party, q.sample)});
  }
  void ingest_refresh(const Frame& r, std::uint64_t stamp) {
    server_.ingest_refresh(std::get<Refresh>(from_frame(r)), stamp);
  }

  Frame serve(const Frame& up, std::uint64_t now) {
    server_.check_ids(up.party, up.sample);
    const std::uint64_t age = server_.staleness_of(up.sample, up.party, now);
    if (age > cfg_.tau) throw ProtocolError("cached output exceeds the delay bound");
    server_.note_staleness(age);
    const GlobalModel& g = spec_.global;
    const Vec c = server_.assemble(up.sample, up.party, up.payload);
    const int y = train_.labels[up.sample];
    Vec grad_c(g.input_dim(), 0.0);
    Vec grad_w0(g.param_count(), 0.0);
    const double h = global_value(g, server_.w0(), c, y);
    global_backward(g, server_.w0(), c, y, grad_c, grad_w0);
    if (!grad_w0.empty()) server_.step_w0(grad_w0);
    server_.mutable_cache().store(up.sample, up.party, up.payload, now);
    Frame f;
    f.tag = Tag::kTigGradReply;
    f.party = up.party;
    f.sample = up.sample;
    f.seq = up.seq;
    f.veclen = static_cast<std::uint16_t>(g.party_output_dim);
    f.payload.push_back(h);
    const std::size_t off = up.party * g.party_output_dim;
    f.payload.insert(f.payload.end(), grad_c.begin() + off,
                     grad_c.begin() + off + g.party_output_dim);
    return f;
  }

  Finished finish(std::size_t m, const Frame& reply) {
    if (!pending_[m] || *pending_[m] != reply.sample || reply.seq != steps_[m])
      throw ProtocolError("gradient reply with no pending upload at party " + std::to_string(m));
    const LocalModel& model = spec_.local[m];
    Vec grad(model.param_count(), 0.0);
    const std::span<const double> upstream(reply.payload.data() + 1, reply.payload.size() - 1);
    local_backward(model, w_[m], train_.blocks[m].row(reply.sample), upstream, grad);
    nonconvex_reg_grad(w_[m], cfg_.lambda_eff, grad);
    apply_step(w_[m], cfg_.eta, grad, "local update");
    pending_[m].reset();
    double norm2 = 0.0;
    for (double v : grad) norm2 += v * v;
    Frame report;
    report.tag = Tag::kTigGradReport;
    report.party = static_cast<std::uint32_t>(m);
    report.sample = reply.sample;
    report.seq = steps_[m]++;
    report.veclen = static_cast<std::uint16_t>(grad.size());
    report.payload = std::move(grad);
    return {norm2, std::move(report)};
  }

  ModelState snapshot() const {
    std::vector<std::span<const double>> locals(w_.begin(), w_.end());
    return assemble_state(spec_, server_, locals);
  }
  std::uint64_t max_staleness() const { return server_.max_staleness(); }

 private:
  Vec output(std::size_t m, std::uint32_t i) const {
    return local_forward(spec_.local[m], w_[m], train_.blocks[m].row(i));
  }

  const RunConfig& cfg_;
  const ModelSpec& spec_;
  const PartitionedDataset& train_;
  Server server_;
  std::vector<Vec> w_;
  std::vector<std::uint32_t> steps_;
  std::vector<std::optional<std::uint32_t>> pending_;
};

template <class A>
RunResult simulate_virtual(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                           A& a, const Checkpoint& on_eval) {
  enum class Kind { kCompute, kUpload, kQuery, kRefresh, kReply };
  struct Event {
    double time;
    std::uint64_t seq;
    Kind kind;
    std::uint32_t party;
    Frame frame;
    std::uint64_t stamp;
  };
  auto later = [](const Event& x, const Event& y) {
    return x.time > y.time || (x.time == y.time && x.seq > y.seq);
  };
  std::priority_queue<Event, std::vector<Event>, decltype(later)> queue(later);
  std::uint64_t seq = 0;
  auto push = [&](double time, Kind kind, std::uint32_t party, Frame frame = {},
                  std::uint64_t stamp = 0) {
    queue.push(Event{time, seq++, kind, party, std::move(frame), stamp});
  };

  RunResult res;
  res.transcript = Transcript(cfg.keep_transcript);
  res.activations.assign(cfg.q, 0);
  Transcript& tr = res.transcript;
  Recorder rec(cfg, data, spec, on_eval);
  const std::size_t n = data.train->n;
  const double lat = cfg.latency;

  a.warmup(tr);
  std::vector<std::uint64_t> computes(cfg.q, 0);
  for (std::uint32_t m = 0; m < cfg.q; ++m) push(draw_compute(cfg, m, 0), Kind::kCompute, m);

  std::deque<Frame> inbox;
  std::size_t awaiting = 0;
  std::uint64_t t = 0;
  double now = 0.0;
  double gnorm2 = 0.0;
  bool stop = rec.record(0, 0.0, a.snapshot(), tr, 0, 0.0) || cfg.T == 0;

  // Serves queued uploads until one needs refreshed cache cells.
  auto pump = [&] {
    while (awaiting == 0 && !inbox.empty()) {
      const Frame& up = inbox.front();
      const std::vector<Query> queries = a.stale(up, t);
      if (!queries.empty()) {
        for (const Query& q : queries) {
          Frame f = to_frame(q);
          tr.append(now, Flow::kDown, f);
          push(now + lat, Kind::kQuery, q.party, std::move(f));
        }
        awaiting = queries.size();
        return;
      }
      Frame reply = a.serve(up, t);
      inbox.pop_front();
      tr.append(now, Flow::kDown, reply);
      const std::uint32_t party = reply.party;
      push(now + lat, Kind::kReply, party, std::move(reply));
    }
  };

  while (!stop && !queue.empty()) {
    Event e = queue.top();
    queue.pop();
    now = e.time;
    switch (e.kind) {
      case Kind::kCompute: {
        std::optional<std::uint32_t> s;
        if (cfg.shared_samples) s = shared_sample(cfg, a.steps(e.party), n);
        Frame up = a.begin(e.party, s);
        tr.append(now, Flow::kUp, up);
        push(now + lat, Kind::kUpload, e.party, std::move(up));
        break;
      }
      case Kind::kUpload:
        inbox.push_back(std::move(e.frame));
        pump();
        break;
      case Kind::kQuery: {
        Frame r = a.answer(e.frame);
        tr.append(now, Flow::kUp, r);
        push(now + lat, Kind::kRefresh, e.party, std::move(r), t);
        break;
      }
      case Kind::kRefresh:
        a.ingest_refresh(e.frame, e.stamp);
        if (--awaiting == 0) pump();
        break;
      case Kind::kReply: {
        Finished fin = a.finish(e.party, e.frame);
        if (fin.report) tr.append(now, Flow::kUp, std::move(*fin.report));
        gnorm2 = fin.gnorm2;
        ++t;
        ++res.activations[e.party];
        res.schedule.push_back(e.party);
        if (rec.due(t) && rec.record(t, now, a.snapshot(), tr, a.max_staleness(), gnorm2))
          stop = true;
        if (t >= cfg.T) stop = true;
        if (!stop)
          push(now + draw_compute(cfg, e.party, ++computes[e.party]), Kind::kCompute, e.party);
        break;
      }
    }
  }

  res.metrics = std::move(rec.metrics);
  res.final_state = a.snapshot();
  res.events = t;
  res.vtime = now;
  res.max_staleness = a.max_staleness();
  res.reached_stop = rec.stopped();
  return res;
}

std::size_t worker_count(const RunConfig& cfg) {
  std::size_t w = cfg.threads;
  if (w == 0) {
    if (const char* env = std::getenv("REVELIGHT_THREADS")) {
      char* end = nullptr;
      const unsigned long v = std::strtoul(env, &end, 10);
      if (end == env || *end != '\0' || v == 0)
        throw ConfigError("REVELIGHT_THREADS must be a positive integer");
      w = v;
    } else {
      w = cfg.q;
    }
  }
  return std::clamp<std::size_t>(w, 1, cfg.q);
}

template <class A>
RunResult simulate_wall(const RunConfig& cfg, const RunData& data, const ModelSpec& spec, A& a,
                        const Checkpoint& on_eval) {
  struct Mailbox {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Frame> items;
  };

  RunResult res;
  res.transcript = Transcript(cfg.keep_transcript);
  res.activations.assign(cfg.q, 0);
  Transcript& tr = res.transcript;
  Recorder rec(cfg, data, spec, on_eval);
  const std::size_t n = data.train->n;
  const std::size_t workers = worker_count(cfg);

  a.warmup(tr);
  std::vector<std::mutex> party_mu(cfg.q);
  std::mutex tr_mu;
  std::mutex stats_mu;
  Mailbox server_box;
  std::vector<Mailbox> worker_box(workers);
  std::atomic<bool> done{false};
  double gnorm2 = 0.0;
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto log = [&](Flow flow, Frame f) {
    std::lock_guard lock(tr_mu);
    tr.append(rec.wall_seconds(), flow, std::move(f));
  };
  auto snapshot = [&] {
    std::vector<std::unique_lock<std::mutex>> locks;
    for (auto& mu : party_mu) locks.emplace_back(mu);
    return a.snapshot();
  };
  auto fail = [&](std::exception_ptr e) {
    {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = e;
    }
    done = true;
    server_box.cv.notify_all();
    for (auto& b : worker_box) b.cv.notify_all();
  };

  bool stop = rec.record(0, 0.0, a.snapshot(), tr, 0, 0.0) || cfg.T == 0;

  auto worker = [&](std::size_t w) {
    try {
      std::vector<std::size_t> mine;
      for (std::size_t m = w; m < cfg.q; m += workers) mine.push_back(m);
      std::vector<std::uint64_t> computes(cfg.q, 0);
      std::vector<char> in_flight(cfg.q, 0);
      while (!done) {
        for (std::size_t m : mine) {
          if (in_flight[m] || done) continue;
          std::this_thread::sleep_for(
              std::chrono::duration<double, std::milli>(draw_compute(cfg, m, computes[m]++)));
          Frame up;
          {
            std::lock_guard lock(party_mu[m]);
            std::optional<std::uint32_t> s;
            if (cfg.shared_samples) s = shared_sample(cfg, a.steps(m), n);
            up = a.begin(m, s);
          }
          log(Flow::kUp, up);
          in_flight[m] = 1;
          {
            std::lock_guard lock(server_box.mu);
            server_box.items.push_back(std::move(up));
          }
          server_box.cv.notify_one();
        }
        Frame reply;
        {
          std::unique_lock lock(worker_box[w].mu);
          worker_box[w].cv.wait(lock, [&] { return done || !worker_box[w].items.empty(); });
          if (worker_box[w].items.empty()) break;
          reply = std::move(worker_box[w].items.front());
          worker_box[w].items.pop_front();
        }
        Finished fin;
        {
          std::lock_guard lock(party_mu[reply.party]);
          fin = a.finish(reply.party, reply);
        }
        if (fin.report) log(Flow::kUp, std::move(*fin.report));
        {
          std::lock_guard lock(stats_mu);
          gnorm2 = fin.gnorm2;
          ++res.activations[reply.party];
          res.schedule.push_back(reply.party);
        }
        in_flight[reply.party] = 0;
      }
    } catch (...) {
      fail(std::current_exception());
    }
  };

  std::vector<std::thread> pool;
  if (!stop)
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker, w);

  std::uint64_t issued = 0;
  try {
    while (!stop && !done && issued < cfg.T) {
      Frame up;
      {
        std::unique_lock lock(server_box.mu);
        server_box.cv.wait(lock, [&] { return done || !server_box.items.empty(); });
        if (done) break;
        up = std::move(server_box.items.front());
        server_box.items.pop_front();
      }
      for (const Query& q : a.stale(up, issued)) {
        Frame qf = to_frame(q);
        log(Flow::kDown, qf);
        Frame r;
        {
          std::lock_guard lock(party_mu[q.party]);
          r = a.answer(qf);
        }
        log(Flow::kUp, r);
        a.ingest_refresh(r, issued);
      }
      Frame reply = a.serve(up, issued);
      log(Flow::kDown, reply);
      ++issued;
      auto& box = worker_box[reply.party % workers];
      {
        std::lock_guard lock(box.mu);
        box.items.push_back(std::move(reply));
      }
      box.cv.notify_one();
      if (issued < cfg.T && rec.due(issued)) {
        const ModelState s = snapshot();
        double g = 0.0;
        {
          std::lock_guard lock(stats_mu);
          g = gnorm2;
        }
        std::lock_guard lock(tr_mu);
        if (rec.record(issued, rec.wall_seconds(), s, tr, a.max_staleness(), g)) stop = true;
      }
    }
  } catch (...) {
    fail(std::current_exception());
  }
  // Let every issued reply be applied before shutting down.
  if (!failure) {
    while (true) {
      std::lock_guard lock(stats_mu);
      if (res.schedule.size() >= issued) break;
      std::this_thread::yield();
    }
  }
  done = true;
  server_box.cv.notify_all();
  for (auto& b : worker_box) b.cv.notify_all();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  const double elapsed = rec.wall_seconds();
  if (!rec.stopped() && issued > 0 && rec.due(issued))
    rec.record(issued, elapsed, a.snapshot(), tr, a.max_staleness(), gnorm2);
  res.metrics = std::move(rec.metrics);
  res.final_state = a.snapshot();
  res.events = issued;
  res.vtime = elapsed;
  res.max_staleness = a.max_staleness();
  res.reached_stop = rec.stopped();
  return res;
}

template <class A>
RunResult simulate(const RunConfig& cfg, const RunData& data, const ModelSpec& spec, A& a,
                   const Checkpoint& on_eval) {
  return cfg.clock == ClockMode::kWall ? simulate_wall(cfg, data, spec, a, on_eval)
                                       : simulate_virtual(cfg, data, spec, a, on_eval);
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Algorithm a) { return name_of(kAlgorithms, a); }
Algorithm parse_algorithm(std::string_view text) { return parse_named(kAlgorithms, text, "algorithm"); }
std::string_view to_string(ClockMode c) { return name_of(kClocks, c); }
ClockMode parse_clock(std::string_view text) { return parse_named(kClocks, text, "clock"); }
std::string_view to_string(ComputeDist c) { return name_of(kDists, c); }
ComputeDist parse_compute_dist(std::string_view text) {
  return parse_named(kDists, text, "compute distribution");
}

void RunConfig::validate() const {
  if (q == 0) throw ConfigError("q must be at least 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
  if (eta_server < 0.0 || !std::isfinite(eta_server)) throw ConfigError("eta_server must be >= 0");
  if (algorithm != Algorithm::kTig && (!(mu > 0.0) || !std::isfinite(mu)))
    throw ConfigError("mu must be positive");
  if (lambda_eff < 0.0 || !std::isfinite(lambda_eff)) throw ConfigError("lambda_eff must be >= 0");
  if (!p.empty()) {
    if (p.size() != q) throw ConfigError("p must list one probability per party");
    double sum = 0.0;
    for (double v : p) {
      if (!(v > 0.0)) throw ConfigError("activation probabilities must be positive");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("activation probabilities must sum to 1");
  }
  if (straggler.party && *straggler.party >= q) throw ConfigError("straggler party out of range");
  if (!(straggler.slowdown >= 1.0) || !std::isfinite(straggler.slowdown))
    throw ConfigError("straggler slowdown must be >= 1");
  if (!(compute_time > 0.0) || !std::isfinite(compute_time))
    throw ConfigError("compute_time must be positive");
  if (latency < 0.0 || !std::isfinite(latency)) throw ConfigError("latency must be >= 0");
  if (stop_loss && !std::isfinite(*stop_loss)) throw ConfigError("stop loss must be finite");
}

Scheme RunConfig::effective_scheme() const {
  switch (algorithm) {
    case Algorithm::kAsyRevelGau: return Scheme::kGaussian;
    case Algorithm::kAsyRevelUni: return Scheme::kSphere;
    default: return scheme;
  }
}

double RunConfig::server_eta() const {
  return eta_server > 0.0 ? eta_server : eta / static_cast<double>(q);
}

double RunConfig::activation_prob(std::size_t m) const {
  return p.empty() ? 1.0 / static_cast<double>(q) : p.at(m);
}

double RunConfig::mean_compute(std::size_t m) const {
  const double slow = straggler.party && *straggler.party == m ? straggler.slowdown : 1.0;
  return compute_time * slow / (static_cast<double>(q) * activation_prob(m));
}

void RunMetrics::write_csv(std::ostream& out) const {
  out << "t,vtime,wtime,loss,acc,bytes_up,bytes_down,staleness,gnorm2\n";
  for (const auto& r : rows)
    out << r.t << ',' << fmt12(r.vtime) << ',' << fmt12(r.wtime) << ',' << fmt12(r.loss) << ','
        << fmt12(r.acc) << ',' << r.bytes_up << ',' << r.bytes_down << ',' << r.staleness << ','
        << fmt12(r.gnorm2) << '\n';
}

RunResult run_asyrevel(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                       const ModelState& init, const Checkpoint& on_eval) {
  if (cfg.algorithm != Algorithm::kAsyRevelGau && cfg.algorithm != Algorithm::kAsyRevelUni)
    throw ConfigError("run_asyrevel needs asyrevel_gau or asyrevel_uni");
  check_inputs(cfg, data, spec, init);
  ZooAdapter a(cfg, *data.train, spec, init);
  return simulate(cfg, data, spec, a, on_eval);
}

RunResult run_tig_baseline(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                           const ModelState& init, const Checkpoint& on_eval) {
  if (spec.any_black_box())
    throw UnsupportedError("gradient baseline needs differentiable local models; a party model is a black box");
  check_inputs(cfg, data, spec, init);
  TigAdapter a(cfg, *data.train, spec, init);
  return simulate(cfg, data, spec, a, on_eval);
}

RunResult run_synrevel(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                       const ModelState& init, const Checkpoint& on_eval) {
  check_inputs(cfg, data, spec, init);
  const PartitionedDataset& train = *data.train;
  std::vector<Party> parties = make_parties(cfg, train, spec, init);
  Server server = make_server(cfg, train, spec, init);
  auto snapshot = [&] {
    std::vector<std::span<const double>> locals;
    for (const auto& p : parties) locals.push_back(p.weights());
    return assemble_state(spec, server, locals);
  };

  RunResult res;
  res.transcript = Transcript(cfg.keep_transcript);
  res.activations.assign(cfg.q, 0);
  Transcript& tr = res.transcript;
  Recorder rec(cfg, data, spec, on_eval);
  const auto start = std::chrono::steady_clock::now();
  warmup_cache(parties, server, tr);

  double now = 0.0;
  double gnorm2 = 0.0;
  bool stop = rec.record(0, 0.0, snapshot(), tr, 0, 0.0);
  std::uint64_t r = 0;
  for (; !stop && r < cfg.T; ++r) {
    const std::uint32_t i = shared_sample(cfg, r, train.n);
    std::vector<Upload> ups;
    std::vector<double> sent(cfg.q);
    double arrive = now;
    for (std::size_t m = 0; m < cfg.q; ++m) {
      ups.push_back(parties[m].begin_step(i));
      sent[m] = now + draw_compute(cfg, m, r);
      arrive = std::max(arrive, sent[m] + cfg.latency);
      tr.append(sent[m], Flow::kUp, ups.back());
    }
    // Barrier: the server waits for every upload of the round.
    for (const auto& up : ups) server.ingest_upload(up, r);
    std::vector<Reply> replies;
    for (const auto& up : ups) {
      replies.push_back(server.handle_upload(up, r));
      tr.append(arrive, Flow::kDown, replies.back());
    }
    now = arrive + cfg.latency;
    for (std::size_t m = 0; m < cfg.q; ++m) {
      gnorm2 = parties[m].finish_step(replies[m]);
      ++res.activations[m];
      res.schedule.push_back(static_cast<std::uint32_t>(m));
    }
    if (rec.due(r + 1) && rec.record(r + 1, now, snapshot(), tr, 0, gnorm2)) stop = true;
  }
  if (cfg.clock == ClockMode::kWall)
    now = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.metrics = std::move(rec.metrics);
  res.final_state = snapshot();
  res.events = r;
  res.vtime = now;
  res.max_staleness = server.max_staleness();
  res.reached_stop = rec.stopped();
  return res;
}

std::vector<std::uint32_t> activation_order(const RunConfig& cfg, std::size_t events) {
  using Item = std::tuple<double, std::uint64_t, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::vector<std::uint64_t> computes(cfg.q, 0);
  for (std::uint32_t m = 0; m < cfg.q; ++m) queue.emplace(draw_compute(cfg, m, 0), seq++, m);
  std::vector<std::uint32_t> order;
  order.reserve(events);
  while (order.size() < events) {
    const auto [time, s, m] = queue.top();
    queue.pop();
    order.push_back(m);
    queue.emplace(time + draw_compute(cfg, m, ++computes[m]), seq++, m);
  }
  return order;
}

RunResult run_nonfederated(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
                           const ModelState& init, const Checkpoint& on_eval) {
  check_inputs(cfg, data, spec, init);
  const PartitionedDataset& train = *data.train;
  // One node holds every block; the party and server objects are only used
  // as the block-update arithmetic, and nothing is logged.
  std::vector<Party> blocks = make_parties(cfg, train, spec, init);
  ServerConfig sc = server_config(cfg);
  sc.tau = 0;
  Server head(spec.global, train.labels, Vec(init.w0().begin(), init.w0().end()), sc);
  auto snapshot = [&] {
    std::vector<std::span<const double>> locals;
    for (const auto& p : blocks) locals.push_back(p.weights());
    return assemble_state(spec, head, locals);
  };

  RunResult res;
  res.transcript = Transcript(false);
  res.activations.assign(cfg.q, 0);
  Recorder rec(cfg, data, spec, on_eval);

  using Item = std::tuple<double, std::uint64_t, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::vector<std::uint64_t> computes(cfg.q, 0);
  for (std::uint32_t m = 0; m < cfg.q; ++m) queue.emplace(draw_compute(cfg, m, 0), seq++, m);

  double now = 0.0;
  double gnorm2 = 0.0;
  bool stop = rec.record(0, 0.0, snapshot(), res.transcript, 0, 0.0);
  std::uint64_t t = 0;
  while (!stop && t < cfg.T) {
    const auto [time, s, m] = queue.top();
    queue.pop();
    now = time;
    Party& p = blocks[m];
    std::optional<std::uint32_t> sample;
    if (cfg.shared_samples) sample = shared_sample(cfg, p.steps(), train.n);
    const Upload up = p.begin_step(sample);
    for (std::uint32_t j = 0; j < cfg.q; ++j)
      if (j != m) head.ingest_refresh(blocks[j].answer(Query{j, up.sample, 0}), t);
    gnorm2 = p.finish_step(head.handle_upload(up, t));
    ++t;
    ++res.activations[m];
    res.schedule.push_back(m);
    if (rec.due(t) && rec.record(t, now, snapshot(), res.transcript, 0, gnorm2)) stop = true;
    queue.emplace(time + draw_compute(cfg, m, ++computes[m]), seq++, m);
  }
  res.metrics = std::move(rec.metrics);
  res.final_state = snapshot();
  res.events = t;
  res.vtime = now;
  res.reached_stop = rec.stopped();
  return res;
}

RunResult run(const RunConfig& cfg, const RunData& data, const ModelSpec& spec,
              const ModelState& init, const Checkpoint& on_eval) {
  switch (cfg.algorithm) {
    case Algorithm::kAsyRevelGau:
    case Algorithm::kAsyRevelUni: return run_asyrevel(cfg, data, spec, init, on_eval);
    case Algorithm::kSynRevel: return run_synrevel(cfg, data, spec, init, on_eval);
    case Algorithm::kNonFed: return run_nonfederated(cfg, data, spec, init, on_eval);
    case Algorithm::kTig: return run_tig_baseline(cfg, data, spec, init, on_eval);
  }
  throw ConfigError("unknown algorithm");
}

CommRatio measure_comm(const RunResult& asy, const RunResult& tig, const LinkModel& link) {
  if (asy.schedule != tig.schedule)
    throw UsageError("runs are not paired: activation schedules differ");
  if (!asy.transcript.keeps_entries() || !tig.transcript.keeps_entries())
    throw UsageError("both runs must keep their transcripts");
  if (!(link.bytes_per_us > 0.0) || link.latency_us < 0.0)
    throw UsageError("link model needs positive bandwidth and non-negative latency");
  auto cost = [&](const Transcript& t) {
    double us = 0.0;
    for (const auto& e : t.entries())
      us += link.latency_us + static_cast<double>(e.bytes) / link.bytes_per_us;
    return us;
  };
  CommRatio r;
  r.asy_bytes = asy.transcript.total_bytes();
  r.tig_bytes = tig.transcript.total_bytes();
  r.byte_ratio = static_cast<double>(r.tig_bytes) / static_cast<double>(r.asy_bytes);
  r.asy_time_us = cost(asy.transcript);
  r.tig_time_us = cost(tig.transcript);
  r.time_ratio = r.tig_time_us / r.asy_time_us;
  return r;
}

}  // namespace revelight
