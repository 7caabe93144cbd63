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

#include "revelight/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

#include "revelight/errors.hpp"
#include "revelight/kernels.hpp"
#include "revelight/verify.hpp"

namespace revelight {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + text + "'");
  return v;
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

ConfigMap ConfigMap::parse(std::istream& in) {
  ConfigMap cfg;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
    if (cfg.values_.count(key))
      throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' repeated");
    cfg.values_[key] = value;
  }
  return cfg;
}

ConfigMap ConfigMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  return parse(in);
}

std::optional<std::string> ConfigMap::get(const std::string& key) const {
  read_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string ConfigMap::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse_double(key, *v) : fallback;
}

std::uint64_t ConfigMap::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto v = get(key);
  return v ? parse_uint(key, *v) : fallback;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + *v + "'");
}

std::vector<double> ConfigMap::get_doubles(const std::string& key) const {
  std::vector<double> out;
  if (const auto v = get(key))
    for (const auto& item : split_list(*v)) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::size_t> ConfigMap::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  if (const auto v = get(key))
    for (const auto& item : split_list(*v)) out.push_back(parse_uint(key, item));
  return out;
}

std::vector<std::string> ConfigMap::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : values_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

ExperimentSpec ExperimentSpec::from_config(const ConfigMap& cfg) {
  ExperimentSpec s;
  RunConfig& r = s.run;
  r.algorithm = parse_algorithm(cfg.get_or("algorithm", "asyrevel_gau"));
  r.q = cfg.get_uint("q", 4);
  r.T = cfg.get_uint("T", 20000);
  r.eta = cfg.get_double("eta", 1e-3);
  r.eta_server = cfg.get_double("eta_server", 0.0);
  r.mu = cfg.get_double("mu", 1e-3);
  r.lambda_eff = cfg.get_double("lambda_eff", 5e-5);
  r.tau = cfg.get_uint("tau", 4);
  r.p = cfg.get_doubles("p");
  r.seed = cfg.get_uint("seed", 0);
  if (const auto st = cfg.get("straggler")) {
    // "factor" slows the last party; "party:factor" names it.
    const auto colon = st->find(':');
    if (colon == std::string::npos) {
      r.straggler.slowdown = parse_double("straggler", *st);
      if (r.q >= 2) r.straggler.party = r.q - 1;
    } else {
      r.straggler.party = parse_uint("straggler", trim(st->substr(0, colon)));
      r.straggler.slowdown = parse_double("straggler", trim(st->substr(colon + 1)));
    }
  }
  r.clock = parse_clock(cfg.get_or("clock", "virtual"));
  r.scheme = parse_scheme(cfg.get_or("scheme", "gaussian"));
  r.compute_time = cfg.get_double("compute_time", 1.0);
  r.compute_dist = parse_compute_dist(cfg.get_or("compute_dist", "exponential"));
  r.latency = cfg.get_double("latency", 0.0);
  r.shared_samples = cfg.get_bool("shared_samples", false);
  r.eval_every = cfg.get_uint("eval_every", 0);
  if (cfg.has("stop_loss")) r.stop_loss = cfg.get_double("stop_loss", 0.0);
  r.threads = cfg.get_uint("threads", 0);
  r.keep_transcript = cfg.get_bool("keep_transcript", true);

  s.dataset = cfg.get_or("dataset", "");
  s.format = parse_format(cfg.get_or("format", "libsvm"));
  s.labels_path = cfg.get_or("labels", "");
  if (cfg.has("features")) s.features = cfg.get_uint("features", 0);
  s.synthetic.family = parse_family(cfg.get_or("synthetic", "logistic"));
  s.synthetic.n = cfg.get_uint("n", 512);
  s.synthetic.dim = s.features.value_or(32);
  s.synthetic.classes = cfg.get_uint("classes", 2);
  s.synthetic.scale = cfg.get_double("data_scale", 4.0);
  s.synthetic.seed = cfg.get_uint("data_seed", 0);
  s.holdout = cfg.get_bool("holdout", true);

  s.model = cfg.get_or("model", "glm");
  if (s.model != "glm" && s.model != "mlp") throw ConfigError("model must be glm or mlp");
  s.hidden = cfg.get_sizes("hidden");
  s.output_dim = cfg.get_uint("output_dim", s.model == "mlp" ? 2 : 1);
  s.black_box = cfg.get_bool("black_box", false);
  s.init_scale = cfg.get_double("init_scale", 1.0);
  if (cfg.has("stop_gap")) s.stop_gap = cfg.get_double("stop_gap", 0.0);
  s.out_dir = cfg.get_or("out", ".");

  // Keys read by other subcommands.
  for (const char* k : {"blocks", "qs", "verify_trials", "verify_draws", "verify_instances",
                        "verify_mc", "transcript"})
    cfg.get(k);
  if (const auto extra = cfg.unused(); !extra.empty())
    throw ConfigError("unknown config key '" + extra.front() + "'");
  r.validate();
  return s;
}

ExperimentData prepare_experiment(const ExperimentSpec& spec) {
  Dataset all = spec.dataset.empty()
                    ? make_synthetic(spec.synthetic)
                    : load_dataset(spec.dataset, spec.format, spec.features, spec.labels_path);
  std::size_t classes = 2;
  if (spec.model == "glm") {
    relabel_binary(all);
  } else {
    classes = relabel_classes(all);
    if (classes < 2) throw ConfigError("classification needs at least two classes");
  }
  Dataset train_raw, test_raw;
  if (spec.holdout) {
    std::tie(train_raw, test_raw) = split_holdout(all, spec.synthetic.seed);
  } else {
    train_raw = all;
    test_raw = all;
  }
  const std::size_t q = spec.run.q;
  if (q == 0) throw ConfigError("q must be at least 1");
  const auto dims = partition_features(all.dim, q);

  ExperimentData out;
  out.train = partition(train_raw, dims);
  out.test = partition(test_raw, dims);
  if (spec.model == "glm") {
    out.model = make_glm_spec(dims);
  } else {
    for (std::size_t d : dims) out.model.local.push_back(LocalModel::mlp(d, spec.hidden, spec.output_dim));
    out.model.global = GlobalModel::softmax_fcn(q, spec.output_dim, classes);
  }
  for (auto& m : out.model.local) m.black_box = spec.black_box;
  out.init = ModelState::initial(out.model, spec.synthetic.seed, spec.init_scale);
  return out;
}

double reference_optimum(const ModelSpec& spec, const PartitionedDataset& data, double lambda_eff,
                         const ModelState& start, std::size_t max_iters) {
  ModelState s = start;
  double f = kernels::objective_parallel(s, data, lambda_eff, spec);
  double step = 1.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const Vec g = kernels::gradient_parallel(s, data, lambda_eff, spec);
    double g2 = 0.0;
    for (double v : g) g2 += v * v;
    if (g2 <= 1e-12) break;
    // Armijo backtracking on the flattened parameters.
    step *= 2.0;
    while (true) {
      ModelState trial = s;
      std::size_t off = 0;
      auto take = [&](std::span<double> block) {
        for (double& v : block) v -= step * g[off++];
      };
      take(trial.mutable_w0());
      for (std::size_t m = 0; m < trial.parties(); ++m) take(trial.mutable_local(m));
      const double ft = kernels::objective_parallel(trial, data, lambda_eff, spec);
      if (ft <= f - 0.5 * step * g2) {
        s = std::move(trial);
        f = ft;
        break;
      }
      step *= 0.5;
      if (step < 1e-14) return f;
    }
  }
  return f;
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
  ExperimentData data = prepare_experiment(spec);
  RunConfig cfg = spec.run;
  ExperimentOutput out;
  if (spec.stop_gap) {
    const double fstar = reference_optimum(data.model, data.train, cfg.lambda_eff, data.init);
    cfg.stop_loss = fstar + *spec.stop_gap;
  }
  out.target_loss = cfg.stop_loss;
  cfg.keep_transcript = cfg.keep_transcript && cfg.algorithm != Algorithm::kNonFed;
  out.result = run(cfg, RunData{&data.train, &data.test}, data.model, data.init);

  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  out.metrics_path = (fs::path(spec.out_dir) / "metrics.csv").string();
  {
    std::ofstream f(out.metrics_path);
    if (!f) throw UsageError("cannot write " + out.metrics_path);
    out.result.metrics.write_csv(f);
  }
  if (cfg.algorithm != Algorithm::kNonFed && cfg.keep_transcript) {
    out.transcript_path = (fs::path(spec.out_dir) / "transcript.jsonl").string();
    std::ofstream f(out.transcript_path);
    if (!f) throw UsageError("cannot write " + out.transcript_path);
    out.result.transcript.write_jsonl(f);
  }
  const ModelState& fin = out.result.final_state;
  const double loss = composite_objective(fin, data.train, cfg.lambda_eff, data.model);
  const double acc = kernels::accuracy_parallel(fin, data.test, data.model);
  out.summary = std::string(to_string(cfg.algorithm)) + ',' + std::to_string(cfg.seed) + ',' +
                fmt12(loss) + ',' + fmt12(acc) + ',' +
                std::to_string(out.result.transcript.total_bytes()) + ',' +
                fmt12(out.result.vtime);
  {
    std::ofstream f(fs::path(spec.out_dir) / "summary.csv");
    f << "algorithm,seed,final_loss,final_acc,total_bytes,vtime\n" << out.summary << '\n';
  }
  return out;
}

std::vector<CommRow> bench_comm(const ExperimentSpec& base, const std::vector<std::size_t>& blocks) {
  std::vector<CommRow> out;
  for (std::size_t d : blocks) {
    ExperimentSpec spec = base;
    spec.dataset.clear();
    spec.model = "glm";
    spec.black_box = false;
    spec.synthetic.dim = d * spec.run.q;
    spec.run.keep_transcript = true;
    spec.run.stop_loss.reset();
    ExperimentData data = prepare_experiment(spec);
    const RunData rd{&data.train, &data.test};
    RunConfig asy = spec.run;
    asy.algorithm = Algorithm::kAsyRevelGau;
    RunConfig tig = spec.run;
    tig.algorithm = Algorithm::kTig;
    const RunResult a = run(asy, rd, data.model, data.init);
    const RunResult g = run(tig, rd, data.model, data.init);
    out.push_back(CommRow{d, measure_comm(a, g)});
  }
  return out;
}

std::vector<SpeedupRow> speedup_sweep(const ExperimentSpec& base, const std::vector<std::size_t>& qs) {
  if (!base.run.stop_loss && !base.stop_gap)
    throw UsageError("speedup needs stop_loss or stop_gap");
  std::vector<SpeedupRow> out;
  std::map<std::size_t, double> times;
  for (std::size_t q : qs) {
    ExperimentSpec spec = base;
    spec.run.q = q;
    if (spec.run.straggler.party) spec.run.straggler.party = q >= 2 ? std::optional<std::size_t>(q - 1) : std::nullopt;
    spec.run.p.clear();
    spec.run.keep_transcript = false;
    ExperimentData data = prepare_experiment(spec);
    RunConfig cfg = spec.run;
    if (spec.stop_gap)
      cfg.stop_loss = reference_optimum(data.model, data.train, cfg.lambda_eff, data.init) + *spec.stop_gap;
    const RunResult r = run(cfg, RunData{&data.train, &data.test}, data.model, data.init);
    SpeedupRow row{q, r.metrics.rows.empty() ? r.vtime : r.metrics.rows.back().vtime, r.reached_stop, 0.0};
    if (row.reached) times[q] = row.time;
    out.push_back(row);
  }
  if (times.count(1)) {
    const auto sp = compute_speedup(times);
    for (auto& row : out)
      if (sp.count(row.q)) row.speedup = sp.at(row.q);
  }
  return out;
}

}  // namespace revelight
