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

// Command-line front end: train, verify, bench-comm, speedup, audit.
//
// Every invocation ends with one line starting PASS, FAIL or ERROR; the exit
// status is 0 only for PASS.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "revelight/errors.hpp"
#include "revelight/experiment.hpp"
#include "revelight/verify.hpp"
#include "revelight/wire.hpp"

namespace fs = std::filesystem;
using namespace revelight;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "flat key = value config file");
  cmd->add_option("--seed", c.seed, "overrides the config seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--format", c.format, "dataset format")
      ->check(CLI::IsMember({"libsvm", "csv", "idx"}));
}

ConfigMap load_config(const Common& c) {
  ConfigMap cfg;
  if (!c.config.empty()) cfg = ConfigMap::load(c.config);
  if (c.seed) cfg.set("seed", std::to_string(*c.seed));
  if (!c.out.empty()) cfg.set("out", c.out);
  if (!c.format.empty()) cfg.set("format", c.format);
  return cfg;
}

int pass(const std::string& cmd, const std::string& msg) {
  std::cout << "PASS " << cmd << ": " << msg << '\n';
  return 0;
}

int fail(const std::string& cmd, const std::string& msg) {
  std::cout << "FAIL " << cmd << ": " << msg << '\n';
  return 1;
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cmd_train(const Common& c) {
  const ExperimentSpec spec = ExperimentSpec::from_config(load_config(c));
  const ExperimentOutput out = run_experiment(spec);
  std::cout << out.summary << '\n';
  if (out.target_loss && !out.result.reached_stop)
    return fail("train", "stop loss " + g(*out.target_loss) + " not reached in " +
                             std::to_string(out.result.events) + " events");
  return pass("train", "metrics in " + out.metrics_path);
}

int cmd_verify(const Common& c) {
  const ConfigMap cfg = load_config(c);
  const std::uint64_t seed = cfg.get_uint("seed", 0);
  const std::string out_dir = cfg.get_or("out", ".");
  SmoothingCheck sc;
  sc.trials = cfg.get_uint("verify_trials", 50);
  sc.draws = cfg.get_uint("verify_draws", 20000);
  sc.seed = seed;
  UnbiasednessCheck uc;
  uc.instances = cfg.get_uint("verify_instances", 50);
  uc.draws = cfg.get_uint("verify_mc", 100000);
  uc.seed = seed;

  std::vector<BoundReport> bounds, cells;
  for (Scheme s : {Scheme::kGaussian, Scheme::kSphere}) {
    auto b = check_smoothing_bounds(s, sc);
    bounds.insert(bounds.end(), b.begin(), b.end());
    auto u = check_unbiasedness(s, uc);
    cells.insert(cells.end(), u.begin(), u.end());
  }
  std::vector<BoundReport> all(bounds);
  all.insert(all.end(), cells.begin(), cells.end());
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "verify_report.csv");
    write_report_csv(f, all);
  }
  {
    std::ofstream f(fs::path(out_dir) / "verify_report.txt");
    write_report_text(f, all);
  }
  const double fb = pass_fraction(bounds);
  const double fu = pass_fraction(cells);
  std::cout << "smoothing bounds passed: " << g(100.0 * fb) << "% of " << bounds.size() << '\n'
            << "unbiasedness cells passed: " << g(100.0 * fu) << "% of " << cells.size() << '\n';
  if (fb < 1.0) return fail("verify", "smoothing bound violated in " + g(100.0 * (1.0 - fb)) + "% of trials");
  if (fu < 0.98) return fail("verify", "unbiasedness held in only " + g(100.0 * fu) + "% of cells");
  return pass("verify", "report in " + (fs::path(out_dir) / "verify_report.csv").string());
}

int cmd_bench_comm(const Common& c) {
  const ConfigMap cfg = load_config(c);
  std::vector<std::size_t> blocks = cfg.get_sizes("blocks");
  if (blocks.empty()) blocks = {16, 64, 256, 1024};
  const ExperimentSpec spec = ExperimentSpec::from_config(cfg);
  const auto rows = bench_comm(spec, blocks);
  fs::create_directories(spec.out_dir);
  std::ofstream f(fs::path(spec.out_dir) / "comm.csv");
  f << "block_dim,asy_bytes,tig_bytes,byte_ratio,asy_time_us,tig_time_us,time_ratio\n";
  for (const auto& r : rows) {
    const std::string line = std::to_string(r.block_dim) + ',' + std::to_string(r.ratio.asy_bytes) +
                             ',' + std::to_string(r.ratio.tig_bytes) + ',' + g(r.ratio.byte_ratio) +
                             ',' + g(r.ratio.asy_time_us) + ',' + g(r.ratio.tig_time_us) + ',' +
                             g(r.ratio.time_ratio);
    f << line << '\n';
    std::cout << line << '\n';
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].ratio.asy_bytes != rows.front().ratio.asy_bytes)
      return fail("bench-comm", "function-value bytes changed with block size " +
                                    std::to_string(rows[k].block_dim));
    if (!(rows[k].ratio.byte_ratio > 1.0))
      return fail("bench-comm", "byte ratio not above 1 at block size " + std::to_string(rows[k].block_dim));
    if (k > 0 && rows[k].ratio.byte_ratio < rows[k - 1].ratio.byte_ratio)
      return fail("bench-comm", "byte ratio decreased at block size " + std::to_string(rows[k].block_dim));
  }
  return pass("bench-comm", "ratios in " + (fs::path(spec.out_dir) / "comm.csv").string());
}

int cmd_speedup(const Common& c) {
  const ConfigMap cfg = load_config(c);
  std::vector<std::size_t> qs = cfg.get_sizes("qs");
  if (qs.empty()) qs = {1, 2, 4, 8};
  const ExperimentSpec spec = ExperimentSpec::from_config(cfg);
  const auto rows = speedup_sweep(spec, qs);
  fs::create_directories(spec.out_dir);
  std::ofstream f(fs::path(spec.out_dir) / "speedup.csv");
  f << "q,time,reached,speedup\n";
  for (const auto& r : rows) {
    const std::string line = std::to_string(r.q) + ',' + g(r.time) + ',' + (r.reached ? "1" : "0") +
                             ',' + g(r.speedup);
    f << line << '\n';
    std::cout << line << '\n';
  }
  for (const auto& r : rows)
    if (!r.reached) return fail("speedup", "q=" + std::to_string(r.q) + " did not reach the stop loss");
  return pass("speedup", "table in " + (fs::path(spec.out_dir) / "speedup.csv").string());
}

int cmd_audit(const Common& c, std::string transcript, std::size_t max_out,
              const std::vector<std::size_t>& block_dims) {
  AuditDims dims{max_out, block_dims};
  if (!c.config.empty()) {
    const ConfigMap cfg = load_config(c);
    if (transcript.empty()) transcript = cfg.get_or("transcript", "");
    const ExperimentSpec spec = ExperimentSpec::from_config(cfg);
    const ExperimentData data = prepare_experiment(spec);
    dims.max_output_dim = data.model.global.party_output_dim;
    dims.block_dims = data.model.local_param_counts();
    if (data.model.global.param_count() > 0) dims.block_dims.push_back(data.model.global.param_count());
  }
  if (transcript.empty()) throw UsageError("audit needs --transcript");
  std::ifstream in(transcript);
  if (!in) throw UsageError("cannot open " + transcript);
  const Transcript t = Transcript::read_jsonl(in);
  const AuditResult r = audit_transcript(t, dims);
  if (!r.pass) return fail("audit", r.reason);
  return pass("audit", std::to_string(t.size()) + " entries carry function values only");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box vertical federated learning with zeroth-order updates"};
  app.require_subcommand(1);
  Common common;
  std::string transcript;
  std::size_t max_out = 1;
  std::vector<std::size_t> block_dims;

  auto* train = app.add_subcommand("train", "run one training job");
  auto* verify = app.add_subcommand("verify", "check estimator and smoothing properties");
  auto* bench = app.add_subcommand("bench-comm", "compare bytes on the wire against the gradient baseline");
  auto* speedup = app.add_subcommand("speedup", "time-to-target speedup over party counts");
  auto* audit = app.add_subcommand("audit", "check that a transcript carries function values only");
  for (auto* cmd : {train, verify, bench, speedup, audit}) add_common(cmd, common);
  audit->add_option("--transcript", transcript, "transcript.jsonl to audit");
  audit->add_option("--max-output-dim", max_out, "widest local model output");
  audit->add_option("--block-dims", block_dims, "parameter block sizes")->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(common);
    if (*verify) return cmd_verify(common);
    if (*bench) return cmd_bench_comm(common);
    if (*speedup) return cmd_speedup(common);
    if (*audit) return cmd_audit(common, transcript, max_out, block_dims);
  } catch (const Error& e) {
    std::cout << "ERROR " << e.kind() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cout << "ERROR internal: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
