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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "revelight/errors.hpp"
#include "revelight/experiment.hpp"
#include "revelight/kernels.hpp"

using namespace revelight;
namespace fs = std::filesystem;

namespace {

ExperimentSpec spec_from(const std::string& text) {
  std::istringstream in(text);
  return ExperimentSpec::from_config(ConfigMap::parse(in));
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("revelight_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config lines parse with comments and typed getters") {
  std::istringstream in(
      "# comment\n"
      "q = 3\n"
      "eta=0.5   # trailing\n"
      "p = 0.2, 0.3,0.5\n"
      "hidden = 8,4\n"
      "flag = true\n");
  const ConfigMap c = ConfigMap::parse(in);
  CHECK(c.get_uint("q", 0) == 3);
  CHECK(c.get_double("eta", 0) == 0.5);
  CHECK(c.get_doubles("p") == std::vector<double>{0.2, 0.3, 0.5});
  CHECK(c.get_sizes("hidden") == std::vector<std::size_t>{8, 4});
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_or("missing", "x") == "x");
  CHECK(c.get_double("missing", 2.5) == 2.5);

  std::istringstream dup("q = 1\nq = 2\n");
  CHECK_THROWS_AS(ConfigMap::parse(dup), ConfigError);
  std::istringstream bad("just words\n");
  try {
    ConfigMap::parse(bad);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  std::istringstream num("q = three\n");
  CHECK_THROWS_AS(ConfigMap::parse(num).get_uint("q", 0), ConfigError);
}

TEST_CASE("experiment spec reads its keys and rejects unknown ones") {
  const ExperimentSpec s = spec_from(
      "algorithm = synrevel\nq = 2\nT = 50\ntau = 0\nstraggler = 1:2.5\nmodel = mlp\n"
      "hidden = 6\nsynthetic = blobs\nclasses = 3\nn = 80\nfeatures = 10\n");
  CHECK(s.run.algorithm == Algorithm::kSynRevel);
  CHECK(s.run.q == 2);
  CHECK(s.run.straggler.party == std::size_t{1});
  CHECK(s.run.straggler.slowdown == 2.5);
  CHECK(s.model == "mlp");
  CHECK(s.synthetic.family == SyntheticFamily::kBlobs);
  CHECK(spec_from("straggler = 3\nq = 4\n").run.straggler.party == std::size_t{3});
  CHECK_THROWS_AS(spec_from("learning_rate = 1\n"), ConfigError);
  CHECK_THROWS_AS(spec_from("model = cnn\n"), ConfigError);
  CHECK_THROWS_AS(spec_from("algorithm = fedavg\n"), ConfigError);
}

TEST_CASE("prepared data partitions features across parties") {
  ExperimentSpec s = spec_from("q = 3\nn = 100\nfeatures = 10\n");
  const ExperimentData d = prepare_experiment(s);
  CHECK(d.train.parties() == 3);
  CHECK(d.train.n + d.test.n == 100);
  CHECK(d.test.n == 10);
  CHECK(d.train.block_dims() == std::vector<std::size_t>{4, 3, 3});
  CHECK(d.model.global.param_count() == 0);

  s = spec_from("q = 2\nn = 60\nfeatures = 6\nmodel = mlp\nhidden = 4\nsynthetic = blobs\nclasses = 3\n");
  const ExperimentData m = prepare_experiment(s);
  CHECK(m.model.global.param_count() == 3 * 4);
  CHECK(m.model.local[0].output_dim() == 2);
}

TEST_CASE("runs write reproducible artefacts") {
  const fs::path a = scratch("a"), b = scratch("b");
  const std::string base = "q = 3\nT = 600\nn = 120\nfeatures = 9\neta = 0.02\nseed = 5\n";
  const ExperimentOutput oa = run_experiment(spec_from(base + "out = " + a.string() + "\n"));
  const ExperimentOutput ob = run_experiment(spec_from(base + "out = " + b.string() + "\n"));
  CHECK(slurp(oa.metrics_path) == slurp(ob.metrics_path));
  CHECK(slurp(oa.transcript_path) == slurp(ob.transcript_path));
  CHECK(oa.summary == ob.summary);
  CHECK(fs::exists(a / "summary.csv"));
  CHECK(slurp((a / "summary.csv").string()).rfind("algorithm,seed,final_loss,final_acc,total_bytes,vtime\n", 0) == 0);

  const fs::path n = scratch("nonfed");
  const ExperimentOutput on =
      run_experiment(spec_from(base + "algorithm = nonfed\nout = " + n.string() + "\n"));
  CHECK(on.transcript_path.empty());
  CHECK_FALSE(fs::exists(n / "transcript.jsonl"));
  CHECK(fs::exists(n / "metrics.csv"));
  for (const auto& p : {a, b, n}) fs::remove_all(p);
}

TEST_CASE("reference optimum is below the loss of any iterate") {
  const ExperimentSpec s = spec_from("q = 2\nn = 200\nfeatures = 6\n");
  const ExperimentData d = prepare_experiment(s);
  const double fstar = reference_optimum(d.model, d.train, s.run.lambda_eff, d.init);
  CHECK(fstar < composite_objective(d.init, d.train, s.run.lambda_eff, d.model));
  CHECK(fstar > 0.0);
}

TEST_CASE("a stop gap ends training once the loss is close to the optimum") {
  const fs::path o = scratch("gap");
  const ExperimentOutput out = run_experiment(spec_from(
      "q = 2\nT = 200000\nn = 200\nfeatures = 6\neta = 0.05\nstop_gap = 5e-3\nout = " + o.string() + "\n"));
  CHECK(out.result.reached_stop);
  CHECK(out.result.events < 200000);
  REQUIRE(out.target_loss.has_value());
  CHECK(out.result.metrics.rows.back().loss <= *out.target_loss);
  fs::remove_all(o);
}

TEST_CASE("communication sweep grows with the block width") {
  const ExperimentSpec s = spec_from("q = 2\nT = 200\nn = 40\ntau = 2\n");
  const auto rows = bench_comm(s, {4, 64});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ratio.byte_ratio > 1.0);
  CHECK(rows[1].ratio.byte_ratio > rows[0].ratio.byte_ratio);
}

TEST_CASE("speedup sweep needs a stopping rule") {
  const ExperimentSpec s = spec_from("q = 2\nT = 100\nn = 40\n");
  CHECK_THROWS_AS(speedup_sweep(s, {1, 2}), UsageError);
  const ExperimentSpec t = spec_from("T = 100000\nn = 100\nfeatures = 8\neta = 0.05\nstop_gap = 2e-2\n");
  const auto rows = speedup_sweep(t, {1, 2, 4});
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.reached);
  CHECK(rows[0].speedup == 1.0);
  CHECK(rows[2].speedup > 1.0);
}
