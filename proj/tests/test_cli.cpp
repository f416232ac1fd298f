// Copyright 2026 The wavetrain Authors
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "test_support.hpp"
#include "wavetrain/experiment.hpp"
#include "wavetrain/io.hpp"

using namespace wavetrain;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = wavetrain::testing::scratch_dir("cli");

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" WAVETRAIN_CLI "\" " + args + " >" + (kRoot / "stdout.txt").string() + " 2>" +
                          (kRoot / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  return out;
}

/// Small dataset shared by most cases.
const fs::path& data_dir() {
  static const fs::path dir = [] {
    const fs::path d = kRoot / "shared" / "data";
    REQUIRE(run("gen-data -o " + (kRoot / "shared").string() + " --samples-per-domain 50") == 0);
    return d;
  }();
  return dir;
}

std::string train_args(const fs::path& out) {
  return "train --data-dir " + data_dir().string() + " -o " + out.string() +
         " --iterations 6 --batch-size 32 --lr 0.01 --eval-interval 3";
}

}  // namespace

TEST_CASE("gen-data: layout, determinism, usage errors") {
  const fs::path a = kRoot / "gen_a", b = kRoot / "gen_b";
  REQUIRE(run("gen-data -o " + a.string() + " --samples-per-domain 12") == 0);
  REQUIRE(run("gen-data -o " + b.string() + " --samples-per-domain 12") == 0);
  for (const char* name : {"source_0", "source_1", "source_2", "heldout_0", "heldout_1"}) {
    CHECK(fs::is_directory(a / "data" / name));
    CHECK(slurp(a / "data" / name / "labels.csv") == slurp(b / "data" / name / "labels.csv"));
    CHECK(slurp(a / "data" / name / "000007.ppm") == slurp(b / "data" / name / "000007.ppm"));
  }
  CHECK(!fs::exists(a / "data" / "source_3"));
  CHECK(!fs::exists(a / "data" / "heldout_2"));
  CHECK(slurp(a / "data" / "domains.json") == slurp(b / "data" / "domains.json"));
  CHECK(run("gen-data -o " + a.string() + " --samples-per-domain 0") == 2);
  CHECK(run("gen-data -o " + a.string() + " --perturb-scale 0.5") == 2);
  CHECK(run("gen-data --no-such-flag") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("gen-data output matches the in-memory generator") {
  DomainLayout layout;
  layout.samples_per_domain = 50;
  const ExperimentData mem = make_experiment_data(layout);
  const ExperimentData disk = load_experiment_data(data_dir());
  REQUIRE(disk.sources.size() == 3);
  REQUIRE(disk.heldout.size() == 2);
  for (std::size_t i = 0; i < 3; ++i) CHECK(disk.sources[i].images == mem.sources[i].images);
  CHECK(disk.heldout[1].labels == mem.heldout[1].labels);
}

TEST_CASE("train: run directory, paper defaults, wall_steps") {
  const fs::path out = kRoot / "train_defaults";
  REQUIRE(run("train --data-dir " + data_dir().string() + " -o " + out.string() + " --iterations 2 --seeds 3") == 0);
  const auto meta = nlohmann::json::parse(slurp(out / "seed_3" / "run.json"));
  CHECK(meta["config"]["trainer"]["learning_rate"].get<double>() == 2e-5);
  CHECK(meta["config"]["trainer"]["batch_size"].get<int>() == 128);
  CHECK(meta["config"]["trainer"]["master_seed"].get<int>() == 3);
  CHECK(meta["wall_steps"].get<int>() == 2);
  CHECK(meta["version"].get<std::string>().rfind("v", 0) == 0);
  CHECK(fs::exists(out / "seed_3" / "final" / "weights.bin"));
  CHECK(fs::exists(out / "summary.csv"));

  const fs::path three = kRoot / "train_three";
  REQUIRE(run(train_args(three) + " --aug identity --aug flip --aug \"hed(0.05)\"") == 0);
  const auto m3 = nlohmann::json::parse(slurp(three / "seed_0" / "run.json"));
  CHECK(m3["wall_steps"].get<int>() == 3 * 6);
  CHECK(m3["config"]["trainer"]["num_trajectories"].get<int>() == 3);
  for (int n = 0; n < 3; ++n) CHECK(fs::exists(three / "seed_0" / "last_cycle" / ("theta_" + std::to_string(n))));
  // 6 / 3 + 1 training rows, then 5 domains + pooled + held-out pooled.
  const auto rows = lines_of(slurp(three / "seed_0" / "metrics.csv"));
  CHECK(rows.size() == 1 + 3 + 7);
}

TEST_CASE("train: config file with flag overrides") {
  const fs::path out = kRoot / "train_config";
  nlohmann::json cfg = {{"trainer", {{"learning_rate", 0.5}, {"batch_size", 16}, {"iterations", 4}}},
                        {"data_dir", data_dir().string()},
                        {"output_dir", out.string()},
                        {"seeds", {5}}};
  std::ofstream(kRoot / "cfg.json") << cfg.dump();
  REQUIRE(run("train -c " + (kRoot / "cfg.json").string() + " --lr 0.02") == 0);
  const auto meta = nlohmann::json::parse(slurp(out / "seed_5" / "run.json"));
  CHECK(meta["config"]["trainer"]["learning_rate"].get<double>() == 0.02);
  CHECK(meta["config"]["trainer"]["batch_size"].get<int>() == 16);
  CHECK(meta["wall_steps"].get<int>() == 4);
  std::ofstream(kRoot / "bad.json") << "{ not json";
  CHECK(run("train -c " + (kRoot / "bad.json").string()) == 2);
  CHECK(run("train --data-dir " + (kRoot / "missing").string() + " -o " + out.string()) == 2);
  CHECK(run(train_args(out) + " --aug \"warp(1)\"") == 2);
}

TEST_CASE("train: A=1 identity reproduces the ERM baseline") {
  const fs::path out = kRoot / "train_erm";
  REQUIRE(run(train_args(out) + " --aug identity") == 0);
  const ExperimentData data = load_experiment_data(data_dir());
  TrainerConfig cfg;
  cfg.iterations = 6;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.01;
  cfg.eval_interval = 3;
  CHECK(read_checkpoint(out / "seed_0" / "final") == erm_train(cfg, data.sources).final_weights);
}

TEST_CASE("train: ascent ends with higher training loss or diverges, 3 seeds") {
  const std::string common = " --iterations 30 --batch-size 32 --lr 0.01 --eval-interval 30";
  for (const char* seed : {"0", "1", "2"}) {
    const fs::path down = kRoot / "descend", up = kRoot / "ascend";
    REQUIRE(run("train --data-dir " + data_dir().string() + " -o " + down.string() + common + " --seeds " + seed) == 0);
    const int rc = run("train --data-dir " + data_dir().string() + " -o " + up.string() + common + " --seeds " + seed +
                       " --ascend");
    if (rc == 1) {
      CHECK(slurp(kRoot / "stderr.txt").find("NonFiniteLoss") != std::string::npos);
      continue;
    }
    REQUIRE(rc == 0);
    const std::string dir = std::string("seed_") + seed;
    const auto d = lines_of(slurp(down / dir / "metrics.csv"));
    const auto a = lines_of(slurp(up / dir / "metrics.csv"));
    CHECK(std::stod(fields_of(a[2])[3]) > std::stod(fields_of(d[2])[3]));
    CHECK(nlohmann::json::parse(slurp(up / dir / "run.json"))["config"]["trainer"]["ascend"].get<bool>());
  }
}

TEST_CASE("train: non-finite loss exits with 1") {
  CHECK(run(train_args(kRoot / "diverge") + " --lr 1e300 --iterations 50") == 1);
  CHECK(slurp(kRoot / "stderr.txt").find("NonFiniteLoss") != std::string::npos);
}

TEST_CASE("train: metrics are byte-identical across reruns and thread counts") {
  const fs::path a = kRoot / "threads_a", b = kRoot / "threads_b";
  REQUIRE(run(train_args(a) + " --aug flip --aug \"hed(0.05)\"", "WAVETRAIN_THREADS=1") == 0);
  REQUIRE(run(train_args(b) + " --aug flip --aug \"hed(0.05)\"", "WAVETRAIN_THREADS=3") == 0);
  CHECK(slurp(a / "seed_0" / "metrics.csv") == slurp(b / "seed_0" / "metrics.csv"));
  CHECK(slurp(a / "seed_0" / "final" / "weights.bin") == slurp(b / "seed_0" / "final" / "weights.bin"));
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  CHECK(run(train_args(a), "WAVETRAIN_THREADS=lots") == 2);
}

TEST_CASE("eval: table layout and errors") {
  const fs::path out = kRoot / "eval_run";
  REQUIRE(run(train_args(out)) == 0);
  const fs::path csv = kRoot / "eval.csv";
  REQUIRE(run("eval " + (out / "seed_0" / "final").string() + " --data-dir " + data_dir().string() + " --out " +
              csv.string()) == 0);
  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() == 1 + 5 + 1);
  CHECK(rows[0] == "iteration,split,domain_id,loss,accuracy");
  const std::vector<std::string> splits{"source", "source", "source", "val", "test", "pooled"};
  CHECK(fields_of(rows[1])[1] == "source");
  CHECK(fields_of(rows[4])[1] == "val");
  CHECK(fields_of(rows[5])[1] == "test");
  CHECK(fields_of(rows[6])[2] == "pooled");
  CHECK(slurp(kRoot / "stdout.txt").find("val") != std::string::npos);
  // The final table in metrics.csv carries the same numbers.
  const std::string metrics = slurp(out / "seed_0" / "metrics.csv");
  CHECK(metrics.find(fields_of(rows[4])[3] + "," + fields_of(rows[4])[4]) != std::string::npos);

  CHECK(run("eval " + (kRoot / "nowhere").string() + " --data-dir " + data_dir().string()) == 2);
  CHECK(slurp(kRoot / "stderr.txt").find("nowhere") != std::string::npos);
  CHECK(run("eval") == 2);
}

TEST_CASE("ablate: schema, baseline row, reproducibility") {
  const fs::path out = kRoot / "ablate";
  const std::string args = "ablate --grid core --data-dir " + data_dir().string() + " -o " + out.string() +
                           " --iterations 3 --batch-size 16 --lr 0.01 --seeds 0 1";
  REQUIRE(run(args) == 0);
  const std::string first = slurp(out / "ablation.csv");
  const auto rows = lines_of(first);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "row_label,num_trajectories,augs,median_heldout_acc,seeds");
  CHECK(rows[1].rfind("1 (no weight averaging),1,identity,", 0) == 0);
  CHECK(rows[3].find("hed(0.15)") != std::string::npos);
  CHECK(rows[1].substr(rows[1].size() - 4) == ",0 1");
  CHECK(fs::exists(out / "ablation" / "seed_0" / "heldout.csv"));
  CHECK(fs::exists(out / "ablation" / "seed_1" / "heldout.csv"));
  REQUIRE(run(args) == 0);
  CHECK(slurp(out / "ablation.csv") == first);
  CHECK(run(args + " --grid tiny") == 2);
}

TEST_CASE("augment-image: identity, golden output, errors") {
  const fs::path in = data_dir() / "source_0" / "000003.ppm";
  const fs::path same = kRoot / "same.ppm", hed = kRoot / "hed.ppm";
  REQUIRE(run("augment-image " + in.string() + " \"\" 1 " + same.string()) == 0);
  CHECK(slurp(same) == slurp(in));

  REQUIRE(run("augment-image " + in.string() + " \"hed(0.05)\" 42 " + hed.string()) == 0);
  Rng rng(42);
  write_ppm(hed_jitter(read_ppm(in), 0.05, rng), kRoot / "golden.ppm");
  CHECK(slurp(hed) == slurp(kRoot / "golden.ppm"));
  REQUIRE(run("augment-image " + in.string() + " \"hed(0.05)\" 42 " + (kRoot / "hed2.ppm").string()) == 0);
  CHECK(slurp(kRoot / "hed2.ppm") == slurp(hed));

  CHECK(run("augment-image " + in.string() + " \"flip;blur(sigma=x)\" 1 " + (kRoot / "x.ppm").string()) == 2);
  CHECK(slurp(kRoot / "stderr.txt").find("position 16") != std::string::npos);
  CHECK(run("augment-image " + (kRoot / "absent.ppm").string() + " flip 1 " + (kRoot / "x.ppm").string()) == 2);
}

TEST_CASE("lmc: flat for identical checkpoints, endpoints match eval, K check") {
  const fs::path out = kRoot / "lmc_run";
  REQUIRE(run(train_args(out) + " --seeds 0 1") == 0);
  const fs::path c0 = out / "seed_0" / "final", c1 = out / "seed_1" / "final";
  const fs::path held = data_dir() / "heldout_0";

  REQUIRE(run("lmc " + c0.string() + " " + c0.string() + " --dataset " + held.string() + " -k 4 --out " +
              (kRoot / "flat.csv").string()) == 0);
  const auto flat = nlohmann::json::parse(slurp(kRoot / "flat.json"));
  CHECK(std::abs(flat["barrier"].get<double>()) < 1e-12);
  CHECK(lines_of(slurp(kRoot / "flat.csv")).size() == 6);

  REQUIRE(run("lmc " + c0.string() + " " + c1.string() + " --dataset " + held.string() + " -k 5 --out " +
              (kRoot / "pair.csv").string()) == 0);
  const auto curve = lines_of(slurp(kRoot / "pair.csv"));
  REQUIRE(run("eval " + c0.string() + " --data-dir " + data_dir().string() + " --out " + (kRoot / "e0.csv").string()) ==
          0);
  REQUIRE(run("eval " + c1.string() + " --data-dir " + data_dir().string() + " --out " + (kRoot / "e1.csv").string()) ==
          0);
  CHECK(fields_of(curve[1])[1] == fields_of(lines_of(slurp(kRoot / "e0.csv"))[4])[3]);
  CHECK(fields_of(curve.back())[1] == fields_of(lines_of(slurp(kRoot / "e1.csv"))[4])[3]);

  CHECK(run("lmc " + c0.string() + " " + c1.string() + " --dataset " + held.string() + " -k 1") == 2);
  CHECK(run("lmc " + c0.string() + " " + (kRoot / "none").string() + " --dataset " + held.string()) == 2);
}
