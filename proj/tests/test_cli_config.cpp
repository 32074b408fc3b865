#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "advfeat/experiment.hpp"
#include "advfeat/io.hpp"

using namespace advfeat;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
#ifdef ADVFEAT_CLI_PATH
  return ADVFEAT_CLI_PATH;
#else
  return "";
#endif
}

std::string tmp(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

int run_cli(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config json round trips through the schema") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::natural;
  cfg.seed = 99;
  cfg.dataset.d = 777;
  cfg.network.gamma = 0.25;
  cfg.attack.norm = AttackNorm::Linf;
  cfg.attack.target_rule = TargetRule::flip;
  cfg.student_train.lr = 0.125;
  json j = config_to_json(cfg);
  ExperimentConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
}

TEST_CASE("unknown keys are rejected with their dotted path") {
  json schema = config_to_json(ExperimentConfig{});
  json user = {{"dataset", {{"d", 128}, {"dee", 4}}}};
  CHECK(find_unknown_key(user, schema) == "dataset.dee");
  json nested = {{"network", {{"m", 64}}}, {"networks", json::object()}};
  CHECK(find_unknown_key(nested, schema) == "networks");
  json clean = {{"dataset", {{"d", 128}}}, {"seed", 7}};
  CHECK(find_unknown_key(clean, schema).empty());
}

TEST_CASE("cli gen is byte-identical across runs") {
  if (cli_path().empty()) return;
  std::string out1 = tmp("cli_gen_1.afpd");
  std::string out2 = tmp("cli_gen_2.afpd");
  fs::remove(out1);
  fs::remove(out2);
  REQUIRE(run_cli("gen --source uniform --d 64 --n 8 --seed 1 --out " +
                  out1) == 0);
  REQUIRE(run_cli("gen --source uniform --d 64 --n 8 --seed 1 --out " +
                  out2) == 0);
  CHECK(slurp(out1) == slurp(out2));
  Dataset ds = read_dataset(out1);
  CHECK(ds.n() == 8);
  CHECK(ds.d() == 64);

  // Without --force a rewrite is refused; with it, allowed.
  CHECK(run_cli("gen --source uniform --d 64 --n 8 --seed 1 --out " + out1) !=
        0);
  CHECK(run_cli("--force gen --source uniform --d 64 --n 8 --seed 1 --out " +
                out1) == 0);
  fs::remove(out1);
  fs::remove(out2);
}

TEST_CASE("cli check passes on an orthogonal dataset and fails on demand") {
  if (cli_path().empty()) return;
  std::string ds = tmp("cli_check.afpd");
  fs::remove(ds);
  REQUIRE(run_cli("gen --source orthogonalized --d 128 --n 16 --seed 3 "
                  "--out " +
                  ds) == 0);
  CHECK(run_cli("check --suite orthogonality --dataset " + ds) == 0);
  CHECK(run_cli("check --suite lambda --dataset " + ds) == 0);
  // A far-too-large eps cannot satisfy the natural condition.
  CHECK(run_cli("check --suite natural --eps 100 --dataset " + ds) != 0);
  fs::remove(ds);
}

TEST_CASE("cli train and attack round trip through files") {
  if (cli_path().empty()) return;
  std::string ds = tmp("cli_tr.afpd");
  std::string w = tmp("cli_tr.afpw");
  std::string adv = tmp("cli_tr_adv.afpd");
  std::string rep = tmp("cli_tr_report.json");
  for (const auto& p : {ds, w, adv, rep}) fs::remove(p);

  REQUIRE(run_cli("gen --source orthogonalized --d 64 --n 8 --seed 2 --out " +
                  ds) == 0);
  REQUIRE(run_cli("train --data " + ds + " --params-out " + w +
                  " --report-out " + rep +
                  " --m 16 --max-epochs 200 --seed 4") == 0);
  auto [params, netcfg] = read_params(w);
  CHECK(netcfg.m == 16);
  CHECK(netcfg.d == 64);

  REQUIRE(run_cli("attack --data " + ds + " --out " + adv +
                  " --norm L2 --epsilon 0.5 --seed 6") == 0);
  AdvFileContent content = read_adv_file(adv);
  CHECK(content.data.n() == 8);
  for (Eigen::Index i = 0; i < 8; ++i) {
    CHECK((content.targets[i] == 1.0 || content.targets[i] == -1.0));
  }

  // PGD route through a params file.
  std::string adv2 = tmp("cli_tr_adv2.afpd");
  fs::remove(adv2);
  REQUIRE(run_cli("attack --data " + ds + " --params " + w + " --out " +
                  adv2 + " --mode pgd --norm Linf --epsilon 0.1 --steps 20 "
                  "--seed 6") == 0);
  AdvFileContent c2 = read_adv_file(adv2);
  CHECK((c2.data.X - content.data.X).cwiseAbs().maxCoeff() > 0.0);

  // Missing input file is named explicitly (non-zero exit).
  CHECK(run_cli("train --data /nonexistent.afpd --params-out " + w) != 0);

  for (const auto& p : {ds, w, adv, adv2, rep}) fs::remove(p);
}

TEST_CASE("cli run honors --dry-run and --set overrides") {
  if (cli_path().empty()) return;
  // Dry run never writes.
  std::string dir = tmp("cli_run_dry");
  fs::remove_all(dir);
  REQUIRE(run_cli("--dry-run run --set dataset.d=64 --set dataset.n=16 "
                  "--set n_adv=32 --out-dir " +
                  dir) == 0);
  CHECK_FALSE(fs::exists(dir));
  // Unknown keys are rejected.
  CHECK(run_cli("--dry-run run --set dataset.dd=64") != 0);
}

TEST_CASE("cli sweep emits summary.csv") {
  if (cli_path().empty()) return;
  std::string dir = tmp("cli_sweep_dir");
  fs::remove_all(dir);
  REQUIRE(run_cli("sweep --axis n_adv --values 16,32 "
                  "--set dataset.d=128 --set dataset.n=32 --set n_adv=16 "
                  "--set network.m=16 "
                  "--set teacher_train.max_epochs=30 "
                  "--set student_train.max_epochs=40 --out-dir " +
                  dir) == 0);
  std::string csv = slurp(dir + "/run/summary.csv");
  int lines = 0;
  for (char c : csv) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 3);
  fs::remove_all(dir);
}
