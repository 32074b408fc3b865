#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "advfeat/attack.hpp"
#include "advfeat/boundary.hpp"
#include "advfeat/theory.hpp"
#include "advfeat/train.hpp"

namespace advfeat {

using json = nlohmann::json;

enum class Scenario { natural, noise, flipped };
const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& s);

struct DatasetParams {
  Source source = Source::uniform;
  Eigen::Index d = 1024;
  Eigen::Index n = 128;
  double scale = 1.0;
};

struct EvalConfig {
  int n_probes = 2000;
  double band = 1e-3;
  bool heldout = true;
  // > 0: also rasterize decision maps on the (v,u) plane and report the
  // grid sign-agreement between student and standard boundary.
  int grid_resolution = 0;
};

// Robust + non-robust split for the flipped-label preset: natural samples
// are x = x_rob + x_non with 2N mutually orthogonal parts.
struct FlippedParams {
  double part_norm = 0.0;  // 0: sqrt(d/2)
  // epsilon = eps_factor * part_norm / sqrt(N); 2 puts the perturbed set back
  // at exact orthogonality and safely past the restore threshold.
  double eps_factor = 2.0;
  int n_probes = 200;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::noise;
  std::string name = "run";
  std::uint64_t seed = 1;
  DatasetParams dataset;
  Eigen::Index n_adv = 1024;  // noise scenario; natural/flipped force n
  NetworkConfig network;   // d is overwritten from dataset.d
  TrainConfig teacher_train;
  TrainConfig student_train;
  AttackSpec attack;  // epsilon <= 0 or d_delta == 0 pick scale-aware defaults
  EvalConfig eval;
  FlippedParams flipped;

  void validate() const;
};

struct StageError : std::runtime_error {
  std::string stage;
  StageError(std::string stage_, const std::string& what)
      : std::runtime_error("[" + stage_ + "] " + what),
        stage(std::move(stage_)) {}
};

struct ExperimentResult {
  TrainReport teacher_report;
  TrainReport student_report;
  std::vector<ConditionReport> condition_reports;
  std::string boundary_mode;  // lambda_exact or empirical_vu
  double agreement_vs_standard = 0.0;
  int probes_excluded = 0;
  double grid_agreement = -1.0;  // -1 when no grid was requested
  double accuracy_on_natural = 0.0;
  double accuracy_heldout = -1.0;
  double attack_epsilon = 0.0;  // resolved value actually used
  int attack_d_delta = 0;
  json config_echo;
  double wall_time_sec = 0.0;
  std::optional<DecisionMap> map_student;
  std::optional<DecisionMap> map_standard;
  // Carried so run directories can persist them as AFPD files.
  std::shared_ptr<const Dataset> natural_data;
  std::optional<AdvDataset> adv_data;
};

ExperimentResult run_pipeline(const ExperimentConfig& cfg);
ExperimentResult flipped_experiment(const ExperimentConfig& cfg);

// Fraction of samples with sgn(f(x_n)) = y_n; an exact zero counts as wrong.
double eval_accuracy(const NetworkParams& p, const NetworkConfig& cfg,
                     const Dataset& ds);

enum class SweepAxis { d, n_adv };
const char* sweep_axis_name(SweepAxis a);
SweepAxis sweep_axis_from_name(const std::string& s);

struct SweepOptions {
  // Scale the natural training-set size with d (the presets keep n = d/10).
  bool scale_n_with_d = true;
  int threads = 1;
};

struct SweepCell {
  double value = 0.0;
  bool ok = false;
  std::string error;
  ExperimentResult result;
};

// One pipeline per axis value, shared root seed; failed cells carry the
// error and the sweep continues.
std::vector<SweepCell> sweep(const ExperimentConfig& base, SweepAxis axis,
                             const std::vector<double>& values,
                             const SweepOptions& opts = {});

std::string sweep_summary_csv(const std::vector<SweepCell>& cells,
                              SweepAxis axis, std::uint64_t seed);

// JSON views used by result.json and the CLI echo.
json to_json(const TrainReport& r);
json to_json(const ConditionReport& r);
json to_json(const ProbeTable& t);
json to_json(const ExperimentResult& r);
json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const json& j);

// Rejects keys that the schema does not know; returns the offending dotted
// path, or an empty string when clean.
std::string find_unknown_key(const json& user, const json& schema,
                             const std::string& prefix = "");

// Writes config.json, result.json and optional maps/*.svg under dir.
void write_run_directory(const std::string& dir, const ExperimentConfig& cfg,
                         const ExperimentResult& result, bool force);

}  // namespace advfeat
