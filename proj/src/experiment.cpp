#include "advfeat/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "advfeat/io.hpp"
#include "advfeat/svg.hpp"

namespace advfeat {

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::natural: return "natural";
    case Scenario::noise: return "noise";
    case Scenario::flipped: return "flipped";
  }
  return "unknown";
}

Scenario scenario_from_name(const std::string& s) {
  if (s == "natural") return Scenario::natural;
  if (s == "noise") return Scenario::noise;
  if (s == "flipped") return Scenario::flipped;
  throw std::invalid_argument("unknown scenario: " + s);
}

const char* sweep_axis_name(SweepAxis a) {
  return a == SweepAxis::d ? "d" : "n_adv";
}

SweepAxis sweep_axis_from_name(const std::string& s) {
  if (s == "d") return SweepAxis::d;
  if (s == "n_adv") return SweepAxis::n_adv;
  throw std::invalid_argument("unknown sweep axis: " + s);
}

void ExperimentConfig::validate() const {
  if (dataset.d < 1 || dataset.n < 1) {
    throw std::invalid_argument("dataset shape must be positive");
  }
  if (scenario == Scenario::noise && n_adv < 1) {
    throw std::invalid_argument("noise scenario needs n_adv >= 1");
  }
  teacher_train.validate();
  student_train.validate();
}

namespace {

Dataset generate_named(const DatasetParams& p, std::uint64_t seed) {
  if (p.source == Source::orthogonalized) {
    // scale multiplies the sqrt(d) row norm used throughout the theory runs.
    return gen_orthogonal_dataset(
        p.d, p.n, seed, p.scale * std::sqrt(static_cast<double>(p.d)));
  }
  return gen_dataset(p.source, p.d, p.n, seed, p.scale);
}

struct ResolvedAttack {
  double epsilon = 0.0;
  int d_delta = 0;
};

// epsilon < 0 requests the scale-aware preset (anchored at the d = 10,000
// values and following the theory's epsilon scaling in d); exactly 0 is the
// pure-noise control.
ResolvedAttack resolve_attack(const AttackSpec& spec, Eigen::Index d) {
  ResolvedAttack r;
  double dd = static_cast<double>(d);
  if (spec.norm == AttackNorm::L2) {
    r.epsilon = spec.epsilon >= 0.0 ? spec.epsilon
                                    : 0.78 * std::sqrt(dd / 10000.0);
  } else if (spec.norm == AttackNorm::Linf) {
    r.epsilon = spec.epsilon >= 0.0 ? spec.epsilon
                                    : 0.03 * std::sqrt(10000.0 / dd);
  } else {
    r.d_delta = spec.d_delta > 0
                    ? spec.d_delta
                    : std::max(1, static_cast<int>(std::lround(0.05 * dd)));
    r.epsilon = spec.epsilon >= 0.0 ? spec.epsilon
                                    : 0.78 * std::sqrt(dd / 10000.0);
  }
  return r;
}

double grid_half_width(const Dataset& ds, const Eigen::VectorXd& vh,
                       const Eigen::VectorXd& uh) {
  double w = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    w = std::max(w, std::abs(ds.X.row(i).dot(vh)));
    w = std::max(w, std::abs(ds.X.row(i).dot(uh)));
  }
  return w > 0.0 ? 1.2 * w : 1.0;
}

double grid_match(const DecisionMap& a, const DecisionMap& b) {
  int match = 0, total = 0;
  for (int i = 0; i < a.resolution; ++i) {
    for (int j = 0; j < a.resolution; ++j) {
      if (a.signs(i, j) == 0 || b.signs(i, j) == 0) continue;
      ++total;
      if (a.signs(i, j) == b.signs(i, j)) ++match;
    }
  }
  return total > 0 ? static_cast<double>(match) / total : 0.0;
}

}  // namespace

double eval_accuracy(const NetworkParams& p, const NetworkConfig& cfg,
                     const Dataset& ds) {
  Eigen::VectorXd f = forward_batch(p, cfg, ds.X);
  int hit = 0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    if ((ds.y[i] > 0.0 && f[i] > 0.0) || (ds.y[i] < 0.0 && f[i] < 0.0)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(ds.n());
}

ExperimentResult run_pipeline(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.scenario == Scenario::flipped) return flipped_experiment(cfg);

  auto t0 = std::chrono::steady_clock::now();
  Rng root(cfg.seed);
  ExperimentResult res;
  res.config_echo = config_to_json(cfg);

  // Natural training data and the standard classifier.
  std::shared_ptr<const Dataset> natural;
  try {
    natural = std::make_shared<const Dataset>(
        generate_named(cfg.dataset, root.fork("natural").next_u64()));
  } catch (const std::exception& e) {
    throw StageError("natural_data", e.what());
  }

  NetworkConfig net = cfg.network;
  net.d = natural->d();
  net.validate();

  NetworkParams teacher;
  try {
    NetworkParams p0 = init_params(net, root.fork("teacher_init").next_u64());
    auto [p, rep] = train(p0, net, *natural, cfg.teacher_train);
    teacher = std::move(p);
    res.teacher_report = std::move(rep);
  } catch (const std::exception& e) {
    throw StageError("teacher_train", e.what());
  }

  // Standard boundary: exact dual weights when the margin system verifies,
  // otherwise the empirical v/u of the trained teacher (recorded).
  BoundaryModel standard;
  try {
    Eigen::VectorXd lambda =
        solve_lambda(*natural, net.gamma, net.mplus(), net.mminus());
    standard = BoundaryModel::exact(natural, std::move(lambda));
  } catch (const SolveError&) {
    auto [v, u] = extract_vu(teacher, net);
    standard = BoundaryModel::empirical(std::move(v), std::move(u));
  }
  res.boundary_mode = standard.mode_name();

  // Adversarial dataset per scenario.
  ResolvedAttack ra = resolve_attack(cfg.attack, natural->d());
  res.attack_epsilon = ra.epsilon;
  res.attack_d_delta = ra.d_delta;

  std::shared_ptr<const Dataset> base;
  Eigen::VectorXd targets;
  try {
    if (cfg.scenario == Scenario::natural) {
      if (cfg.n_adv != 0 && cfg.n_adv != natural->n()) {
        throw std::invalid_argument(
            "natural scenario requires n_adv == n");
      }
      base = natural;
      targets = target_labels(cfg.attack.target_rule, natural->y, base->n(),
                              root.fork("targets").next_u64());
    } else {
      base = std::make_shared<const Dataset>(
          gen_dataset(Source::uniform, natural->d(), cfg.n_adv,
                      root.fork("noise").next_u64(), 1.0));
      // Definition of the noise scenario: targets are always random.
      targets = target_labels(TargetRule::random_pm1, base->y, base->n(),
                              root.fork("targets").next_u64());
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("adversarial_base", e.what());
  }

  AdvDataset adv;
  try {
    if (cfg.attack.mode == AttackMode::geometry) {
      switch (cfg.attack.norm) {
        case AttackNorm::L2:
          adv = geometry_l2(base, standard, ra.epsilon, targets);
          break;
        case AttackNorm::L0:
          adv = geometry_l0(base, standard, ra.d_delta, targets, ra.epsilon);
          break;
        case AttackNorm::Linf:
          adv = geometry_linf(base, standard, ra.epsilon, targets);
          break;
      }
    } else {
      AttackSpec spec = cfg.attack;
      spec.epsilon = cfg.attack.norm == AttackNorm::L0 ? 0.0 : ra.epsilon;
      spec.d_delta = cfg.attack.norm == AttackNorm::L0 ? ra.d_delta : 0;
      if (cfg.attack.norm == AttackNorm::L0 && spec.steps <= 0) {
        spec.steps = ra.d_delta;
      }
      adv = pgd(teacher, net, base, spec, targets);
    }
    adv.spec.seed = cfg.seed;
  } catch (const std::exception& e) {
    throw StageError("attack", e.what());
  }

  NetworkParams student;
  try {
    Dataset student_ds = adv.as_dataset();
    NetworkParams p0 = init_params(net, root.fork("student_init").next_u64());
    auto [p, rep] = train(p0, net, student_ds, cfg.student_train);
    student = std::move(p);
    res.student_report = std::move(rep);
  } catch (const std::exception& e) {
    throw StageError("student_train", e.what());
  }

  try {
    Eigen::MatrixXd probes = gaussian_probes(
        natural->d(), cfg.eval.n_probes,
        std::sqrt(static_cast<double>(natural->d())),
        root.fork("probes").next_u64());
    Evaluator student_eval = [&](const Eigen::VectorXd& z) {
      return forward(student, net, z);
    };
    Evaluator standard_eval = [&](const Eigen::VectorXd& z) {
      return standard.eval(z);
    };
    SignAgreement sa =
        sign_agreement(student_eval, standard_eval, probes, cfg.eval.band);
    res.agreement_vs_standard = sa.rate;
    res.probes_excluded = sa.n_excluded;
    res.accuracy_on_natural = eval_accuracy(student, net, *natural);
    if (cfg.eval.heldout && cfg.dataset.source != Source::orthogonalized) {
      Dataset held = generate_named(cfg.dataset,
                                    root.fork("heldout").next_u64());
      res.accuracy_heldout = eval_accuracy(student, net, held);
    }

    if (cfg.eval.grid_resolution > 0) {
      Eigen::VectorXd v, u;
      if (standard.mode == BoundaryModel::Mode::lambda_exact) {
        std::tie(v, u) = wstd_rows(*natural, standard.lambda, net.gamma);
      } else {
        v = standard.v;
        u = standard.u;
      }
      double hw = grid_half_width(*natural, v.normalized(), u.normalized());
      std::vector<const Dataset*> overlays{natural.get()};
      res.map_student = decision_map(student_eval, v, u, hw,
                                     cfg.eval.grid_resolution, overlays);
      res.map_standard = decision_map(standard_eval, v, u, hw,
                                      cfg.eval.grid_resolution, overlays);
      res.grid_agreement = grid_match(*res.map_student, *res.map_standard);
    }
  } catch (const std::exception& e) {
    throw StageError("evaluate", e.what());
  }

  try {
    OrthoStats nat_stats = ortho_stats(*natural);
    ConditionReport t1 =
        check_orthogonality_condition(nat_stats, natural->n(), net.gamma);
    t1.name = "orthogonality_natural";
    res.condition_reports.push_back(t1);

    Dataset adv_view;
    adv_view.X = adv.Xadv;
    adv_view.y = adv.targets;
    OrthoStats adv_stats = ortho_stats(adv_view);
    ConditionReport t1a =
        check_orthogonality_condition(adv_stats, adv.n(), net.gamma);
    t1a.name = "orthogonality_adversarial";
    res.condition_reports.push_back(t1a);

    if (cfg.attack.mode == AttackMode::geometry &&
        cfg.attack.norm == AttackNorm::L2) {
      if (cfg.scenario == Scenario::natural) {
        res.condition_reports.push_back(check_natural_condition(
            nat_stats, natural->n(), net.gamma, ra.epsilon));
      } else {
        UniformConditionReport ur = check_uniform_condition(
            *base, standard.gradient().normalized(), base->n(), ra.epsilon,
            net.gamma);
        res.condition_reports.push_back(ur.norm_bounds);
        res.condition_reports.push_back(ur.cross_products);
        res.condition_reports.push_back(ur.eta_alignment);
        res.condition_reports.push_back(ur.main);
        res.condition_reports.push_back(ur.conjunction);
      }
    }
  } catch (const std::exception& e) {
    throw StageError("condition_reports", e.what());
  }

  res.natural_data = natural;
  res.adv_data = std::move(adv);
  res.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

ExperimentResult flipped_experiment(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  Rng root(cfg.seed);
  ExperimentResult res;
  res.config_echo = config_to_json(cfg);

  const Eigen::Index d = cfg.dataset.d;
  const Eigen::Index n = cfg.dataset.n;
  const double part_norm = cfg.flipped.part_norm > 0.0
                               ? cfg.flipped.part_norm
                               : std::sqrt(static_cast<double>(d) / 2.0);

  std::shared_ptr<const Dataset> non;
  Dataset naturals;
  try {
    Dataset parts = gen_orthogonal_dataset(
        d, 2 * n, root.fork("flipparts").next_u64(), part_norm);
    Dataset non_ds;
    non_ds.X = parts.X.bottomRows(n);
    non_ds.y = parts.y.head(n);
    non_ds.source = Source::orthogonalized;
    non_ds.seed = parts.seed;
    non_ds.scale = part_norm;
    non = std::make_shared<const Dataset>(std::move(non_ds));

    naturals.X = parts.X.topRows(n) + non->X;
    naturals.y = non->y;
    naturals.source = Source::orthogonalized;
    naturals.seed = parts.seed;
    naturals.scale = part_norm;
  } catch (const std::exception& e) {
    throw StageError("flipped_data", e.what());
  }

  NetworkConfig net = cfg.network;
  net.d = d;
  net.validate();

  // The boundary is built from the non-robust parts only.
  BoundaryModel non_model;
  try {
    Eigen::VectorXd lambda =
        solve_lambda(*non, net.gamma, net.mplus(), net.mminus());
    non_model = BoundaryModel::exact(non, std::move(lambda));
  } catch (const std::exception& e) {
    throw StageError("flipped_boundary", e.what());
  }
  res.boundary_mode = non_model.mode_name();

  const double eps =
      cfg.flipped.eps_factor * part_norm / std::sqrt(static_cast<double>(n));
  res.attack_epsilon = eps;

  AdvDataset adv;
  Eigen::VectorXd targets = -naturals.y;
  try {
    auto base = std::make_shared<const Dataset>(naturals);
    adv = geometry_l2(base, non_model, eps, targets);
  } catch (const std::exception& e) {
    throw StageError("attack", e.what());
  }

  NetworkParams student;
  try {
    Dataset student_ds = adv.as_dataset();
    NetworkParams p0 = init_params(net, root.fork("student_init").next_u64());
    auto [p, rep] = train(p0, net, student_ds, cfg.student_train);
    student = std::move(p);
    res.student_report = std::move(rep);
  } catch (const std::exception& e) {
    throw StageError("student_train", e.what());
  }

  try {
    // Weak-correlation probe family: label-aligned positive mixtures of the
    // non-robust parts.
    Rng pr = root.fork("probes");
    Eigen::MatrixXd probes(cfg.flipped.n_probes, d);
    double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < cfg.flipped.n_probes; ++i) {
      Eigen::VectorXd coeff(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        coeff[k] = non->y[k] * pr.uniform(0.5, 1.5) * inv_sqrt_n;
      }
      probes.row(i) = (non->X.transpose() * coeff).transpose();
    }
    Evaluator student_eval = [&](const Eigen::VectorXd& z) {
      return forward(student, net, z);
    };
    Evaluator non_eval = [&](const Eigen::VectorXd& z) {
      return non_model.eval(z);
    };
    SignAgreement sa =
        sign_agreement(student_eval, non_eval, probes, cfg.eval.band);
    res.agreement_vs_standard = sa.rate;
    res.probes_excluded = sa.n_excluded;
    res.accuracy_on_natural = eval_accuracy(student, net, naturals);

    OrthoStats nat_stats = ortho_stats(naturals);
    ConditionReport t1 = check_orthogonality_condition(nat_stats, n, net.gamma);
    t1.name = "orthogonality_natural";
    res.condition_reports.push_back(t1);
    Dataset adv_view;
    adv_view.X = adv.Xadv;
    adv_view.y = adv.targets;
    OrthoStats adv_stats = ortho_stats(adv_view);
    ConditionReport t1a =
        check_orthogonality_condition(adv_stats, adv.n(), net.gamma);
    t1a.name = "orthogonality_adversarial";
    res.condition_reports.push_back(t1a);
  } catch (const std::exception& e) {
    throw StageError("evaluate", e.what());
  }

  res.natural_data = std::make_shared<const Dataset>(std::move(naturals));
  res.adv_data = std::move(adv);
  res.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

std::vector<SweepCell> sweep(const ExperimentConfig& base, SweepAxis axis,
                             const std::vector<double>& values,
                             const SweepOptions& opts) {
  if (values.empty()) throw std::invalid_argument("sweep needs values");

  auto run_cell = [&](double value) {
    SweepCell cell;
    cell.value = value;
    ExperimentConfig cfg = base;
    if (axis == SweepAxis::d) {
      auto new_d = static_cast<Eigen::Index>(std::llround(value));
      if (opts.scale_n_with_d) {
        double ratio = static_cast<double>(base.dataset.n) /
                       static_cast<double>(base.dataset.d);
        cfg.dataset.n = std::max<Eigen::Index>(
            2, static_cast<Eigen::Index>(std::llround(ratio * new_d)));
      }
      cfg.dataset.d = new_d;
    } else {
      cfg.n_adv = static_cast<Eigen::Index>(std::llround(value));
    }
    try {
      cell.result = run_pipeline(cfg);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    return cell;
  };

  std::vector<SweepCell> cells(values.size());
  int workers = std::max(1, opts.threads);
  if (workers == 1) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      cells[i] = run_cell(values[i]);
    }
    return cells;
  }
  std::size_t next = 0;
  while (next < values.size()) {
    std::size_t batch = std::min<std::size_t>(workers, values.size() - next);
    std::vector<std::future<SweepCell>> futs;
    futs.reserve(batch);
    for (std::size_t k = 0; k < batch; ++k) {
      double v = values[next + k];
      futs.push_back(
          std::async(std::launch::async, [&run_cell, v] { return run_cell(v); }));
    }
    for (std::size_t k = 0; k < batch; ++k) cells[next + k] = futs[k].get();
    next += batch;
  }
  return cells;
}

std::string sweep_summary_csv(const std::vector<SweepCell>& cells,
                              SweepAxis axis, std::uint64_t seed) {
  std::ostringstream os;
  os.precision(17);
  os << "axis,value,seed,accuracy,agreement,boundary_mode,"
        "orthogonality_natural_pass,orthogonality_adversarial_pass,error\n";
  for (const auto& c : cells) {
    os << sweep_axis_name(axis) << ',' << c.value << ',' << seed << ',';
    if (c.ok) {
      int p1 = -1, p2 = -1;
      for (const auto& r : c.result.condition_reports) {
        if (r.name == "orthogonality_natural") p1 = r.pass ? 1 : 0;
        if (r.name == "orthogonality_adversarial") p2 = r.pass ? 1 : 0;
      }
      os << c.result.accuracy_on_natural << ','
         << c.result.agreement_vs_standard << ',' << c.result.boundary_mode
         << ',' << p1 << ',' << p2 << ",\n";
    } else {
      os << ",,,,," << c.error << "\n";
    }
  }
  return os.str();
}

json to_json(const TrainReport& r) {
  json trace = json::array();
  for (const auto& [epoch, value] : r.loss_trace) {
    trace.push_back(json::array({epoch, value}));
  }
  return json{{"epochs_run", r.epochs_run},
              {"final_loss", r.final_loss},
              {"margin_min", r.margin_min},
              {"direction_drift", r.direction_drift},
              {"stopped_by",
               r.stopped_by == StopReason::converged ? "converged"
                                                     : "max_epochs"},
              {"final_lr", r.final_lr},
              {"loss_trace", std::move(trace)}};
}

json to_json(const ConditionReport& r) {
  return json{{"name", r.name},         {"lhs", r.lhs},
              {"rhs", r.rhs},           {"constants", r.constants},
              {"case", r.case_index},   {"pass", r.pass}};
}

json to_json(const ProbeTable& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    rows.push_back(json{{"d", row.d},
                        {"n", row.n},
                        {"statistic", row.statistic},
                        {"value", row.value},
                        {"reference", row.reference},
                        {"normalized_ratio", row.normalized_ratio}});
  }
  return json{{"rows", std::move(rows)}};
}

json to_json(const ExperimentResult& r) {
  json conds = json::array();
  for (const auto& c : r.condition_reports) conds.push_back(to_json(c));
  json out{{"teacher_report", to_json(r.teacher_report)},
           {"student_report", to_json(r.student_report)},
           {"condition_reports", std::move(conds)},
           {"boundary_mode", r.boundary_mode},
           {"agreement_vs_standard", r.agreement_vs_standard},
           {"probes_excluded", r.probes_excluded},
           {"accuracy_on_natural", r.accuracy_on_natural},
           {"attack_epsilon", r.attack_epsilon},
           {"attack_d_delta", r.attack_d_delta},
           {"config", r.config_echo},
           {"wall_time_sec", r.wall_time_sec}};
  if (r.accuracy_heldout >= 0.0) out["accuracy_heldout"] = r.accuracy_heldout;
  if (r.grid_agreement >= 0.0) out["grid_agreement"] = r.grid_agreement;
  return out;
}

namespace {

json train_to_json(const TrainConfig& t) {
  return json{
      {"loss", t.loss_kind == LossKind::exponential ? "exponential"
                                                    : "logistic"},
      {"lr", t.lr},
      {"momentum", t.momentum},
      {"max_epochs", t.max_epochs},
      {"batch", t.batch},
      {"scheduler",
       {{"factor", t.scheduler.factor},
        {"patience_epochs", t.scheduler.patience_epochs},
        {"min_improvement", t.scheduler.min_improvement}}},
      {"stop",
       {{"direction_tol", t.stop.direction_tol},
        {"window", t.stop.window},
        {"require_positive_margins", t.stop.require_positive_margins}}}};
}

TrainConfig train_from_json(const json& j, TrainConfig base) {
  if (j.contains("loss")) {
    std::string l = j["loss"];
    if (l == "exponential") {
      base.loss_kind = LossKind::exponential;
    } else if (l == "logistic") {
      base.loss_kind = LossKind::logistic;
    } else {
      throw std::invalid_argument("unknown loss kind: " + l);
    }
  }
  base.lr = j.value("lr", base.lr);
  base.momentum = j.value("momentum", base.momentum);
  base.max_epochs = j.value("max_epochs", base.max_epochs);
  base.batch = j.value("batch", base.batch);
  if (j.contains("scheduler")) {
    const json& s = j["scheduler"];
    base.scheduler.factor = s.value("factor", base.scheduler.factor);
    base.scheduler.patience_epochs =
        s.value("patience_epochs", base.scheduler.patience_epochs);
    base.scheduler.min_improvement =
        s.value("min_improvement", base.scheduler.min_improvement);
  }
  if (j.contains("stop")) {
    const json& s = j["stop"];
    base.stop.direction_tol = s.value("direction_tol", base.stop.direction_tol);
    base.stop.window = s.value("window", base.stop.window);
    base.stop.require_positive_margins = s.value(
        "require_positive_margins", base.stop.require_positive_margins);
  }
  return base;
}

}  // namespace

json config_to_json(const ExperimentConfig& cfg) {
  return json{
      {"scenario", scenario_name(cfg.scenario)},
      {"name", cfg.name},
      {"seed", cfg.seed},
      {"dataset",
       {{"source", source_name(cfg.dataset.source)},
        {"d", cfg.dataset.d},
        {"n", cfg.dataset.n},
        {"scale", cfg.dataset.scale}}},
      {"n_adv", cfg.n_adv},
      {"network",
       {{"m", cfg.network.m},
        {"m_plus", cfg.network.m_plus},
        {"gamma", cfg.network.gamma},
        {"init_scale", cfg.network.init_scale}}},
      {"teacher_train", train_to_json(cfg.teacher_train)},
      {"student_train", train_to_json(cfg.student_train)},
      {"attack",
       {{"norm", attack_norm_name(cfg.attack.norm)},
        {"mode", cfg.attack.mode == AttackMode::geometry ? "geometry" : "pgd"},
        {"epsilon", cfg.attack.epsilon},
        {"d_delta", cfg.attack.d_delta},
        {"steps", cfg.attack.steps},
        {"step_size", cfg.attack.step_size},
        {"target_rule", target_rule_name(cfg.attack.target_rule)},
        {"pgd_on_loss", cfg.attack.pgd_on_loss}}},
      {"eval",
       {{"n_probes", cfg.eval.n_probes},
        {"band", cfg.eval.band},
        {"heldout", cfg.eval.heldout},
        {"grid_resolution", cfg.eval.grid_resolution}}},
      {"flipped",
       {{"part_norm", cfg.flipped.part_norm},
        {"eps_factor", cfg.flipped.eps_factor},
        {"n_probes", cfg.flipped.n_probes}}}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("scenario")) cfg.scenario = scenario_from_name(j["scenario"]);
  cfg.name = j.value("name", cfg.name);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    if (d.contains("source")) {
      cfg.dataset.source = source_from_name(d["source"]);
    }
    cfg.dataset.d = d.value("d", cfg.dataset.d);
    cfg.dataset.n = d.value("n", cfg.dataset.n);
    cfg.dataset.scale = d.value("scale", cfg.dataset.scale);
  }
  cfg.n_adv = j.value("n_adv", cfg.n_adv);
  if (j.contains("network")) {
    const json& n = j["network"];
    cfg.network.m = n.value("m", cfg.network.m);
    cfg.network.m_plus = n.value("m_plus", cfg.network.m_plus);
    cfg.network.gamma = n.value("gamma", cfg.network.gamma);
    cfg.network.init_scale = n.value("init_scale", cfg.network.init_scale);
  }
  if (j.contains("teacher_train")) {
    cfg.teacher_train = train_from_json(j["teacher_train"], cfg.teacher_train);
  }
  if (j.contains("student_train")) {
    cfg.student_train = train_from_json(j["student_train"], cfg.student_train);
  }
  if (j.contains("attack")) {
    const json& a = j["attack"];
    if (a.contains("norm")) {
      cfg.attack.norm = attack_norm_from_name(a["norm"]);
    }
    if (a.contains("mode")) {
      std::string m = a["mode"];
      if (m == "geometry") {
        cfg.attack.mode = AttackMode::geometry;
      } else if (m == "pgd") {
        cfg.attack.mode = AttackMode::pgd;
      } else {
        throw std::invalid_argument("unknown attack mode: " + m);
      }
    }
    cfg.attack.epsilon = a.value("epsilon", cfg.attack.epsilon);
    cfg.attack.d_delta = a.value("d_delta", cfg.attack.d_delta);
    cfg.attack.steps = a.value("steps", cfg.attack.steps);
    cfg.attack.step_size = a.value("step_size", cfg.attack.step_size);
    if (a.contains("target_rule")) {
      cfg.attack.target_rule = target_rule_from_name(a["target_rule"]);
    }
    cfg.attack.pgd_on_loss = a.value("pgd_on_loss", cfg.attack.pgd_on_loss);
  }
  if (j.contains("eval")) {
    const json& e = j["eval"];
    cfg.eval.n_probes = e.value("n_probes", cfg.eval.n_probes);
    cfg.eval.band = e.value("band", cfg.eval.band);
    cfg.eval.heldout = e.value("heldout", cfg.eval.heldout);
    cfg.eval.grid_resolution =
        e.value("grid_resolution", cfg.eval.grid_resolution);
  }
  if (j.contains("flipped")) {
    const json& f = j["flipped"];
    cfg.flipped.part_norm = f.value("part_norm", cfg.flipped.part_norm);
    cfg.flipped.eps_factor = f.value("eps_factor", cfg.flipped.eps_factor);
    cfg.flipped.n_probes = f.value("n_probes", cfg.flipped.n_probes);
  }
  return cfg;
}

std::string find_unknown_key(const json& user, const json& schema,
                             const std::string& prefix) {
  if (!user.is_object()) return "";
  for (auto it = user.begin(); it != user.end(); ++it) {
    std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.is_object() || !schema.contains(it.key())) return path;
    if (it.value().is_object()) {
      std::string nested = find_unknown_key(it.value(), schema[it.key()], path);
      if (!nested.empty()) return nested;
    }
  }
  return "";
}

void write_run_directory(const std::string& dir, const ExperimentConfig& cfg,
                         const ExperimentResult& result, bool force) {
  namespace fs = std::filesystem;
  fs::path root(dir);
  if (fs::exists(root) && !force) {
    throw std::runtime_error("output directory exists (use --force): " + dir);
  }
  fs::create_directories(root);
  write_text_file((root / "config.json").string(),
                  config_to_json(cfg).dump(2) + "\n");
  write_text_file((root / "result.json").string(),
                  to_json(result).dump(2) + "\n");
  if (result.natural_data) {
    write_dataset(*result.natural_data, (root / "natural.afpd").string());
  }
  if (result.adv_data) {
    AdvFileContent content;
    content.data = result.adv_data->as_dataset();
    if (result.adv_data->base) content.data.y = result.adv_data->base->y;
    content.targets = result.adv_data->targets;
    content.provenance = result.adv_data->provenance_id();
    content.support = result.adv_data->support;
    write_adv_file(content, (root / "adversarial.afpd").string());
  }
  if (result.map_student && result.map_standard) {
    fs::create_directories(root / "maps");
    write_text_file((root / "maps" / "student.svg").string(),
                    decision_map_svg(*result.map_student));
    write_text_file((root / "maps" / "standard.svg").string(),
                    decision_map_svg(*result.map_standard));
    write_decision_map_csv(*result.map_student,
                           (root / "maps" / "student.csv").string());
    write_decision_map_csv(*result.map_standard,
                           (root / "maps" / "standard.csv").string());
  }
}

}  // namespace advfeat
