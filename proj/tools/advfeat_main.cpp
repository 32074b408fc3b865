#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "advfeat/experiment.hpp"
#include "advfeat/io.hpp"
#include "advfeat/svg.hpp"

namespace fs = std::filesystem;
using namespace advfeat;

namespace {

void ensure_writable(const std::string& path, bool force) {
  if (fs::exists(path) && !force) {
    throw std::runtime_error("refusing to overwrite " + path +
                             " (use --force)");
  }
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) {
    throw std::runtime_error("missing input file: " + path);
  }
}

json load_json_file(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("config parse error in " + path + ": " +
                             e.what());
  }
  return j;
}

// --set dotted.path=value with the value parsed as a JSON literal when it is
// one, a plain string otherwise.
void apply_override(json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::runtime_error("--set expects dotted.path=value, got: " +
                             assignment);
  }
  std::string path = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (...) {
    value = raw;
  }
  json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) {
      throw std::runtime_error("bad --set path: " + path);
    }
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = value;
}

ExperimentConfig resolve_config(const std::string& config_path,
                                const std::vector<std::string>& overrides,
                                std::uint64_t seed_flag, bool seed_set) {
  json doc = json::object();
  if (!config_path.empty()) doc = load_json_file(config_path);
  for (const auto& o : overrides) apply_override(doc, o);
  json schema = config_to_json(ExperimentConfig{});
  std::string bad = find_unknown_key(doc, schema);
  if (!bad.empty()) {
    throw std::runtime_error("unknown config key: " + bad);
  }
  ExperimentConfig cfg = config_from_json(doc);
  if (seed_set) cfg.seed = seed_flag;
  return cfg;
}

int default_threads() {
  if (const char* env = std::getenv("ADVFEAT_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

void print_report(const ConditionReport& r) {
  std::printf("  [%s] %-24s lhs=%.6g rhs=%.6g%s%s\n",
              r.pass ? "PASS" : "FAIL", r.name.c_str(), r.lhs, r.rhs,
              r.case_index > 0 ? (" case=" + std::to_string(r.case_index))
                                     .c_str()
                               : "",
              "");
}

BoundaryModel teacher_from_dataset(const std::string& path, double gamma,
                                   int m_plus, int m_minus) {
  auto ds = std::make_shared<const Dataset>(read_dataset(path));
  Eigen::VectorXd lambda = solve_lambda(*ds, gamma, m_plus, m_minus);
  return BoundaryModel::exact(std::move(ds), std::move(lambda));
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> parse_scales(
    const std::string& spec) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto x = tok.find('x');
    if (x == std::string::npos) {
      throw std::runtime_error("scale must look like 512x64: " + tok);
    }
    out.emplace_back(std::stoll(tok.substr(0, x)),
                     std::stoll(tok.substr(x + 1)));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"advfeat: perturbation-learning laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  bool force = false;
  bool dry_run = false;
  int threads = default_threads();
  app.add_flag("--force", force, "overwrite existing outputs");
  app.add_flag("--dry-run", dry_run, "resolve and print, do not write");
  app.add_option("--threads", threads, "worker threads for sweeps");

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a dataset (AFPD)");
  std::string gen_source = "uniform", gen_out, gen_csv;
  std::int64_t gen_d = 64, gen_n = 8;
  std::uint64_t gen_seed = 1;
  double gen_scale = 1.0, gen_norm = 0.0;
  gen->add_option("--source", gen_source,
                  "uniform|gaussian|rademacher|orthogonalized");
  gen->add_option("--d", gen_d, "input dimension");
  gen->add_option("--n", gen_n, "sample count");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--scale", gen_scale, "per-entry amplitude");
  gen->add_option("--norm", gen_norm,
                  "row norm for orthogonalized (default sqrt(d))");
  gen->add_option("--out", gen_out, "output AFPD path")->required();
  gen->add_option("--csv", gen_csv, "also export CSV here");

  // ---- train ----
  auto* tr = app.add_subcommand("train", "train a network on an AFPD file");
  std::string tr_data, tr_params_out, tr_report_out, tr_loss = "exponential";
  int tr_m = 128, tr_mplus = -1, tr_epochs = 100000, tr_batch = 0;
  double tr_gamma = 0.5, tr_init = 0.01, tr_lr = 0.01, tr_mom = 0.9;
  std::uint64_t tr_seed = 1;
  tr->add_option("--data", tr_data, "training AFPD")->required();
  tr->add_option("--params-out", tr_params_out, "output AFPW")->required();
  tr->add_option("--report-out", tr_report_out, "training report JSON");
  tr->add_option("--m", tr_m, "hidden width");
  tr->add_option("--m-plus", tr_mplus, "positive block size (-1: m/2)");
  tr->add_option("--gamma", tr_gamma, "leaky slope");
  tr->add_option("--init-scale", tr_init, "init scale");
  tr->add_option("--loss", tr_loss, "exponential|logistic");
  tr->add_option("--lr", tr_lr, "learning rate");
  tr->add_option("--momentum", tr_mom, "momentum");
  tr->add_option("--max-epochs", tr_epochs, "epoch budget");
  tr->add_option("--batch", tr_batch, "minibatch size (0: full batch)");
  tr->add_option("--seed", tr_seed, "training seed");

  // ---- attack ----
  auto* at = app.add_subcommand("attack", "emit an adversarial AFPD");
  std::string at_data, at_teacher, at_params, at_out, at_norm = "L2",
              at_mode = "geometry", at_rule = "random_pm1";
  double at_eps = 0.0, at_step = 0.0, at_gamma = 0.5;
  int at_ddelta = 0, at_steps = 100;
  std::uint64_t at_seed = 1;
  at->add_option("--data", at_data, "base AFPD")->required();
  at->add_option("--teacher-data", at_teacher,
                 "dataset behind the teacher boundary (default: --data)");
  at->add_option("--params", at_params, "teacher AFPW (pgd mode)");
  at->add_option("--out", at_out, "output AFPD")->required();
  at->add_option("--norm", at_norm, "L0|L2|Linf");
  at->add_option("--mode", at_mode, "geometry|pgd");
  at->add_option("--epsilon", at_eps, "budget (L2/Linf, L0 magnitude)");
  at->add_option("--d-delta", at_ddelta, "pixel budget (L0)");
  at->add_option("--steps", at_steps, "pgd steps");
  at->add_option("--step-size", at_step, "pgd step size (0: defaults)");
  at->add_option("--target-rule", at_rule, "random_pm1|flip");
  at->add_option("--gamma", at_gamma, "leaky slope for the lambda solve");
  at->add_option("--seed", at_seed, "target seed");

  // ---- check ----
  auto* ck = app.add_subcommand("check", "run theory checks; exit 0 iff pass");
  std::string ck_suite = "all", ck_dataset, ck_teacher, ck_scales, ck_source =
      "gaussian", ck_family = "weak_all", ck_rule = "random";
  double ck_gamma = 0.5, ck_eps = 0.0, ck_t = 1000.0, ck_width = 1.0;
  std::int64_t ck_d = 256, ck_n = 16;
  int ck_trials = 200, ck_nadv = 0, ck_count = 10, ck_seeds = 64;
  std::uint64_t ck_seed = 1;
  ck->add_option("--suite", ck_suite,
                 "orthogonality|natural|uniform|lambda|uniform_vectors|"
                 "subgaussian_vectors|concentration|qnorm|terms|all");
  ck->add_option("--dataset", ck_dataset, "AFPD for dataset-based checks");
  ck->add_option("--teacher-data", ck_teacher, "AFPD behind q for uniform");
  ck->add_option("--gamma", ck_gamma, "leaky slope");
  ck->add_option("--eps", ck_eps, "perturbation budget");
  ck->add_option("--n-adv", ck_nadv, "adversarial sample count");
  ck->add_option("--d", ck_d, "dimension for tail-bound suites");
  ck->add_option("--n", ck_n, "sample count for tail-bound suites");
  ck->add_option("--t", ck_t, "t constant / threshold");
  ck->add_option("--trials", ck_trials, "Monte-Carlo trials");
  ck->add_option("--width", ck_width, "half width of each interval");
  ck->add_option("--count", ck_count, "number of summands");
  ck->add_option("--source", ck_source, "gaussian|rademacher");
  ck->add_option("--scales", ck_scales, "dxN list, e.g. 512x32,1024x64");
  ck->add_option("--family", ck_family, "weak_all|strong_one");
  ck->add_option("--rule", ck_rule, "random|deterministic");
  ck->add_option("--seeds", ck_seeds, "seeds per scale (terms suite)");
  ck->add_option("--seed", ck_seed, "root seed");

  // ---- run / sweep ----
  auto* rn = app.add_subcommand("run", "run the full pipeline once");
  std::string rn_config, rn_outdir;
  std::vector<std::string> rn_sets;
  std::uint64_t rn_seed = 0;
  bool rn_seed_set = false;
  rn->add_option("--config", rn_config, "experiment config JSON");
  rn->add_option("--set", rn_sets, "dotted.path=value override")
      ->take_all();
  rn->add_option("--seed", rn_seed, "root seed")
      ->each([&rn_seed_set](const std::string&) { rn_seed_set = true; });
  rn->add_option("--out-dir", rn_outdir, "results directory");

  auto* sw = app.add_subcommand("sweep", "sweep one axis of the pipeline");
  std::string sw_config, sw_outdir, sw_axis = "n_adv", sw_values;
  std::vector<std::string> sw_sets;
  std::uint64_t sw_seed = 0;
  bool sw_seed_set = false;
  sw->add_option("--config", sw_config, "experiment config JSON");
  sw->add_option("--set", sw_sets, "dotted.path=value override")->take_all();
  sw->add_option("--seed", sw_seed, "root seed")
      ->each([&sw_seed_set](const std::string&) { sw_seed_set = true; });
  sw->add_option("--axis", sw_axis, "d|n_adv");
  sw->add_option("--values", sw_values, "comma-separated values")->required();
  sw->add_option("--out-dir", sw_outdir, "results directory");

  // ---- plot ----
  auto* pl = app.add_subcommand("plot", "render SVG from stored CSVs");
  std::string pl_map, pl_sweep, pl_out;
  pl->add_option("--map-csv", pl_map, "decision-map CSV");
  pl->add_option("--sweep-csv", pl_sweep, "sweep summary CSV");
  pl->add_option("--out", pl_out, "output SVG")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      Source src = source_from_name(gen_source);
      double norm = gen_norm > 0.0
                        ? gen_norm
                        : std::sqrt(static_cast<double>(gen_d)) * gen_scale;
      if (dry_run) {
        std::printf("gen source=%s d=%lld n=%lld seed=%llu scale=%g out=%s\n",
                    gen_source.c_str(), static_cast<long long>(gen_d),
                    static_cast<long long>(gen_n),
                    static_cast<unsigned long long>(gen_seed), gen_scale,
                    gen_out.c_str());
        return 0;
      }
      ensure_writable(gen_out, force);
      Dataset ds = src == Source::orthogonalized
                       ? gen_orthogonal_dataset(gen_d, gen_n, gen_seed, norm)
                       : gen_dataset(src, gen_d, gen_n, gen_seed, gen_scale);
      write_dataset(ds, gen_out);
      if (!gen_csv.empty()) {
        ensure_writable(gen_csv, force);
        write_csv(ds, gen_csv);
      }
      std::printf("wrote %s (N=%lld, d=%lld)\n", gen_out.c_str(),
                  static_cast<long long>(ds.n()),
                  static_cast<long long>(ds.d()));
      return 0;
    }

    if (*tr) {
      Dataset ds = read_dataset(tr_data);
      NetworkConfig net;
      net.d = ds.d();
      net.m = tr_m;
      net.m_plus = tr_mplus;
      net.gamma = tr_gamma;
      net.init_scale = tr_init;
      TrainConfig tc;
      tc.loss_kind = tr_loss == "logistic" ? LossKind::logistic
                                           : LossKind::exponential;
      tc.lr = tr_lr;
      tc.momentum = tr_mom;
      tc.max_epochs = tr_epochs;
      tc.batch = tr_batch;
      tc.seed = tr_seed;
      if (dry_run) {
        std::printf("train data=%s m=%d gamma=%g lr=%g epochs=%d\n",
                    tr_data.c_str(), tr_m, tr_gamma, tr_lr, tr_epochs);
        return 0;
      }
      ensure_writable(tr_params_out, force);
      auto [p, rep] = train(init_params(net, tr_seed), net, ds, tc);
      write_params(p, net, tr_params_out);
      if (!tr_report_out.empty()) {
        ensure_writable(tr_report_out, force);
        write_text_file(tr_report_out, to_json(rep).dump(2) + "\n");
      }
      std::printf("trained %d epochs, final loss %.6g, min margin %.6g\n",
                  rep.epochs_run, rep.final_loss, rep.margin_min);
      return 0;
    }

    if (*at) {
      auto base = std::make_shared<const Dataset>(read_dataset(at_data));
      AttackNorm norm = attack_norm_from_name(at_norm);
      Eigen::VectorXd targets =
          target_labels(target_rule_from_name(at_rule), base->y, base->n(),
                        at_seed);
      if (dry_run) {
        std::printf("attack norm=%s mode=%s eps=%g d_delta=%d on %s\n",
                    at_norm.c_str(), at_mode.c_str(), at_eps, at_ddelta,
                    at_data.c_str());
        return 0;
      }
      ensure_writable(at_out, force);
      AdvDataset adv;
      if (at_mode == "geometry") {
        BoundaryModel teacher = teacher_from_dataset(
            at_teacher.empty() ? at_data : at_teacher, at_gamma, 1, 1);
        if (norm == AttackNorm::L2) {
          adv = geometry_l2(base, teacher, at_eps, targets);
        } else if (norm == AttackNorm::Linf) {
          adv = geometry_linf(base, teacher, at_eps, targets);
        } else {
          adv = geometry_l0(base, teacher, at_ddelta, targets, at_eps);
        }
      } else {
        if (at_params.empty()) {
          throw std::runtime_error("pgd mode needs --params");
        }
        auto [p, net] = read_params(at_params);
        AttackSpec spec;
        spec.norm = norm;
        spec.mode = AttackMode::pgd;
        spec.epsilon = at_eps;
        spec.d_delta = at_ddelta;
        spec.steps = at_steps > 0 ? at_steps
                                  : (norm == AttackNorm::L0 ? at_ddelta : 100);
        spec.step_size = at_step;
        spec.seed = at_seed;
        adv = pgd(p, net, base, spec, targets);
      }
      adv.spec.seed = at_seed;
      AdvFileContent content;
      content.data = adv.as_dataset();
      content.data.y = base->y;  // base labels in the y slot
      content.targets = adv.targets;
      content.provenance = adv.provenance_id();
      content.support = adv.support;
      write_adv_file(content, at_out);
      // Budget compliance summary.
      double worst_l2 = 0.0, worst_linf = 0.0;
      std::size_t worst_l0 = 0;
      for (Eigen::Index i = 0; i < adv.n(); ++i) {
        worst_l2 = std::max(worst_l2, adv.eta.row(i).norm());
        worst_linf =
            std::max(worst_linf, adv.eta.row(i).lpNorm<Eigen::Infinity>());
        worst_l0 = std::max<std::size_t>(
            worst_l0, static_cast<std::size_t>(
                          (adv.eta.row(i).array() != 0.0).count()));
      }
      std::printf(
          "wrote %s: N=%lld, max|eta|_2=%.6g, max|eta|_inf=%.6g, "
          "max|eta|_0=%zu, flagged=%zu\n",
          at_out.c_str(), static_cast<long long>(adv.n()), worst_l2,
          worst_linf, worst_l0, adv.flagged.size());
      return 0;
    }

    if (*ck) {
      bool all_pass = true;
      auto note = [&all_pass](const ConditionReport& r) {
        all_pass = all_pass && r.pass;
        print_report(r);
      };
      bool want_all = ck_suite == "all";

      if (ck_suite == "orthogonality" || ck_suite == "natural" ||
          ck_suite == "lambda" || ck_suite == "uniform" ||
          (want_all && !ck_dataset.empty())) {
        if (ck_dataset.empty()) {
          throw std::runtime_error("this suite needs --dataset");
        }
        Dataset ds = read_dataset(ck_dataset);
        OrthoStats stats = ortho_stats(ds);
        if (ck_suite == "orthogonality" || want_all) {
          note(check_orthogonality_condition(stats, ds.n(), ck_gamma));
        }
        if (ck_suite == "natural" || (want_all && ck_eps > 0.0)) {
          note(check_natural_condition(stats, ds.n(), ck_gamma, ck_eps));
        }
        if (ck_suite == "lambda" || want_all) {
          Eigen::VectorXd lambda = solve_lambda(ds, ck_gamma, 1, 1);
          note(check_lambda_bounds(lambda, stats, ck_gamma));
        }
        if (ck_suite == "uniform") {
          Eigen::VectorXd q_dir;
          if (!ck_teacher.empty()) {
            BoundaryModel teacher =
                teacher_from_dataset(ck_teacher, ck_gamma, 1, 1);
            q_dir = teacher.gradient().normalized();
          } else {
            Rng qr = Rng(ck_seed).fork("qdir");
            q_dir.resize(ds.d());
            for (Eigen::Index j = 0; j < ds.d(); ++j) q_dir[j] = qr.gaussian();
            q_dir.normalize();
          }
          int nadv = ck_nadv > 0 ? ck_nadv : static_cast<int>(ds.n());
          UniformConditionReport ur =
              check_uniform_condition(ds, q_dir, nadv, ck_eps, ck_gamma);
          note(ur.norm_bounds);
          note(ur.cross_products);
          note(ur.eta_alignment);
          note(ur.main);
          note(ur.conjunction);
        }
      }

      auto check_rates = [&](const ProbeTable& table, double slack) {
        for (const auto& row : table.rows) {
          bool ok = row.value >= row.reference - slack;
          all_pass = all_pass && ok;
          std::printf("  [%s] %-24s value=%.6g bound=%.6g (d=%g n=%g)\n",
                      ok ? "PASS" : "FAIL", row.statistic.c_str(), row.value,
                      row.reference, row.d, row.n);
        }
      };

      if (ck_suite == "uniform_vectors" || want_all) {
        check_rates(verify_uniform_vector_bounds(ck_d, ck_n, ck_t, ck_trials,
                                                ck_seed),
                    0.03);
      }
      if (ck_suite == "subgaussian_vectors" || want_all) {
        check_rates(
            verify_subgaussian_vector_bounds(
                ck_d, ck_n, ck_trials, source_from_name(ck_source), ck_seed),
            0.03);
      }
      if (ck_suite == "concentration" || want_all) {
        Eigen::VectorXd a = Eigen::VectorXd::Constant(ck_count, -ck_width);
        Eigen::VectorXd b = Eigen::VectorXd::Constant(ck_count, ck_width);
        double t = ck_suite == "concentration" ? ck_t : 10.0;
        ProbeTable table = verify_concentration(a, b, t, ck_trials, ck_seed);
        for (const auto& row : table.rows) {
          bool ok = row.value <= row.reference;
          all_pass = all_pass && ok;
          std::printf("  [%s] %-24s rate=%.6g allowance=%.6g\n",
                      ok ? "PASS" : "FAIL", row.statistic.c_str(), row.value,
                      row.reference);
        }
      }
      if (ck_suite == "qnorm" || (want_all && !ck_scales.empty())) {
        auto scales = ck_scales.empty()
                          ? std::vector<std::pair<Eigen::Index, Eigen::Index>>{
                                {512, 32}, {1024, 64}, {2048, 128}}
                          : parse_scales(ck_scales);
        ProbeTable table = growth_probe_qnorm(scales, ck_gamma, ck_seed);
        double lo = 1e300, hi = 0.0;
        for (const auto& row : table.rows) {
          lo = std::min(lo, row.normalized_ratio);
          hi = std::max(hi, row.normalized_ratio);
          std::printf("  q_norm d=%g n=%g ratio=%.6g\n", row.d, row.n,
                      row.normalized_ratio);
        }
        bool ok = hi / lo <= 4.0;
        all_pass = all_pass && ok;
        std::printf("  [%s] q_norm factor band %.6g\n", ok ? "PASS" : "FAIL",
                    hi / lo);
      }
      if (ck_suite == "terms") {
        auto scales = parse_scales(ck_scales.empty() ? "1024x64,1024x128"
                                                     : ck_scales);
        ProbeTable table = term_magnitude_probe(
            scales,
            ck_family == "strong_one" ? ProbeFamily::strong_one
                                      : ProbeFamily::weak_all,
            ck_rule == "deterministic" ? LabelRule::deterministic
                                       : LabelRule::random,
            ck_gamma, ck_seed, ck_seeds);
        std::printf("%s", table.to_csv().c_str());
      }
      std::printf("%s\n", all_pass ? "ALL CHECKS PASSED" : "CHECKS FAILED");
      return all_pass ? 0 : 1;
    }

    if (*rn) {
      ExperimentConfig cfg =
          resolve_config(rn_config, rn_sets, rn_seed, rn_seed_set);
      std::printf("resolved config:\n%s\n", config_to_json(cfg).dump(2).c_str());
      if (dry_run) return 0;
      ExperimentResult res = run_pipeline(cfg);
      std::printf(
          "boundary=%s agreement=%.4f accuracy=%.4f heldout=%.4f "
          "eps=%.4g wall=%.1fs\n",
          res.boundary_mode.c_str(), res.agreement_vs_standard,
          res.accuracy_on_natural, res.accuracy_heldout, res.attack_epsilon,
          res.wall_time_sec);
      for (const auto& r : res.condition_reports) print_report(r);
      if (!rn_outdir.empty()) {
        write_run_directory(rn_outdir + "/" + cfg.name, cfg, res, force);
      }
      return 0;
    }

    if (*sw) {
      ExperimentConfig cfg =
          resolve_config(sw_config, sw_sets, sw_seed, sw_seed_set);
      std::printf("resolved config:\n%s\n", config_to_json(cfg).dump(2).c_str());
      SweepAxis axis = sweep_axis_from_name(sw_axis);
      std::vector<double> values = parse_values(sw_values);
      if (dry_run) return 0;
      SweepOptions opts;
      opts.threads = threads;
      std::vector<SweepCell> cells = sweep(cfg, axis, values, opts);
      std::string csv = sweep_summary_csv(cells, axis, cfg.seed);
      std::printf("%s", csv.c_str());
      bool any_fail = false;
      for (const auto& c : cells) any_fail = any_fail || !c.ok;
      if (!sw_outdir.empty()) {
        fs::create_directories(sw_outdir + "/" + cfg.name);
        std::string path = sw_outdir + "/" + cfg.name + "/summary.csv";
        ensure_writable(path, force);
        write_text_file(path, csv);
      }
      return any_fail ? 1 : 0;
    }

    if (*pl) {
      ensure_writable(pl_out, force);
      if (!pl_map.empty()) {
        require_file(pl_map);
        std::ifstream in(pl_map);
        std::string line;
        std::getline(in, line);  // header
        std::vector<std::array<double, 3>> rows;
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          std::stringstream ss(line);
          std::string a, b, s;
          std::getline(ss, a, ',');
          std::getline(ss, b, ',');
          std::getline(ss, s, ',');
          rows.push_back({std::stod(a), std::stod(b), std::stod(s)});
        }
        int res = static_cast<int>(std::lround(std::sqrt(
            static_cast<double>(rows.size()))));
        if (res * res != static_cast<int>(rows.size())) {
          throw std::runtime_error("map CSV is not a square grid");
        }
        DecisionMap map;
        map.resolution = res;
        map.signs.resize(res, res);
        map.alphas.resize(res);
        map.betas.resize(res);
        double hw = 0.0;
        for (int i = 0; i < res; ++i) {
          for (int j = 0; j < res; ++j) {
            const auto& r = rows[static_cast<std::size_t>(i * res + j)];
            map.alphas[i] = r[0];
            map.betas[j] = r[1];
            map.signs(i, j) = static_cast<int>(r[2]);
            hw = std::max({hw, std::abs(r[0]), std::abs(r[1])});
          }
        }
        map.half_width = hw > 0.0 ? hw : 1.0;
        write_text_file(pl_out, decision_map_svg(map));
      } else if (!pl_sweep.empty()) {
        require_file(pl_sweep);
        std::ifstream in(pl_sweep);
        std::string line;
        std::getline(in, line);  // header
        SweepSeries acc{"accuracy", {}, {}, "#1f77b4", false};
        SweepSeries agr{"agreement", {}, {}, "#ff7f0e", true};
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          std::stringstream ss(line);
          std::vector<std::string> cols;
          std::string tok;
          while (std::getline(ss, tok, ',')) cols.push_back(tok);
          if (cols.size() < 5 || cols[3].empty()) continue;
          double x = std::stod(cols[1]);
          acc.xs.push_back(x);
          acc.ys.push_back(std::stod(cols[3]));
          agr.xs.push_back(x);
          agr.ys.push_back(std::stod(cols[4]));
        }
        write_text_file(pl_out, sweep_curves_svg({acc, agr}, "axis value",
                                                 "rate"));
      } else {
        throw std::runtime_error("plot needs --map-csv or --sweep-csv");
      }
      std::printf("wrote %s\n", pl_out.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
