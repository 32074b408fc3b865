#include "advfeat/attack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace advfeat {

const char* attack_norm_name(AttackNorm n) {
  switch (n) {
    case AttackNorm::L0: return "L0";
    case AttackNorm::L2: return "L2";
    case AttackNorm::Linf: return "Linf";
  }
  return "unknown";
}

AttackNorm attack_norm_from_name(const std::string& s) {
  if (s == "L0" || s == "l0") return AttackNorm::L0;
  if (s == "L2" || s == "l2") return AttackNorm::L2;
  if (s == "Linf" || s == "linf") return AttackNorm::Linf;
  throw std::invalid_argument("unknown attack norm: " + s);
}

const char* target_rule_name(TargetRule r) {
  switch (r) {
    case TargetRule::random_pm1: return "random_pm1";
    case TargetRule::flip: return "flip";
    case TargetRule::next_label_analogue: return "next_label_analogue";
    case TargetRule::explicit_vec: return "explicit";
  }
  return "unknown";
}

TargetRule target_rule_from_name(const std::string& s) {
  if (s == "random_pm1" || s == "random") return TargetRule::random_pm1;
  if (s == "flip") return TargetRule::flip;
  if (s == "next_label_analogue") return TargetRule::next_label_analogue;
  if (s == "explicit") return TargetRule::explicit_vec;
  throw std::invalid_argument("unknown target rule: " + s);
}

void AttackSpec::validate(Eigen::Index d) const {
  if (norm == AttackNorm::L0) {
    if (d_delta < 1) throw std::invalid_argument("L0 attack needs d_delta");
    if (d_delta > d) throw std::invalid_argument("d_delta cannot exceed d");
  } else {
    if (!(epsilon > 0.0)) {
      throw std::invalid_argument("L2/Linf attack needs epsilon > 0");
    }
    if (d_delta != 0) {
      throw std::invalid_argument("d_delta only applies to the L0 norm");
    }
  }
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
}

double AttackSpec::effective_step() const {
  if (step_size > 0.0) return step_size;
  return norm == AttackNorm::L0 ? 0.3 : epsilon / 5.0;
}

Dataset AdvDataset::as_dataset() const {
  Dataset out;
  out.X = Xadv;
  out.y = targets;
  out.source = base ? base->source : Source::file;
  out.seed = spec.seed;
  out.scale = base ? base->scale : 1.0;
  return out;
}

std::uint64_t AdvDataset::provenance_id() const {
  // Stable fingerprint of (base identity, attack spec).
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  if (base) {
    mix(base->seed);
    mix(static_cast<std::uint64_t>(base->source));
    mix(static_cast<std::uint64_t>(base->n()));
    mix(static_cast<std::uint64_t>(base->d()));
  }
  mix(static_cast<std::uint64_t>(spec.norm));
  mix(static_cast<std::uint64_t>(spec.mode));
  mix(std::bit_cast<std::uint64_t>(spec.epsilon));
  mix(static_cast<std::uint64_t>(spec.d_delta));
  mix(static_cast<std::uint64_t>(spec.steps));
  mix(spec.seed);
  return h;
}

Eigen::VectorXd target_labels(TargetRule rule,
                              const Eigen::VectorXd& base_labels,
                              Eigen::Index n, std::uint64_t seed,
                              const Eigen::VectorXd* explicit_vec) {
  switch (rule) {
    case TargetRule::random_pm1: {
      Rng rng = Rng(seed).fork("targets");
      Eigen::VectorXd t(n);
      for (Eigen::Index i = 0; i < n; ++i) t[i] = rng.rademacher();
      return t;
    }
    case TargetRule::flip:
    case TargetRule::next_label_analogue:
      // In the binary setting "the next label after y" is -y.
      if (base_labels.size() != n) {
        throw std::invalid_argument("flip rule needs n base labels");
      }
      return -base_labels;
    case TargetRule::explicit_vec:
      if (explicit_vec == nullptr || explicit_vec->size() != n) {
        throw std::invalid_argument("explicit target vector length mismatch");
      }
      return *explicit_vec;
  }
  throw std::invalid_argument("unknown target rule");
}

namespace {

void check_targets(const Eigen::VectorXd& targets, Eigen::Index n) {
  if (targets.size() != n) {
    throw std::invalid_argument("target count mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (targets[i] != 1.0 && targets[i] != -1.0) {
      throw std::invalid_argument("targets must be exactly +1 or -1");
    }
  }
}

AdvDataset from_direction(std::shared_ptr<const Dataset> base,
                          const Eigen::VectorXd& direction, double eps,
                          const Eigen::VectorXd& targets, AttackSpec spec) {
  AdvDataset adv;
  adv.base = base;
  adv.targets = targets;
  adv.spec = spec;
  adv.eta.resize(base->n(), base->d());
  for (Eigen::Index i = 0; i < base->n(); ++i) {
    adv.eta.row(i) = eps * targets[i] * direction.transpose();
  }
  adv.Xadv = base->X + adv.eta;
  return adv;
}

}  // namespace

AdvDataset geometry_l2(std::shared_ptr<const Dataset> base,
                       const BoundaryModel& teacher, double eps,
                       const Eigen::VectorXd& targets) {
  check_targets(targets, base->n());
  Eigen::VectorXd g = teacher.gradient();
  double gn = g.norm();
  if (gn <= 1e-12) throw std::invalid_argument("degenerate boundary gradient");
  AttackSpec spec;
  spec.norm = AttackNorm::L2;
  spec.mode = AttackMode::geometry;
  spec.epsilon = eps;
  return from_direction(std::move(base), g / gn, eps, targets, spec);
}

AdvDataset geometry_l0(std::shared_ptr<const Dataset> base,
                       const BoundaryModel& teacher, int d_delta,
                       const Eigen::VectorXd& targets, double eps) {
  check_targets(targets, base->n());
  if (d_delta < 1 || d_delta > base->d()) {
    throw std::invalid_argument("d_delta must lie in [1, d]");
  }
  Eigen::VectorXd g = teacher.gradient();

  // The boundary gradient does not depend on the sample, so one mask is
  // shared by every row: the d_delta largest |g_i|, ties to the smaller
  // index.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(g.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&g](Eigen::Index a,
                                                Eigen::Index b) {
    return std::abs(g[a]) > std::abs(g[b]);
  });
  std::vector<Eigen::Index> mask(idx.begin(), idx.begin() + d_delta);
  std::sort(mask.begin(), mask.end());

  Eigen::VectorXd gm = Eigen::VectorXd::Zero(g.size());
  for (Eigen::Index i : mask) gm[i] = g[i];
  double gn = gm.norm();
  if (gn <= 1e-12) throw std::invalid_argument("masked gradient is zero");

  AttackSpec spec;
  spec.norm = AttackNorm::L0;
  spec.mode = AttackMode::geometry;
  spec.d_delta = d_delta;
  spec.epsilon = eps;
  AdvDataset adv = from_direction(std::move(base), gm / gn, eps, targets,
                                  spec);
  adv.support.assign(static_cast<std::size_t>(adv.n()), mask);
  return adv;
}

AdvDataset geometry_linf(std::shared_ptr<const Dataset> base,
                         const BoundaryModel& teacher, double eps,
                         const Eigen::VectorXd& targets) {
  check_targets(targets, base->n());
  Eigen::VectorXd g = teacher.gradient();
  if (g.lpNorm<Eigen::Infinity>() <= 1e-12) {
    throw std::invalid_argument("degenerate boundary gradient");
  }
  Eigen::VectorXd sgn = g.unaryExpr(
      [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
  AttackSpec spec;
  spec.norm = AttackNorm::Linf;
  spec.mode = AttackMode::geometry;
  spec.epsilon = eps;
  AdvDataset adv;
  adv.base = base;
  adv.targets = targets;
  adv.spec = spec;
  adv.eta.resize(base->n(), base->d());
  for (Eigen::Index i = 0; i < base->n(); ++i) {
    adv.eta.row(i) = eps * targets[i] * sgn.transpose();
  }
  adv.Xadv = base->X + adv.eta;
  return adv;
}

AdvDataset pgd(const NetworkParams& p, const NetworkConfig& cfg,
               std::shared_ptr<const Dataset> base, const AttackSpec& spec,
               const Eigen::VectorXd& targets) {
  if (spec.mode != AttackMode::pgd) {
    throw std::invalid_argument("spec.mode must be pgd");
  }
  spec.validate(base->d());
  check_targets(targets, base->n());

  AdvDataset adv;
  adv.base = base;
  adv.targets = targets;
  adv.spec = spec;
  adv.Xadv = base->X;
  adv.eta = Eigen::MatrixXd::Zero(base->n(), base->d());
  if (spec.norm == AttackNorm::L0) {
    adv.support.assign(static_cast<std::size_t>(base->n()), {});
  }

  const double step = spec.effective_step();
  for (Eigen::Index i = 0; i < base->n(); ++i) {
    Eigen::VectorXd x0 = base->X.row(i);
    Eigen::VectorXd x = x0;
    double t = targets[i];

    // Objective: raise t * f(x).  With the exponential loss toward the
    // target the normalized gradient is the same direction.
    auto objective_gradient = [&](const Eigen::VectorXd& at) {
      Eigen::VectorXd g = grad_input(p, cfg, at);
      if (spec.pgd_on_loss) {
        // -grad of exp(-t f(x)) is exp(-t f) * t * grad f
        g *= std::exp(-t * forward(p, cfg, at));
      }
      return Eigen::VectorXd(t * g);
    };

    Eigen::VectorXd g0 = objective_gradient(x0);
    if (g0.norm() <= 1e-300) {
      adv.flagged.push_back(i);
      continue;
    }

    if (spec.norm == AttackNorm::L2) {
      for (int s = 0; s < spec.steps; ++s) {
        Eigen::VectorXd g = objective_gradient(x);
        double gn = g.norm();
        if (gn <= 1e-300) break;
        x += step * g / gn;
        Eigen::VectorXd delta = x - x0;
        double dn = delta.norm();
        if (dn > spec.epsilon) x = x0 + delta * (spec.epsilon / dn);
      }
    } else if (spec.norm == AttackNorm::Linf) {
      for (int s = 0; s < spec.steps; ++s) {
        Eigen::VectorXd g = objective_gradient(x);
        for (Eigen::Index j = 0; j < x.size(); ++j) {
          double gs = g[j] > 0.0 ? 1.0 : (g[j] < 0.0 ? -1.0 : 0.0);
          x[j] += step * gs;
          x[j] = std::clamp(x[j], x0[j] - spec.epsilon, x0[j] + spec.epsilon);
        }
      }
    } else {
      // L0: grow the unmasked set one pixel per round, step on the unmasked
      // coordinates, keep the iterate with the best objective.
      std::vector<bool> unmasked(static_cast<std::size_t>(base->d()), false);
      Eigen::VectorXd best_x = x;
      double best_obj = t * forward(p, cfg, x);
      for (int s = 0; s < spec.steps; ++s) {
        Eigen::VectorXd g = objective_gradient(x);
        if (static_cast<int>(std::count(unmasked.begin(), unmasked.end(),
                                        true)) < spec.d_delta) {
          Eigen::Index pick = -1;
          double best_mag = -1.0;
          for (Eigen::Index j = 0; j < g.size(); ++j) {
            if (unmasked[static_cast<std::size_t>(j)]) continue;
            double mag = std::abs(g[j]);
            if (mag > best_mag) {
              best_mag = mag;
              pick = j;
            }
          }
          if (pick >= 0) unmasked[static_cast<std::size_t>(pick)] = true;
        }
        Eigen::VectorXd gm = Eigen::VectorXd::Zero(g.size());
        for (Eigen::Index j = 0; j < g.size(); ++j) {
          if (unmasked[static_cast<std::size_t>(j)]) gm[j] = g[j];
        }
        double gn = gm.norm();
        if (gn <= 1e-300) break;
        x += step * gm / gn;
        double obj = t * forward(p, cfg, x);
        if (obj > best_obj) {
          best_obj = obj;
          best_x = x;
        }
      }
      x = best_x;
      auto& sup = adv.support[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x[j] != x0[j]) sup.push_back(j);
      }
    }

    adv.Xadv.row(i) = x;
    adv.eta.row(i) = x - x0;
  }
  return adv;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gradient_directions(
    const NetworkParams& p, const NetworkConfig& cfg) {
  auto [v, u] = extract_vu(p, cfg);
  double mp = static_cast<double>(cfg.mplus());
  double mm = static_cast<double>(cfg.mminus());
  double g = cfg.gamma;
  // Inside the positive-class region <v,x> > 0 > <u,x> the network is
  // (1/sqrt(m)) (m_+ <v,x> - gamma m_- <u,x>); symmetric for the negative
  // region.
  Eigen::VectorXd sp = mp * v - g * mm * u;
  Eigen::VectorXd sm = g * mp * v - mm * u;
  double np = sp.norm();
  double nm = sm.norm();
  if (np <= 1e-300 || nm <= 1e-300) {
    throw std::invalid_argument("degenerate gradient direction");
  }
  return {sp / np, sm / nm};
}

}  // namespace advfeat
