#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "advfeat/boundary.hpp"
#include "advfeat/dataset.hpp"
#include "advfeat/net.hpp"

namespace advfeat {

enum class AttackNorm { L0, L2, Linf };
enum class AttackMode { geometry, pgd };
enum class TargetRule { random_pm1, flip, next_label_analogue, explicit_vec };

const char* attack_norm_name(AttackNorm n);
AttackNorm attack_norm_from_name(const std::string& s);
const char* target_rule_name(TargetRule r);
TargetRule target_rule_from_name(const std::string& s);

struct AttackSpec {
  AttackNorm norm = AttackNorm::L2;
  AttackMode mode = AttackMode::geometry;
  double epsilon = -1.0;  // L2 / Linf budget; < 0 picks scale-aware defaults
  int d_delta = 0;        // L0 pixel budget; 0 picks 5% of d
  int steps = 100;
  double step_size = 0.0;  // 0: Linf/L2 use epsilon/5, L0 uses 0.3
  TargetRule target_rule = TargetRule::random_pm1;
  std::uint64_t seed = 0;
  // Attack the exponential-loss gradient instead of the raw score; the
  // normalized directions coincide, exposed to verify that numerically.
  bool pgd_on_loss = false;

  void validate(Eigen::Index d) const;
  double effective_step() const;
};

struct AdvDataset {
  Eigen::MatrixXd Xadv;
  Eigen::VectorXd targets;
  Eigen::MatrixXd eta;
  std::shared_ptr<const Dataset> base;
  std::vector<std::vector<Eigen::Index>> support;  // L0 only
  std::vector<Eigen::Index> flagged;  // pgd rows with a zero starting gradient
  AttackSpec spec;

  Eigen::Index n() const { return Xadv.rows(); }
  Eigen::Index d() const { return Xadv.cols(); }
  // (Xadv, targets) as a trainable dataset.
  Dataset as_dataset() const;
  std::uint64_t provenance_id() const;
};

Eigen::VectorXd target_labels(TargetRule rule,
                              const Eigen::VectorXd& base_labels,
                              Eigen::Index n, std::uint64_t seed,
                              const Eigen::VectorXd* explicit_vec = nullptr);

// eta_n = eps * target_n * g / |g| where g is the teacher boundary gradient
// (q for a lambda_exact teacher, v - u for an empirical one).
AdvDataset geometry_l2(std::shared_ptr<const Dataset> base,
                       const BoundaryModel& teacher, double eps,
                       const Eigen::VectorXd& targets);

// Shared top-d_delta mask over |g|, ties toward the smaller index;
// eta_n = eps * target_n * (g & mask) / |g & mask|.
AdvDataset geometry_l0(std::shared_ptr<const Dataset> base,
                       const BoundaryModel& teacher, int d_delta,
                       const Eigen::VectorXd& targets, double eps);

// eta_n = eps * target_n * sgn(g).
AdvDataset geometry_linf(std::shared_ptr<const Dataset> base,
                         const BoundaryModel& teacher, double eps,
                         const Eigen::VectorXd& targets);

// Projected gradient ascent of target_n * f(x) against the network itself.
AdvDataset pgd(const NetworkParams& p, const NetworkConfig& cfg,
               std::shared_ptr<const Dataset> base, const AttackSpec& spec,
               const Eigen::VectorXd& targets);

// Class-conditional normalized input-gradient directions of a (converged or
// built) two-row network: the gradient of f inside the positive-class and
// negative-class activation regions.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gradient_directions(
    const NetworkParams& p, const NetworkConfig& cfg);

}  // namespace advfeat
