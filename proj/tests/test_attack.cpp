#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "advfeat/attack.hpp"

using namespace advfeat;

namespace {

std::shared_ptr<const Dataset> two_sample_line() {
  Dataset ds;
  ds.X.resize(2, 1);
  ds.X << 1, -1;
  ds.y.resize(2);
  ds.y << 1, -1;
  return std::make_shared<const Dataset>(std::move(ds));
}

BoundaryModel model_with_gradient(const Eigen::VectorXd& g) {
  return BoundaryModel::empirical(g, Eigen::VectorXd::Zero(g.size()));
}

}  // namespace

TEST_CASE("target label rules") {
  Eigen::VectorXd y(3);
  y << 1, -1, 1;
  Eigen::VectorXd flipped = target_labels(TargetRule::flip, y, 3, 0);
  CHECK(flipped[0] == -1);
  CHECK(flipped[1] == 1);
  CHECK(flipped[2] == -1);
  CHECK(target_labels(TargetRule::next_label_analogue, y, 3, 0) == flipped);

  Eigen::VectorXd r1 = target_labels(TargetRule::random_pm1, y, 3, 5);
  Eigen::VectorXd r2 = target_labels(TargetRule::random_pm1, y, 3, 5);
  CHECK(r1 == r2);

  Eigen::VectorXd e(2);
  CHECK_THROWS_AS(target_labels(TargetRule::explicit_vec, y, 3, 0, &e),
                  std::invalid_argument);
}

TEST_CASE("random targets are balanced over seeds") {
  // Mean of 10,000 signs is within 0.03 of zero for almost all seeds
  // (0.03 is three binomial sigmas).
  int hits = 0;
  const int trials = 200;
  for (int s = 0; s < trials; ++s) {
    Eigen::VectorXd t = target_labels(TargetRule::random_pm1,
                                      Eigen::VectorXd(), 10000,
                                      static_cast<std::uint64_t>(s));
    if (std::abs(t.mean()) <= 0.03) ++hits;
  }
  CHECK(hits >= 194);  // 0.97 of trials
}

TEST_CASE("geometry L2 on the two-sample line") {
  auto base = two_sample_line();
  Eigen::VectorXd lambda = solve_lambda(*base, 0.5, 1, 1);
  BoundaryModel teacher = BoundaryModel::exact(base, lambda);
  // q = 16/9, so the unit direction is +1.
  CHECK(teacher.gradient()[0] == doctest::Approx(16.0 / 9.0).epsilon(1e-12));

  Eigen::VectorXd targets(2);
  targets << -1, 1;
  AdvDataset adv = geometry_l2(base, teacher, 0.3, targets);
  CHECK(adv.Xadv(0, 0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(adv.Xadv(1, 0) == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("geometry L2 budget and symmetry") {
  auto base = std::make_shared<const Dataset>(
      gen_orthogonal_dataset(64, 8, 3, std::sqrt(64.0)));
  Eigen::VectorXd lambda = solve_lambda(*base, 0.5, 1, 1);
  BoundaryModel teacher = BoundaryModel::exact(base, lambda);

  Eigen::VectorXd plus = Eigen::VectorXd::Ones(8);
  AdvDataset a = geometry_l2(base, teacher, 1.7, plus);
  AdvDataset b = geometry_l2(base, teacher, 1.7, -plus);
  CHECK((a.eta + b.eta).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd resum = base->X + a.eta;
  CHECK(a.Xadv == resum);
  for (Eigen::Index i = 0; i < 8; ++i) {
    CHECK(std::abs(a.eta.row(i).norm() - 1.7) <= 1.7 * 1e-12);
  }

  AdvDataset zero = geometry_l2(base, teacher, 0.0, plus);
  CHECK(zero.Xadv == base->X);
}

TEST_CASE("geometry L0 mask selection and budgets") {
  Dataset raw;
  raw.X.resize(2, 3);
  raw.X << 1, 0, 0, 0, 1, 0;
  raw.y.resize(2);
  raw.y << 1, -1;
  auto base = std::make_shared<const Dataset>(std::move(raw));

  Eigen::VectorXd q(3);
  q << 3, -1, 2;
  BoundaryModel teacher = model_with_gradient(q);
  Eigen::VectorXd targets(2);
  targets << 1, -1;

  AdvDataset adv = geometry_l0(base, teacher, 2, targets, 0.5);
  for (const auto& s : adv.support) {
    CHECK(s == std::vector<Eigen::Index>{0, 2});
  }
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(adv.eta(i, 1) == 0.0);
    CHECK((adv.eta.row(i).array() != 0.0).count() <= 2);
    CHECK(adv.eta.row(i).norm() == doctest::Approx(0.5).epsilon(1e-12));
  }

  // Tie between |q_0| and |q_1| goes to the smaller index.
  Eigen::VectorXd tie(3);
  tie << 1, -1, 2;
  AdvDataset adv_tie =
      geometry_l0(base, model_with_gradient(tie), 2, targets, 0.5);
  CHECK(adv_tie.support[0] == std::vector<Eigen::Index>{0, 2});

  // Full mask reproduces the L2 attack.
  AdvDataset full = geometry_l0(base, teacher, 3, targets, 0.5);
  AdvDataset l2 = geometry_l2(base, teacher, 0.5, targets);
  CHECK((full.eta - l2.eta).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("geometry Linf signs and Hoelder alignment") {
  Dataset raw;
  raw.X.resize(1, 2);
  raw.X << 0.5, 0.5;
  raw.y.resize(1);
  raw.y << 1;
  auto base = std::make_shared<const Dataset>(std::move(raw));

  Eigen::VectorXd q(2);
  q << 0.2, -5.0;
  BoundaryModel teacher = model_with_gradient(q);
  Eigen::VectorXd plus = Eigen::VectorXd::Ones(1);
  AdvDataset adv = geometry_linf(base, teacher, 0.25, plus);
  CHECK(adv.eta(0, 0) == doctest::Approx(0.25));
  CHECK(adv.eta(0, 1) == doctest::Approx(-0.25));
  CHECK(adv.eta.row(0).lpNorm<Eigen::Infinity>() ==
        doctest::Approx(0.25));
  // <eta, q> = eps |q|_1 at target +1.
  CHECK(adv.eta.row(0).dot(q) ==
        doctest::Approx(0.25 * q.cwiseAbs().sum()).epsilon(1e-12));

  // Zero gradient coordinates stay untouched.
  Eigen::VectorXd qz(2);
  qz << 0.0, 1.0;
  AdvDataset advz = geometry_linf(base, model_with_gradient(qz), 0.25, plus);
  CHECK(advz.eta(0, 0) == 0.0);
}

TEST_CASE("pgd leaves the base untouched at zero steps") {
  auto base = std::make_shared<const Dataset>(
      gen_dataset(Source::uniform, 8, 3, 2, 1.0));
  NetworkConfig cfg;
  cfg.d = 8;
  cfg.m = 4;
  cfg.init_scale = 0.1;
  NetworkParams p = init_params(cfg, 3);
  AttackSpec spec;
  spec.mode = AttackMode::pgd;
  spec.norm = AttackNorm::L2;
  spec.epsilon = 0.5;
  spec.steps = 0;
  AdvDataset adv = pgd(p, cfg, base, spec, Eigen::VectorXd::Ones(3));
  CHECK(adv.Xadv == base->X);
}

TEST_CASE("pgd on an effectively linear network matches geometry") {
  // Antipodal two-sample instance: the built network is globally linear, so
  // every PGD step is collinear with the boundary gradient.
  Dataset raw;
  raw.X.resize(2, 4);
  raw.X << 1, 2, -1, 0.5, -1, -2, 1, -0.5;
  raw.y.resize(2);
  raw.y << 1, -1;
  auto base = std::make_shared<const Dataset>(std::move(raw));

  NetworkConfig cfg;
  cfg.d = 4;
  cfg.m = 8;
  cfg.gamma = 0.5;
  Eigen::VectorXd lambda = solve_lambda(*base, cfg.gamma, 4, 4);
  BoundaryModel teacher = BoundaryModel::exact(base, lambda);
  NetworkParams p = build_wstd(*base, lambda, cfg);

  Eigen::VectorXd targets(2);
  targets << -1, 1;
  double eps = 0.4;

  AttackSpec spec;
  spec.mode = AttackMode::pgd;
  spec.norm = AttackNorm::L2;
  spec.epsilon = eps;
  spec.steps = 100;
  AdvDataset adv_pgd = pgd(p, cfg, base, spec, targets);
  AdvDataset adv_geo = geometry_l2(base, teacher, eps, targets);

  for (Eigen::Index i = 0; i < 2; ++i) {
    double cosine = adv_pgd.eta.row(i).dot(adv_geo.eta.row(i)) /
                    (adv_pgd.eta.row(i).norm() * adv_geo.eta.row(i).norm());
    CHECK(cosine >= 0.999);
    CHECK(adv_pgd.eta.row(i).norm() == doctest::Approx(eps).epsilon(1e-9));
  }

  // Loss-mode gradients are parallel to score-mode gradients.
  AttackSpec loss_spec = spec;
  loss_spec.pgd_on_loss = true;
  AdvDataset adv_loss = pgd(p, cfg, base, loss_spec, targets);
  for (Eigen::Index i = 0; i < 2; ++i) {
    double cosine = adv_loss.eta.row(i).dot(adv_pgd.eta.row(i)) /
                    (adv_loss.eta.row(i).norm() * adv_pgd.eta.row(i).norm());
    CHECK(cosine >= 0.999999);
  }
}

TEST_CASE("pgd box and sparsity budgets hold exactly") {
  auto base = std::make_shared<const Dataset>(
      gen_dataset(Source::uniform, 16, 4, 9, 1.0));
  NetworkConfig cfg;
  cfg.d = 16;
  cfg.m = 8;
  cfg.init_scale = 0.5;
  NetworkParams p = init_params(cfg, 4);
  Eigen::VectorXd targets(4);
  targets << 1, -1, 1, -1;

  AttackSpec linf;
  linf.mode = AttackMode::pgd;
  linf.norm = AttackNorm::Linf;
  linf.epsilon = 0.1;
  linf.steps = 40;
  AdvDataset a = pgd(p, cfg, base, linf, targets);
  CHECK((a.Xadv - base->X).cwiseAbs().maxCoeff() <= 0.1 + 1e-12);

  AttackSpec l0;
  l0.mode = AttackMode::pgd;
  l0.norm = AttackNorm::L0;
  l0.d_delta = 3;
  l0.steps = 3;
  AdvDataset b = pgd(p, cfg, base, l0, targets);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK((b.eta.row(i).array() != 0.0).count() <= 3);
    CHECK(b.support[static_cast<std::size_t>(i)].size() <= 3);
  }
}

TEST_CASE("pgd flags zero-gradient starts") {
  auto base = std::make_shared<const Dataset>(
      gen_dataset(Source::uniform, 4, 2, 1, 1.0));
  NetworkConfig cfg;
  cfg.d = 4;
  cfg.m = 2;
  cfg.init_scale = 0.0;
  NetworkParams p = init_params(cfg, 0);  // zero weights, zero gradient
  AttackSpec spec;
  spec.mode = AttackMode::pgd;
  spec.norm = AttackNorm::L2;
  spec.epsilon = 0.5;
  AdvDataset adv = pgd(p, cfg, base, spec, Eigen::VectorXd::Ones(2));
  CHECK(adv.flagged.size() == 2);
  CHECK(adv.Xadv == base->X);
}

TEST_CASE("gradient directions are the region gradients of the network") {
  auto ds = std::make_shared<const Dataset>(
      gen_orthogonal_dataset(64, 8, 6, std::sqrt(64.0)));
  NetworkConfig cfg;
  cfg.d = 64;
  cfg.m = 16;
  cfg.gamma = 0.5;
  Eigen::VectorXd lambda = solve_lambda(*ds, cfg.gamma, 8, 8);
  NetworkParams p = build_wstd(*ds, lambda, cfg);
  auto [sp, sm] = gradient_directions(p, cfg);
  CHECK(sp.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sm.norm() == doctest::Approx(1.0).epsilon(1e-12));

  // They equal the normalized input gradients at class samples.
  for (Eigen::Index i = 0; i < ds->n(); ++i) {
    Eigen::VectorXd g = grad_input(p, cfg, ds->X.row(i)).normalized();
    const Eigen::VectorXd& expect = ds->y[i] > 0 ? sp : sm;
    CHECK((g - expect).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("gradient directions on single-class data follow the data sum") {
  Dataset raw = gen_orthogonal_dataset(32, 4, 8, std::sqrt(32.0));
  raw.y.setOnes();
  NetworkConfig cfg;
  cfg.d = 32;
  cfg.m = 8;
  cfg.gamma = 0.5;
  Eigen::VectorXd lambda = solve_lambda(raw, cfg.gamma, 4, 4);
  NetworkParams p = build_wstd(raw, lambda, cfg);
  auto [sp, sm] = gradient_directions(p, cfg);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(32);
  for (Eigen::Index i = 0; i < 4; ++i) {
    sum += lambda[i] * raw.X.row(i).transpose();
  }
  double cosine = sp.dot(sum.normalized());
  CHECK(cosine >= 1.0 - 1e-12);
}

TEST_CASE("antipodal instance has identical class gradients") {
  // The built network is globally linear there, so both regions share one
  // gradient direction.
  Dataset raw;
  raw.X.resize(2, 3);
  raw.X << 2, 1, 0, -2, -1, 0;
  raw.y.resize(2);
  raw.y << 1, -1;
  NetworkConfig cfg;
  cfg.d = 3;
  cfg.m = 4;
  cfg.gamma = 0.5;
  Eigen::VectorXd lambda = solve_lambda(raw, cfg.gamma, 2, 2);
  NetworkParams p = build_wstd(raw, lambda, cfg);
  auto [sp, sm] = gradient_directions(p, cfg);
  CHECK((sp - sm).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sp.dot(raw.X.row(0).normalized()) == doctest::Approx(1.0));
}

TEST_CASE("pgd against a converged orthogonal teacher tracks geometry") {
  auto base = std::make_shared<const Dataset>(
      gen_orthogonal_dataset(128, 16, 40, std::sqrt(128.0)));
  NetworkConfig cfg;
  cfg.d = 128;
  cfg.m = 32;
  cfg.gamma = 0.5;
  Eigen::VectorXd lambda = solve_lambda(*base, cfg.gamma, 16, 16);
  BoundaryModel teacher = BoundaryModel::exact(base, lambda);
  NetworkParams p = build_wstd(*base, lambda, cfg);

  Eigen::VectorXd targets =
      target_labels(TargetRule::random_pm1, base->y, 16, 77);
  double eps = std::sqrt(128.0 / 16.0);
  AttackSpec spec;
  spec.mode = AttackMode::pgd;
  spec.norm = AttackNorm::L2;
  spec.epsilon = eps;
  spec.steps = 100;
  AdvDataset adv_pgd = pgd(p, cfg, base, spec, targets);
  AdvDataset adv_geo = geometry_l2(base, teacher, eps, targets);
  for (Eigen::Index i = 0; i < 16; ++i) {
    double cosine = adv_pgd.eta.row(i).dot(adv_geo.eta.row(i)) /
                    (adv_pgd.eta.row(i).norm() * adv_geo.eta.row(i).norm());
    CHECK(cosine >= 0.95);
  }
}

TEST_CASE("attack spec validation") {
  AttackSpec spec;
  spec.norm = AttackNorm::L2;
  spec.epsilon = 0.0;
  CHECK_THROWS_AS(spec.validate(8), std::invalid_argument);
  spec.epsilon = 0.5;
  CHECK_NOTHROW(spec.validate(8));
  spec.norm = AttackNorm::L0;
  spec.epsilon = 0.0;
  spec.d_delta = 9;
  CHECK_THROWS_AS(spec.validate(8), std::invalid_argument);
  spec.d_delta = 3;
  CHECK_NOTHROW(spec.validate(8));
  CHECK(spec.effective_step() == doctest::Approx(0.3));
}
