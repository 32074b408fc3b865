#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "advfeat/boundary.hpp"
#include "advfeat/train.hpp"

using namespace advfeat;

TEST_CASE("first step from zero weights is exactly -lr * gradient") {
  NetworkConfig cfg;
  cfg.d = 4;
  cfg.m = 2;
  cfg.init_scale = 0.0;
  NetworkParams p0 = init_params(cfg, 0);
  Dataset ds = gen_dataset(Source::uniform, 4, 3, 11, 1.0);

  Eigen::MatrixXd g0 = grad_loss(p0, cfg, ds, LossKind::exponential);

  TrainConfig tc;
  tc.lr = 0.05;
  tc.momentum = 0.9;
  tc.max_epochs = 1;
  auto [p1, rep] = train(p0, cfg, ds, tc);
  CHECK(rep.epochs_run == 1);
  // Up to fused-multiply rounding, the first step is -lr * g0 ...
  double scale = tc.lr * g0.cwiseAbs().maxCoeff();
  CHECK((p1.W + tc.lr * g0).cwiseAbs().maxCoeff() <= 1e-15 * scale);
  // ... and the momentum buffer plays no part in it.
  tc.momentum = 0.0;
  auto [p1b, repb] = train(p0, cfg, ds, tc);
  CHECK(p1.W == p1b.W);
}

TEST_CASE("single-sample margin grows monotonically") {
  NetworkConfig cfg;
  cfg.d = 1;
  cfg.m = 2;
  cfg.init_scale = 0.0;
  Dataset ds;
  ds.X.resize(1, 1);
  ds.X << 1;
  ds.y.resize(1);
  ds.y << 1;

  TrainConfig tc;
  tc.lr = 0.05;
  tc.momentum = 0.0;
  tc.max_epochs = 400;
  tc.stop.window = 1 << 20;  // no early stop
  auto [p, rep] = train(init_params(cfg, 0), cfg, ds, tc);
  CHECK(rep.margin_min > 0.0);
  // Exponential loss of one sample decreases iff its margin increases.
  for (std::size_t i = 1; i < rep.loss_trace.size(); ++i) {
    CHECK(rep.loss_trace[i].second < rep.loss_trace[i - 1].second);
  }
}

TEST_CASE("label flip negates margins") {
  NetworkConfig cfg;
  cfg.d = 6;
  cfg.m = 4;
  cfg.init_scale = 0.3;
  NetworkParams p = init_params(cfg, 5);
  Dataset ds = gen_dataset(Source::gaussian, 6, 7, 2, 1.0);
  Eigen::VectorXd m1 = margins(p, cfg, ds);
  ds.y = -ds.y;
  Eigen::VectorXd m2 = margins(p, cfg, ds);
  CHECK((m1 + m2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("direction distance identities") {
  NetworkConfig cfg;
  cfg.d = 4;
  cfg.m = 2;
  cfg.init_scale = 1.0;
  NetworkParams a = init_params(cfg, 9);
  NetworkParams b = a;
  CHECK(direction_distance(a, b) == 0.0);
  b.W = 3.0 * a.W;
  CHECK(direction_distance(a, b) == doctest::Approx(0.0).epsilon(1e-15));
  b.W = -a.W;
  CHECK(direction_distance(a, b) == doctest::Approx(2.0));
  b.W.setZero();
  CHECK_THROWS_AS(direction_distance(a, b), std::invalid_argument);
}

TEST_CASE("plain gradient descent keeps the loss non-increasing") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NetworkConfig cfg;
    cfg.d = 8;
    cfg.m = 4;
    cfg.init_scale = 0.1;
    Dataset ds = gen_dataset(Source::uniform, 8, 5, seed, 1.0);
    TrainConfig tc;
    tc.lr = 1e-3;
    tc.momentum = 0.0;
    tc.max_epochs = 1000;
    tc.stop.window = 1 << 20;
    auto [p, rep] = train(init_params(cfg, seed), cfg, ds, tc);
    for (std::size_t i = 1; i < rep.loss_trace.size(); ++i) {
      CHECK(rep.loss_trace[i].second <= rep.loss_trace[i - 1].second);
    }
  }
}

TEST_CASE("training is bitwise deterministic") {
  NetworkConfig cfg;
  cfg.d = 8;
  cfg.m = 6;
  cfg.init_scale = 0.05;
  Dataset ds = gen_dataset(Source::uniform, 8, 9, 17, 1.0);
  TrainConfig tc;
  tc.max_epochs = 300;
  auto [p1, r1] = train(init_params(cfg, 3), cfg, ds, tc);
  auto [p2, r2] = train(init_params(cfg, 3), cfg, ds, tc);
  CHECK(p1.W == p2.W);
  CHECK(r1.final_loss == r2.final_loss);
  CHECK(r1.epochs_run == r2.epochs_run);
  CHECK(r1.loss_trace == r2.loss_trace);

  // Minibatch path has its own deterministic shuffle stream.
  tc.batch = 4;
  tc.seed = 123;
  auto [p3, r3] = train(init_params(cfg, 3), cfg, ds, tc);
  auto [p4, r4] = train(init_params(cfg, 3), cfg, ds, tc);
  CHECK(p3.W == p4.W);
  CHECK(r3.final_loss == r4.final_loss);
  CHECK(p3.W != p1.W);
}

TEST_CASE("divergent run reports a non-finite loss with its epoch") {
  NetworkConfig cfg;
  cfg.d = 4;
  cfg.m = 2;
  cfg.init_scale = 1.0;
  Dataset ds = gen_dataset(Source::gaussian, 4, 4, 3, 1.0);
  TrainConfig tc;
  tc.lr = 1e12;
  tc.max_epochs = 50;
  CHECK_THROWS_AS(train(init_params(cfg, 1), cfg, ds, tc), TrainError);
}

TEST_CASE("trained margins on a solvable instance settle at one") {
  // build_wstd margins are the fixed point of the margin system.
  Dataset ds = gen_orthogonal_dataset(64, 8, 3, std::sqrt(64.0));
  NetworkConfig cfg;
  cfg.d = 64;
  cfg.m = 16;
  cfg.gamma = 0.5;
  Eigen::VectorXd lambda = solve_lambda(ds, cfg.gamma, 1, 1);
  NetworkParams p = build_wstd(ds, lambda, cfg);
  Eigen::VectorXd mg = margins(p, cfg, ds);
  CHECK((mg.array() - 1.0).abs().maxCoeff() < 1e-8);
}

TEST_CASE("directional convergence on an exactly orthogonal instance") {
  Dataset ds = gen_orthogonal_dataset(128, 16, 7, std::sqrt(128.0));
  NetworkConfig cfg;
  cfg.d = 128;
  cfg.m = 32;
  cfg.gamma = 0.5;
  cfg.init_scale = 0.01;
  TrainConfig tc;
  tc.lr = 0.01;
  tc.momentum = 0.9;
  tc.max_epochs = 30000;
  tc.stop.direction_tol = 1e-6;
  tc.stop.window = 50;
  auto [p, rep] = train(init_params(cfg, 11), cfg, ds, tc);
  CHECK(rep.stopped_by == StopReason::converged);
  CHECK(rep.margin_min > 0.0);
  CHECK(rep.direction_drift < 1e-4);

  // The direction matches the dual construction.
  Eigen::VectorXd lambda = solve_lambda(ds, cfg.gamma, 1, 1);
  NetworkParams exact = build_wstd(ds, lambda, cfg);
  CHECK(direction_distance(p, exact) < 0.2);
}
