#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "advfeat/net.hpp"
#include "advfeat/rng.hpp"

using namespace advfeat;

namespace {

// Central differences on the scalar network output.
double fd_wgrad(NetworkParams p, const NetworkConfig& cfg, const Dataset& ds,
                LossKind kind, int r, Eigen::Index c, double h) {
  p.W(r, c) += h;
  double up = loss(p, cfg, ds, kind);
  p.W(r, c) -= 2 * h;
  double down = loss(p, cfg, ds, kind);
  return (up - down) / (2 * h);
}

double fd_xgrad(const NetworkParams& p, const NetworkConfig& cfg,
                Eigen::VectorXd x, Eigen::Index c, double h) {
  x[c] += h;
  double up = forward(p, cfg, x);
  x[c] -= 2 * h;
  double down = forward(p, cfg, x);
  return (up - down) / (2 * h);
}

bool away_from_kinks(const NetworkParams& p, const Eigen::MatrixXd& X,
                     double margin) {
  Eigen::MatrixXd S = X * p.W.transpose();
  return S.cwiseAbs().minCoeff() > margin;
}

}  // namespace

TEST_CASE("forward matches the hand-evaluated two-neuron case") {
  NetworkConfig cfg;
  cfg.d = 2;
  cfg.m = 2;
  cfg.gamma = 0.5;
  NetworkParams p;
  p.W.resize(2, 2);
  p.W << 1, 0, 0, 1;
  Eigen::VectorXd x(2);
  x << 2, -3;
  // (1/sqrt(2)) [phi(2) - phi(-3)] = (2 + 1.5)/sqrt(2)
  CHECK(forward(p, cfg, x) == doctest::Approx(3.5 / std::sqrt(2.0)));
}

TEST_CASE("zero weights give zero output, unit exp loss, ln2 logistic loss") {
  NetworkConfig cfg;
  cfg.d = 3;
  cfg.m = 4;
  cfg.init_scale = 0.0;
  NetworkParams p = init_params(cfg, 0);
  CHECK(p.W.isZero(0.0));
  Dataset ds = gen_dataset(Source::uniform, 3, 5, 3, 1.0);
  CHECK(forward(p, cfg, Eigen::VectorXd::Ones(3)) == 0.0);
  CHECK(loss(p, cfg, ds, LossKind::exponential) == doctest::Approx(1.0));
  CHECK(loss(p, cfg, ds, LossKind::logistic) ==
        doctest::Approx(std::log(2.0)));
  CHECK(grad_input(p, cfg, Eigen::VectorXd::Ones(3)).isZero(0.0));
}

TEST_CASE("unit margins give exp loss 1/e") {
  NetworkConfig cfg;
  cfg.d = 1;
  cfg.m = 2;
  cfg.gamma = 0.5;
  NetworkParams p;
  p.W.resize(2, 1);
  p.W << std::sqrt(2.0), 0.0;  // f(1) = phi(sqrt2)/sqrt2 = 1
  Dataset ds;
  ds.X.resize(1, 1);
  ds.X << 1;
  ds.y.resize(1);
  ds.y << 1;
  CHECK(loss(p, cfg, ds, LossKind::exponential) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("positive homogeneity in the weights") {
  NetworkConfig cfg;
  cfg.d = 5;
  cfg.m = 6;
  cfg.gamma = 0.3;
  NetworkParams p = init_params(cfg, 4);
  Rng rng(8);
  Eigen::VectorXd x(5);
  for (int i = 0; i < 5; ++i) x[i] = rng.gaussian();
  double base = forward(p, cfg, x);
  for (double c : {0.0, 0.5, 2.0, 10.0}) {
    NetworkParams q;
    q.W = c * p.W;
    double lhs = forward(q, cfg, x);
    CHECK(lhs == doctest::Approx(c * base).epsilon(1e-12));
  }
}

TEST_CASE("balanced last layer sums to zero with unit norm") {
  NetworkConfig cfg;
  cfg.d = 1;
  cfg.m = 8;
  Eigen::VectorXd a = last_layer(cfg);
  CHECK(a.sum() == 0.0);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("init_params is deterministic and scales row norms") {
  NetworkConfig cfg;
  cfg.d = 10000;
  cfg.m = 200;
  cfg.init_scale = 1.0;
  NetworkParams a = init_params(cfg, 1);
  NetworkParams b = init_params(cfg, 1);
  CHECK(a.W == b.W);
  // Row norms concentrate near init_scale.
  int within = 0;
  for (int j = 0; j < cfg.m; ++j) {
    if (std::abs(a.W.row(j).norm() - 1.0) < 0.2) ++within;
  }
  CHECK(within >= 198);
}

TEST_CASE("zero-weight gradient uses the gamma subgradient uniformly") {
  NetworkConfig cfg;
  cfg.d = 3;
  cfg.m = 2;
  cfg.gamma = 0.5;
  cfg.init_scale = 0.0;
  NetworkParams p = init_params(cfg, 0);
  Dataset ds;
  ds.X.resize(1, 3);
  ds.X << 1, 2, 3;
  ds.y.resize(1);
  ds.y << 1;
  Eigen::MatrixXd g = grad_loss(p, cfg, ds, LossKind::exponential);
  // l'(0) = -1, so dL/dW_j = -y a_j gamma x.
  Eigen::VectorXd a = last_layer(cfg);
  for (int j = 0; j < cfg.m; ++j) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      CHECK(g(j, c) ==
            doctest::Approx(-a[j] * cfg.gamma * ds.X(0, c)).epsilon(1e-14));
    }
  }
}

TEST_CASE("one-sample gradient factors through the chain rule") {
  NetworkConfig cfg;
  cfg.d = 4;
  cfg.m = 4;
  cfg.gamma = 0.4;
  cfg.init_scale = 0.5;
  NetworkParams p = init_params(cfg, 21);
  Dataset ds = gen_dataset(Source::gaussian, 4, 1, 5, 1.0);
  double f = forward(p, cfg, ds.X.row(0));
  double margin = ds.y[0] * f;
  // grad = l'(y f) * y * dW f, with dW f rows a_j phi'(s_j) x^T.
  Eigen::VectorXd s = p.W * ds.X.row(0).transpose();
  Eigen::VectorXd a = last_layer(cfg);
  Eigen::MatrixXd expected(cfg.m, cfg.d);
  for (int j = 0; j < cfg.m; ++j) {
    expected.row(j) = -std::exp(-margin) * ds.y[0] * a[j] *
                      leaky_slope(s[j], cfg.gamma) * ds.X.row(0);
  }
  Eigen::MatrixXd g = grad_loss(p, cfg, ds, LossKind::exponential);
  CHECK((g - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("analytic weight gradients match central differences") {
  Rng rng(31);
  int done = 0;
  while (done < 100) {
    NetworkConfig cfg;
    cfg.d = 6;
    cfg.m = 4;
    cfg.gamma = 0.2 + 0.6 * rng.uniform01();
    cfg.init_scale = 1.0;
    NetworkParams p = init_params(cfg, rng.next_u64());
    Dataset ds = gen_dataset(Source::gaussian, 6, 5, rng.next_u64(), 1.0);
    if (!away_from_kinks(p, ds.X, 1e-3)) continue;
    LossKind kind = (done % 2 == 0) ? LossKind::exponential
                                    : LossKind::logistic;
    Eigen::MatrixXd g = grad_loss(p, cfg, ds, kind);
    for (int checks = 0; checks < 4; ++checks) {
      int r = static_cast<int>(rng.below(cfg.m));
      auto c = static_cast<Eigen::Index>(rng.below(cfg.d));
      double fd = fd_wgrad(p, cfg, ds, kind, r, c, 1e-6);
      double scale = std::max({std::abs(fd), std::abs(g(r, c)), 1e-8});
      CHECK(std::abs(g(r, c) - fd) / scale < 1e-5);
    }
    ++done;
  }
}

TEST_CASE("analytic input gradients match the hand case and differences") {
  NetworkConfig cfg;
  cfg.d = 2;
  cfg.m = 2;
  cfg.gamma = 0.5;
  NetworkParams p;
  p.W.resize(2, 2);
  p.W << 1, 0, 0, 1;
  Eigen::VectorXd x(2);
  x << 2, -3;
  Eigen::VectorXd g = grad_input(p, cfg, x);
  // (1/sqrt2)(phi'(2) w1 - phi'(-3) w2) = (1/sqrt2)((1,0) - 0.5 (0,1))
  CHECK(g[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(g[1] == doctest::Approx(-0.5 / std::sqrt(2.0)));

  Rng rng(77);
  int done = 0;
  while (done < 100) {
    NetworkConfig rcfg;
    rcfg.d = 5;
    rcfg.m = 6;
    rcfg.gamma = 0.2 + 0.6 * rng.uniform01();
    rcfg.init_scale = 1.0;
    NetworkParams rp = init_params(rcfg, rng.next_u64());
    Eigen::VectorXd rx(5);
    for (int i = 0; i < 5; ++i) rx[i] = rng.gaussian();
    if ((rp.W * rx).cwiseAbs().minCoeff() <= 1e-3) continue;
    Eigen::VectorXd rg = grad_input(rp, rcfg, rx);
    for (Eigen::Index c = 0; c < 5; ++c) {
      double fd = fd_xgrad(rp, rcfg, rx, c, 1e-6);
      double scale = std::max({std::abs(fd), std::abs(rg[c]), 1e-8});
      CHECK(std::abs(rg[c] - fd) / scale < 1e-5);
    }
    ++done;
  }
}

TEST_CASE("dimension mismatches are rejected") {
  NetworkConfig cfg;
  cfg.d = 3;
  cfg.m = 2;
  NetworkParams p = init_params(cfg, 0);
  CHECK_THROWS_AS(forward(p, cfg, Eigen::VectorXd::Ones(4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(grad_input(p, cfg, Eigen::VectorXd::Ones(4)),
                  std::invalid_argument);
}

TEST_CASE("network config invariants") {
  NetworkConfig cfg;
  cfg.d = 2;
  cfg.m = 3;  // odd without a split
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.m_plus = 2;
  CHECK_NOTHROW(cfg.validate());
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
