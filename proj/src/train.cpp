#include "advfeat/train.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace advfeat {

void TrainConfig::validate() const {
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("momentum must lie in [0,1)");
  }
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (batch < 0) throw std::invalid_argument("batch must be >= 0");
  if (!(scheduler.factor > 0.0 && scheduler.factor < 1.0)) {
    throw std::invalid_argument("scheduler factor must lie in (0,1)");
  }
  if (scheduler.patience_epochs < 1) {
    throw std::invalid_argument("scheduler patience must be >= 1");
  }
  if (stop.window < 1) throw std::invalid_argument("stop window must be >= 1");
}

Eigen::VectorXd margins(const NetworkParams& p, const NetworkConfig& cfg,
                        const Dataset& ds) {
  return ds.y.cwiseProduct(forward_batch(p, cfg, ds.X));
}

double direction_distance(const NetworkParams& a, const NetworkParams& b) {
  if (a.W.rows() != b.W.rows() || a.W.cols() != b.W.cols()) {
    throw std::invalid_argument("shape mismatch");
  }
  double na = a.W.norm();
  double nb = b.W.norm();
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("direction of a zero matrix is undefined");
  }
  return (a.W / na - b.W / nb).norm();
}

namespace {

double mean_loss(const Eigen::VectorXd& margins_vec, LossKind kind) {
  if (kind == LossKind::exponential) {
    return (-margins_vec.array()).exp().mean();
  }
  return margins_vec
      .unaryExpr([](double z) {
        return z > 0.0 ? std::log1p(std::exp(-z))
                       : -z + std::log1p(std::exp(z));
      })
      .mean();
}

Dataset slice(const Dataset& ds, const std::vector<Eigen::Index>& idx,
              Eigen::Index lo, Eigen::Index hi) {
  Dataset out;
  out.X.resize(hi - lo, ds.d());
  out.y.resize(hi - lo);
  for (Eigen::Index i = lo; i < hi; ++i) {
    out.X.row(i - lo) = ds.X.row(idx[i]);
    out.y[i - lo] = ds.y[idx[i]];
  }
  out.source = ds.source;
  out.seed = ds.seed;
  out.scale = ds.scale;
  return out;
}

}  // namespace

std::pair<NetworkParams, TrainReport> train(const NetworkParams& p0,
                                            const NetworkConfig& cfg,
                                            const Dataset& ds,
                                            const TrainConfig& tc) {
  tc.validate();
  cfg.validate();
  if (ds.n() < 1) throw std::invalid_argument("empty training set");
  if (ds.d() != cfg.d || p0.W.cols() != cfg.d || p0.W.rows() != cfg.m) {
    throw std::invalid_argument("shape mismatch");
  }

  NetworkParams p = p0;
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(cfg.m, cfg.d);
  TrainReport report;

  double lr = tc.lr;
  const double lr_floor = tc.lr * 1e-6;
  double best_loss = std::numeric_limits<double>::infinity();
  int stall = 0;

  Eigen::MatrixXd prev_dir;
  bool have_prev_dir = false;
  int below_tol = 0;
  std::deque<double> drift_window;

  int trace_stride = std::max(1, (tc.max_epochs + 9999) / 10000);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(ds.n()));
  std::iota(order.begin(), order.end(), 0);
  Rng shuffler = Rng(tc.seed).fork("shuffle");

  bool stopped_early = false;
  for (int epoch = 1; epoch <= tc.max_epochs && !stopped_early; ++epoch) {
    double epoch_loss;
    double epoch_margin_min;
    if (tc.batch == 0) {
      BatchEval be = grad_loss_with_outputs(p, cfg, ds, tc.loss_kind);
      Eigen::VectorXd mg = ds.y.cwiseProduct(be.f);
      epoch_loss = mean_loss(mg, tc.loss_kind);
      epoch_margin_min = mg.minCoeff();
      velocity = tc.momentum * velocity - lr * be.grad;
      p.W += velocity;
    } else {
      for (Eigen::Index i = ds.n() - 1; i > 0; --i) {
        std::swap(order[static_cast<std::size_t>(i)],
                  order[shuffler.below(static_cast<std::uint64_t>(i + 1))]);
      }
      for (Eigen::Index lo = 0; lo < ds.n(); lo += tc.batch) {
        Eigen::Index hi = std::min<Eigen::Index>(lo + tc.batch, ds.n());
        Dataset mb = slice(ds, order, lo, hi);
        Eigen::MatrixXd g = grad_loss(p, cfg, mb, tc.loss_kind);
        velocity = tc.momentum * velocity - lr * g;
        p.W += velocity;
      }
      Eigen::VectorXd mg = margins(p, cfg, ds);
      epoch_loss = mean_loss(mg, tc.loss_kind);
      epoch_margin_min = mg.minCoeff();
    }
    if (!std::isfinite(epoch_loss)) {
      throw TrainError("non-finite loss", epoch);
    }

    report.epochs_run = epoch;
    report.final_loss = epoch_loss;
    report.margin_min = epoch_margin_min;
    if (epoch == 1 || epoch % trace_stride == 0) {
      report.loss_trace.emplace_back(epoch, epoch_loss);
    }

    // Plateau scheduler with a hard floor on the decayed rate.
    if (epoch_loss < best_loss - tc.scheduler.min_improvement) {
      best_loss = epoch_loss;
      stall = 0;
    } else if (++stall >= tc.scheduler.patience_epochs) {
      stall = 0;
      if (lr * tc.scheduler.factor >= lr_floor) {
        lr *= tc.scheduler.factor;
      }
    }

    // Directional-convergence monitor on W / |W|_F.
    double wnorm = p.W.norm();
    if (wnorm > 0.0) {
      Eigen::MatrixXd dir = p.W / wnorm;
      if (have_prev_dir) {
        double drift = (dir - prev_dir).norm();
        drift_window.push_back(drift);
        if (static_cast<int>(drift_window.size()) > tc.stop.window) {
          drift_window.pop_front();
        }
        below_tol = (drift < tc.stop.direction_tol) ? below_tol + 1 : 0;
      }
      prev_dir = std::move(dir);
      have_prev_dir = true;
    }

    bool margins_ok =
        !tc.stop.require_positive_margins || epoch_margin_min > 0.0;
    if (below_tol >= tc.stop.window && margins_ok) {
      report.stopped_by = StopReason::converged;
      stopped_early = true;
    }
  }

  if (!stopped_early) report.stopped_by = StopReason::max_epochs;
  report.direction_drift =
      std::accumulate(drift_window.begin(), drift_window.end(), 0.0);
  report.final_lr = lr;

  // Loss and margins of the weights actually returned.
  Eigen::VectorXd mg = margins(p, cfg, ds);
  report.final_loss = mean_loss(mg, tc.loss_kind);
  report.margin_min = mg.minCoeff();
  if (report.loss_trace.empty() ||
      report.loss_trace.back().first != report.epochs_run) {
    report.loss_trace.emplace_back(report.epochs_run, report.final_loss);
  }

  return {std::move(p), std::move(report)};
}

}  // namespace advfeat
