#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "advfeat/net.hpp"

namespace advfeat {

struct SchedulerConfig {
  double factor = 0.1;
  int patience_epochs = 10;
  // "no improvement" means less than this absolute loss decrease.
  double min_improvement = 1e-12;
};

struct StopConfig {
  double direction_tol = 1e-6;  // per-epoch normalized-weight drift
  int window = 50;              // consecutive epochs below tol
  bool require_positive_margins = true;
};

struct TrainConfig {
  LossKind loss_kind = LossKind::exponential;
  double lr = 0.01;
  double momentum = 0.9;
  int max_epochs = 100000;
  int batch = 0;  // 0: full batch; >0: shuffled minibatches of this size
  SchedulerConfig scheduler;
  StopConfig stop;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class StopReason { max_epochs, converged };

struct TrainReport {
  int epochs_run = 0;
  double final_loss = 0.0;
  std::vector<std::pair<int, double>> loss_trace;  // at most 10k points
  double margin_min = 0.0;
  // Accumulated normalized-weight drift across the stop window.
  double direction_drift = 0.0;
  StopReason stopped_by = StopReason::max_epochs;
  double final_lr = 0.0;
};

struct TrainError : std::runtime_error {
  int epoch;
  TrainError(const std::string& what, int epoch_)
      : std::runtime_error(what), epoch(epoch_) {}
};

std::pair<NetworkParams, TrainReport> train(const NetworkParams& p0,
                                            const NetworkConfig& cfg,
                                            const Dataset& ds,
                                            const TrainConfig& tc);

// y_n * f(x_n) per sample.
Eigen::VectorXd margins(const NetworkParams& p, const NetworkConfig& cfg,
                        const Dataset& ds);

// || Wa/|Wa|_F - Wb/|Wb|_F ||_F
double direction_distance(const NetworkParams& a, const NetworkParams& b);

}  // namespace advfeat
