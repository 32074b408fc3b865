#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

#include "advfeat/dataset.hpp"

namespace advfeat {

enum class LossKind { exponential, logistic };

struct NetworkConfig {
  Eigen::Index d = 0;
  int m = 128;        // hidden width
  int m_plus = -1;    // -1: balanced split m/2 (m must be even then)
  double gamma = 0.5;
  double init_scale = 0.01;

  int mplus() const { return m_plus < 0 ? m / 2 : m_plus; }
  int mminus() const { return m - mplus(); }
  void validate() const;
};

// Hidden weights; the last layer is frozen at +1/sqrt(m) for the first
// m_plus rows and -1/sqrt(m) for the rest.
struct NetworkParams {
  Eigen::MatrixXd W;
};

inline double leaky(double z, double gamma) { return z >= 0.0 ? z : gamma * z; }
// Subgradient at 0 fixed to gamma so every run is reproducible.
inline double leaky_slope(double z, double gamma) {
  return z > 0.0 ? 1.0 : gamma;
}

// Frozen last layer as a vector.
Eigen::VectorXd last_layer(const NetworkConfig& cfg);

// W entries i.i.d. Gaussian with sd init_scale/sqrt(d).
NetworkParams init_params(const NetworkConfig& cfg, std::uint64_t seed);

double forward(const NetworkParams& p, const NetworkConfig& cfg,
               const Eigen::Ref<const Eigen::VectorXd>& x);

// One output per row of X.
Eigen::VectorXd forward_batch(const NetworkParams& p, const NetworkConfig& cfg,
                              const Eigen::Ref<const Eigen::MatrixXd>& X);

double loss(const NetworkParams& p, const NetworkConfig& cfg,
            const Dataset& ds, LossKind kind);

// Analytic d loss / d W.
Eigen::MatrixXd grad_loss(const NetworkParams& p, const NetworkConfig& cfg,
                          const Dataset& ds, LossKind kind);

// Gradient plus the network outputs it was computed from; saves the second
// pass over X inside training loops.
struct BatchEval {
  Eigen::MatrixXd grad;
  Eigen::VectorXd f;
};
BatchEval grad_loss_with_outputs(const NetworkParams& p,
                                 const NetworkConfig& cfg, const Dataset& ds,
                                 LossKind kind);

// Analytic gradient of f with respect to the input.
Eigen::VectorXd grad_input(const NetworkParams& p, const NetworkConfig& cfg,
                           const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace advfeat
