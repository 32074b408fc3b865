#pragma once

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "advfeat/dataset.hpp"
#include "advfeat/net.hpp"

namespace advfeat {

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Positive per-sample weights solving y_n f(x_n; W) = 1 under the activation
// sign pattern that holds for nearly orthogonal data.  The margin system is
// assembled as a linear system under that pattern, solved by dense LU, and
// the pattern plus the true piecewise-linear margins are verified afterwards;
// throws SolveError if verification fails (singular system, a non-positive
// weight, a pattern violation, or a margin residual above 1e-8).
Eigen::VectorXd solve_lambda(const Dataset& ds, double gamma, int m_plus,
                             int m_minus);

// Same solve on a precomputed Gram matrix; margins are still verified
// against X.
Eigen::VectorXd solve_lambda_gram(const Eigen::MatrixXd& gram,
                                  const Dataset& ds, double gamma, int m_plus,
                                  int m_minus);

// Hidden-layer rows of the directional limit: m_plus copies of v over
// m_minus copies of u.
NetworkParams build_wstd(const Dataset& ds, const Eigen::VectorXd& lambda,
                         const NetworkConfig& cfg);

// The two distinct weight rows behind build_wstd, without materializing W.
std::pair<Eigen::VectorXd, Eigen::VectorXd> wstd_rows(
    const Dataset& ds, const Eigen::VectorXd& lambda, double gamma);

struct BoundaryModel {
  enum class Mode { lambda_exact, empirical_vu };
  Mode mode = Mode::lambda_exact;

  // lambda_exact
  std::shared_ptr<const Dataset> ref;
  Eigen::VectorXd lambda;
  Eigen::VectorXd q;  // sum_n lambda_n y_n x_n, compensated summation

  // empirical_vu
  Eigen::VectorXd v, u;

  static BoundaryModel exact(std::shared_ptr<const Dataset> ds,
                             Eigen::VectorXd lambda);
  static BoundaryModel empirical(Eigen::VectorXd v, Eigen::VectorXd u);

  // lambda_exact: sum_n lambda_n y_n <x_n, z>; empirical: <v - u, z>.
  // The two modes agree in sign, not in value.
  double eval(const Eigen::Ref<const Eigen::VectorXd>& z) const;

  // Gradient of the linear boundary: q, or v - u.
  const Eigen::VectorXd& gradient() const;

  const char* mode_name() const {
    return mode == Mode::lambda_exact ? "lambda_exact" : "empirical_vu";
  }
};

// General-last-layer boundary: sum_n A_n lambda_n y_n <x_n, z> with
// A_n = m_plus + gamma*m_minus on the positive class and
// A_n = gamma*m_plus + m_minus on the negative one.
double fbdy_general(const Dataset& ds, const Eigen::VectorXd& lambda,
                    double gamma, int m_plus, int m_minus,
                    const Eigen::Ref<const Eigen::VectorXd>& z);

// Row means of the two last-layer blocks.
std::pair<Eigen::VectorXd, Eigen::VectorXd> extract_vu(
    const NetworkParams& p, const NetworkConfig& cfg);

using Evaluator = std::function<double(const Eigen::VectorXd&)>;

struct SignAgreement {
  double rate = 0.0;
  int n_excluded = 0;
};

// Matching-sign fraction over probes, excluding those too close to either
// boundary: a probe is dropped when |f(z)| < band * median |f| for either
// evaluator (each side scaled by its own median so the band is meaningful
// across evaluators with different output scales).
SignAgreement sign_agreement(const Evaluator& fa, const Evaluator& fb,
                             const Eigen::MatrixXd& probes, double band);

struct BoundaryTerms {
  double t1 = 0.0;  // effect of the mislabeled base samples
  double t2 = 0.0;  // effect of the perturbations
};

// Decomposition of the adversarially-trained boundary at z.  base rows
// default to the natural model's reference dataset.
BoundaryTerms boundary_terms(const BoundaryModel& nat_model,
                             const Eigen::VectorXd& adv_lambda,
                             const Eigen::VectorXd& adv_targets,
                             double epsilon,
                             const Eigen::Ref<const Eigen::VectorXd>& z);
BoundaryTerms boundary_terms_base(const BoundaryModel& nat_model,
                                  const Eigen::MatrixXd& base_rows,
                                  const Eigen::VectorXd& adv_lambda,
                                  const Eigen::VectorXd& adv_targets,
                                  double epsilon,
                                  const Eigen::Ref<const Eigen::VectorXd>& z);

struct DecisionMap {
  double half_width = 1.0;
  int resolution = 0;
  Eigen::MatrixXi signs;  // signs(i,j) = sgn f(alpha_i v^ + beta_j u^)
  Eigen::VectorXd alphas, betas;
  // (alpha, beta, label) projections of overlay datasets
  std::vector<std::array<double, 3>> points;
};

DecisionMap decision_map(const Evaluator& f, const Eigen::VectorXd& v,
                         const Eigen::VectorXd& u, double half_width,
                         int resolution,
                         const std::vector<const Dataset*>& overlays = {});

void write_decision_map_csv(const DecisionMap& map, const std::string& path);

// Gaussian probes rescaled to a common norm; the working regime keeps
// |z| ~ sqrt(d).
Eigen::MatrixXd gaussian_probes(Eigen::Index d, int count, double norm,
                                std::uint64_t seed);

}  // namespace advfeat
