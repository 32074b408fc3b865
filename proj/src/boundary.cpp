#include "advfeat/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace advfeat {

namespace {

// Coefficient of lambda_k (with Gram entry factored out) in the margin
// equation of sample n: margin rows are linear in lambda once the activation
// signs <v,x_n> sgn = y_n, <u,x_n> sgn = -y_n are assumed.
double margin_coeff(double yn, double yk, double gamma, int m_plus,
                    int m_minus) {
  double m = static_cast<double>(m_plus + m_minus);
  if (yn > 0.0) {
    return yk > 0.0 ? (m_plus + gamma * gamma * m_minus) / m : -gamma;
  }
  return yk > 0.0 ? gamma : -(gamma * gamma * m_plus + m_minus) / m;
}

Eigen::VectorXd kahan_weighted_rowsum(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& w) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(X.cols());
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      double term = w[i] * X(i, j) - comp[j];
      double t = sum[j] + term;
      comp[j] = (t - sum[j]) - term;
      sum[j] = t;
    }
  }
  return sum;
}

double median_abs(std::vector<double> vals) {
  std::size_t mid = vals.size() / 2;
  std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
  return vals[mid];
}

}  // namespace

Eigen::VectorXd solve_lambda_gram(const Eigen::MatrixXd& gram,
                                  const Dataset& ds, double gamma, int m_plus,
                                  int m_minus) {
  const Eigen::Index n = ds.n();
  if (n < 1) throw std::invalid_argument("empty dataset");
  if (gram.rows() != n || gram.cols() != n) {
    throw std::invalid_argument("gram shape mismatch");
  }
  if (m_plus < 1 || m_minus < 1) {
    throw std::invalid_argument("need at least one neuron per sign block");
  }

  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      M(i, k) =
          margin_coeff(ds.y[i], ds.y[k], gamma, m_plus, m_minus) * gram(i, k);
    }
    b[i] = ds.y[i];
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Eigen::VectorXd lambda = lu.solve(b);
  if (!lambda.allFinite() || (M * lambda - b).norm() > 1e-6 * b.norm()) {
    throw SolveError("margin system is singular or badly conditioned");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lambda[i] > 0.0)) {
      throw SolveError("non-positive lambda; orthogonality premise fails");
    }
  }

  // Verify the assumed activation pattern on the actual data.
  auto [v, u] = wstd_rows(ds, lambda, gamma);
  Eigen::VectorXd pv = ds.X * v;
  Eigen::VectorXd pu = ds.X * u;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(pv[i] * ds.y[i] > 0.0) || !(pu[i] * ds.y[i] < 0.0)) {
      throw SolveError("activation sign pattern violated after solve");
    }
  }

  // Margins through the genuine piecewise-linear network.  pv/pu come from
  // the unscaled row sums (sqrt(m) times v and u), and the leaky ReLU is
  // positively homogeneous, so the 1/sqrt(m) output factor becomes 1/m.
  double m = static_cast<double>(m_plus + m_minus);
  for (Eigen::Index i = 0; i < n; ++i) {
    double f = (m_plus * leaky(pv[i], gamma) -
                m_minus * leaky(pu[i], gamma)) /
               m;
    if (std::abs(ds.y[i] * f - 1.0) > 1e-8) {
      throw SolveError("margin residual above tolerance");
    }
  }
  return lambda;
}

Eigen::VectorXd solve_lambda(const Dataset& ds, double gamma, int m_plus,
                             int m_minus) {
  Eigen::MatrixXd gram;
  gram.noalias() = ds.X * ds.X.transpose();
  return solve_lambda_gram(gram, ds, gamma, m_plus, m_minus);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> wstd_rows(
    const Dataset& ds, const Eigen::VectorXd& lambda, double gamma) {
  // v = (1/sqrt(m)) (sum_+ lambda x - gamma sum_- lambda x); the 1/sqrt(m)
  // factor is applied by build_wstd, these are the unscaled sums.
  Eigen::VectorXd wv(ds.n()), wu(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    if (ds.y[i] > 0.0) {
      wv[i] = lambda[i];
      wu[i] = -gamma * lambda[i];
    } else {
      wv[i] = -gamma * lambda[i];
      wu[i] = lambda[i];
    }
  }
  return {kahan_weighted_rowsum(ds.X, wv), kahan_weighted_rowsum(ds.X, wu)};
}

NetworkParams build_wstd(const Dataset& ds, const Eigen::VectorXd& lambda,
                         const NetworkConfig& cfg) {
  cfg.validate();
  if (cfg.d != ds.d()) throw std::invalid_argument("dimension mismatch");
  if (lambda.size() != ds.n()) throw std::invalid_argument("lambda mismatch");
  auto [sv, su] = wstd_rows(ds, lambda, cfg.gamma);
  double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(cfg.m));
  NetworkParams p;
  p.W.resize(cfg.m, cfg.d);
  for (int j = 0; j < cfg.mplus(); ++j) p.W.row(j) = inv_sqrt_m * sv;
  for (int j = cfg.mplus(); j < cfg.m; ++j) p.W.row(j) = inv_sqrt_m * su;
  return p;
}

BoundaryModel BoundaryModel::exact(std::shared_ptr<const Dataset> ds,
                                   Eigen::VectorXd lambda) {
  if (!ds) throw std::invalid_argument("null dataset");
  if (lambda.size() != ds->n()) throw std::invalid_argument("lambda mismatch");
  BoundaryModel m;
  m.mode = Mode::lambda_exact;
  m.ref = std::move(ds);
  m.lambda = std::move(lambda);
  m.q = kahan_weighted_rowsum(m.ref->X, m.lambda.cwiseProduct(m.ref->y));
  return m;
}

BoundaryModel BoundaryModel::empirical(Eigen::VectorXd v, Eigen::VectorXd u) {
  BoundaryModel m;
  m.mode = Mode::empirical_vu;
  m.v = std::move(v);
  m.u = std::move(u);
  m.q = m.v - m.u;
  return m;
}

double BoundaryModel::eval(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (mode == Mode::lambda_exact) {
    if (z.size() != ref->d()) throw std::invalid_argument("dim mismatch");
    return lambda.cwiseProduct(ref->y).dot(ref->X * z);
  }
  if (z.size() != v.size()) throw std::invalid_argument("dim mismatch");
  return (v - u).dot(z);
}

const Eigen::VectorXd& BoundaryModel::gradient() const { return q; }

double fbdy_general(const Dataset& ds, const Eigen::VectorXd& lambda,
                    double gamma, int m_plus, int m_minus,
                    const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != ds.d()) throw std::invalid_argument("dim mismatch");
  double a_pos = m_plus + gamma * m_minus;
  double a_neg = gamma * m_plus + m_minus;
  Eigen::VectorXd proj = ds.X * z;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    double a = ds.y[i] > 0.0 ? a_pos : a_neg;
    acc += a * lambda[i] * ds.y[i] * proj[i];
  }
  return acc;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> extract_vu(
    const NetworkParams& p, const NetworkConfig& cfg) {
  int mp = cfg.mplus();
  Eigen::VectorXd v = p.W.topRows(mp).colwise().mean();
  Eigen::VectorXd u = p.W.bottomRows(cfg.mminus()).colwise().mean();
  return {v, u};
}

SignAgreement sign_agreement(const Evaluator& fa, const Evaluator& fb,
                             const Eigen::MatrixXd& probes, double band) {
  const Eigen::Index n = probes.rows();
  if (n < 1) throw std::invalid_argument("no probes");
  std::vector<double> va(n), vb(n), absa(n), absb(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd z = probes.row(i);
    va[i] = fa(z);
    vb[i] = fb(z);
    absa[i] = std::abs(va[i]);
    absb[i] = std::abs(vb[i]);
  }
  double cut_a = band * median_abs(absa);
  double cut_b = band * median_abs(absb);
  int kept = 0, match = 0, excluded = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (absa[i] < cut_a || absb[i] < cut_b) {
      ++excluded;
      continue;
    }
    ++kept;
    if ((va[i] > 0.0) == (vb[i] > 0.0)) ++match;
  }
  if (kept == 0) throw std::runtime_error("all probes fell inside the band");
  return {static_cast<double>(match) / kept, excluded};
}

BoundaryTerms boundary_terms_base(const BoundaryModel& nat_model,
                                  const Eigen::MatrixXd& base_rows,
                                  const Eigen::VectorXd& adv_lambda,
                                  const Eigen::VectorXd& adv_targets,
                                  double epsilon,
                                  const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (nat_model.mode != BoundaryModel::Mode::lambda_exact) {
    throw std::invalid_argument("decomposition needs a lambda_exact model");
  }
  double qn = nat_model.q.norm();
  if (qn <= 1e-12) throw std::invalid_argument("degenerate q");
  if (adv_lambda.size() != base_rows.rows() ||
      adv_targets.size() != base_rows.rows()) {
    throw std::invalid_argument("shape mismatch");
  }
  Eigen::VectorXd proj = base_rows * z;
  BoundaryTerms out;
  out.t1 = adv_lambda.cwiseProduct(adv_targets).dot(proj) / adv_lambda.sum();
  out.t2 = epsilon * nat_model.q.dot(z) / qn;
  return out;
}

BoundaryTerms boundary_terms(const BoundaryModel& nat_model,
                             const Eigen::VectorXd& adv_lambda,
                             const Eigen::VectorXd& adv_targets,
                             double epsilon,
                             const Eigen::Ref<const Eigen::VectorXd>& z) {
  return boundary_terms_base(nat_model, nat_model.ref->X, adv_lambda,
                             adv_targets, epsilon, z);
}

DecisionMap decision_map(const Evaluator& f, const Eigen::VectorXd& v,
                         const Eigen::VectorXd& u, double half_width,
                         int resolution,
                         const std::vector<const Dataset*>& overlays) {
  if (resolution < 2) throw std::invalid_argument("resolution must be >= 2");
  double nv = v.norm();
  double nu = u.norm();
  if (nv == 0.0 || nu == 0.0) throw std::invalid_argument("zero axis vector");
  Eigen::VectorXd vh = v / nv;
  Eigen::VectorXd uh = u / nu;
  if (std::abs(vh.dot(uh)) > 1.0 - 1e-12) {
    throw std::invalid_argument("axis vectors are parallel");
  }

  DecisionMap map;
  map.half_width = half_width;
  map.resolution = resolution;
  map.alphas.resize(resolution);
  map.betas.resize(resolution);
  for (int i = 0; i < resolution; ++i) {
    double t = resolution == 1 ? 0.0
                               : -half_width + 2.0 * half_width * i /
                                                   (resolution - 1);
    map.alphas[i] = t;
    map.betas[i] = t;
  }
  map.signs.resize(resolution, resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      Eigen::VectorXd z = map.alphas[i] * vh + map.betas[j] * uh;
      double val = f(z);
      map.signs(i, j) = val > 0.0 ? 1 : (val < 0.0 ? -1 : 0);
    }
  }
  for (const Dataset* ds : overlays) {
    if (!ds) continue;
    for (Eigen::Index i = 0; i < ds->n(); ++i) {
      map.points.push_back({ds->X.row(i).dot(vh), ds->X.row(i).dot(uh),
                            ds->y[i]});
    }
  }
  return map;
}

void write_decision_map_csv(const DecisionMap& map, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f, "alpha,beta,sign\n");
  for (int i = 0; i < map.resolution; ++i) {
    for (int j = 0; j < map.resolution; ++j) {
      std::fprintf(f, "%.17g,%.17g,%d\n", map.alphas[i], map.betas[j],
                   map.signs(i, j));
    }
  }
  std::fclose(f);
}

Eigen::MatrixXd gaussian_probes(Eigen::Index d, int count, double norm,
                                std::uint64_t seed) {
  Rng rng = Rng(seed).fork("probes");
  Eigen::MatrixXd Z(count, d);
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) Z(i, j) = rng.gaussian();
    double len = Z.row(i).norm();
    if (len > 0.0) Z.row(i) *= norm / len;
  }
  return Z;
}

}  // namespace advfeat
