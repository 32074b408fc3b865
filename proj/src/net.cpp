#include "advfeat/net.hpp"

#include <cmath>

namespace advfeat {

void NetworkConfig::validate() const {
  if (d < 1) throw std::invalid_argument("network input dim must be >= 1");
  if (m < 1) throw std::invalid_argument("hidden width must be >= 1");
  if (m_plus < 0 && m % 2 != 0) {
    throw std::invalid_argument("balanced last layer needs even m");
  }
  if (m_plus >= 0 && m_plus > m) {
    throw std::invalid_argument("m_plus cannot exceed m");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("leaky slope gamma must lie in (0,1)");
  }
  if (init_scale < 0.0) {
    throw std::invalid_argument("init_scale must be non-negative");
  }
}

Eigen::VectorXd last_layer(const NetworkConfig& cfg) {
  double a = 1.0 / std::sqrt(static_cast<double>(cfg.m));
  Eigen::VectorXd out(cfg.m);
  out.head(cfg.mplus()).setConstant(a);
  out.tail(cfg.mminus()).setConstant(-a);
  return out;
}

NetworkParams init_params(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  NetworkParams p;
  p.W.resize(cfg.m, cfg.d);
  if (cfg.init_scale == 0.0) {
    p.W.setZero();
    return p;
  }
  Rng rng = Rng(seed).fork("init");
  double sd = cfg.init_scale / std::sqrt(static_cast<double>(cfg.d));
  for (int j = 0; j < cfg.m; ++j)
    for (Eigen::Index k = 0; k < cfg.d; ++k) p.W(j, k) = sd * rng.gaussian();
  return p;
}

double forward(const NetworkParams& p, const NetworkConfig& cfg,
               const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != p.W.cols()) {
    throw std::invalid_argument("input dimension mismatch");
  }
  Eigen::VectorXd s = p.W * x;
  double g = cfg.gamma;
  double acc = 0.0;
  int mp = cfg.mplus();
  for (int j = 0; j < cfg.m; ++j) {
    double act = leaky(s[j], g);
    acc += (j < mp) ? act : -act;
  }
  return acc / std::sqrt(static_cast<double>(cfg.m));
}

Eigen::VectorXd forward_batch(const NetworkParams& p, const NetworkConfig& cfg,
                              const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.cols() != p.W.cols()) {
    throw std::invalid_argument("input dimension mismatch");
  }
  Eigen::MatrixXd S;
  S.noalias() = X * p.W.transpose();  // N x m pre-activations
  double g = cfg.gamma;
  S = S.unaryExpr([g](double z) { return leaky(z, g); });
  return S * last_layer(cfg);
}

namespace {

// d loss / d margin, already divided by N.
double loss_slope(double margin, LossKind kind, Eigen::Index n) {
  double dn = static_cast<double>(n);
  if (kind == LossKind::exponential) return -std::exp(-margin) / dn;
  // logistic: l'(z) = -1 / (1 + e^z)
  return -1.0 / ((1.0 + std::exp(margin)) * dn);
}

double loss_value(double margin, LossKind kind) {
  if (kind == LossKind::exponential) return std::exp(-margin);
  // softplus(-z), overflow-safe on both sides
  if (margin > 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

}  // namespace

double loss(const NetworkParams& p, const NetworkConfig& cfg,
            const Dataset& ds, LossKind kind) {
  Eigen::VectorXd f = forward_batch(p, cfg, ds.X);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    acc += loss_value(ds.y[i] * f[i], kind);
  }
  return acc / static_cast<double>(ds.n());
}

BatchEval grad_loss_with_outputs(const NetworkParams& p,
                                 const NetworkConfig& cfg, const Dataset& ds,
                                 LossKind kind) {
  if (ds.d() != p.W.cols()) {
    throw std::invalid_argument("input dimension mismatch");
  }
  Eigen::MatrixXd S;
  S.noalias() = ds.X * p.W.transpose();  // N x m
  Eigen::VectorXd a = last_layer(cfg);
  double g = cfg.gamma;

  Eigen::VectorXd f(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < cfg.m; ++j) acc += a[j] * leaky(S(i, j), g);
    f[i] = acc;
  }

  // dL/dS_ij = l'(y_i f_i) * y_i * a_j * phi'(S_ij)
  Eigen::MatrixXd D(ds.n(), cfg.m);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    double c = loss_slope(ds.y[i] * f[i], kind, ds.n()) * ds.y[i];
    for (int j = 0; j < cfg.m; ++j) {
      D(i, j) = c * a[j] * leaky_slope(S(i, j), g);
    }
  }
  BatchEval out;
  out.grad.noalias() = D.transpose() * ds.X;
  out.f = std::move(f);
  return out;
}

Eigen::MatrixXd grad_loss(const NetworkParams& p, const NetworkConfig& cfg,
                          const Dataset& ds, LossKind kind) {
  return grad_loss_with_outputs(p, cfg, ds, kind).grad;
}

Eigen::VectorXd grad_input(const NetworkParams& p, const NetworkConfig& cfg,
                           const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != p.W.cols()) {
    throw std::invalid_argument("input dimension mismatch");
  }
  Eigen::VectorXd s = p.W * x;
  Eigen::VectorXd a = last_layer(cfg);
  double g = cfg.gamma;
  Eigen::VectorXd coeff(cfg.m);
  for (int j = 0; j < cfg.m; ++j) coeff[j] = a[j] * leaky_slope(s[j], g);
  return p.W.transpose() * coeff;
}

}  // namespace advfeat
