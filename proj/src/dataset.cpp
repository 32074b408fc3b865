#include "advfeat/dataset.hpp"

#include <cmath>
#include <limits>

namespace advfeat {

const char* source_name(Source s) {
  switch (s) {
    case Source::uniform: return "uniform";
    case Source::gaussian: return "gaussian";
    case Source::rademacher: return "rademacher";
    case Source::orthogonalized: return "orthogonalized";
    case Source::file: return "file";
  }
  return "unknown";
}

Source source_from_name(const std::string& name) {
  if (name == "uniform") return Source::uniform;
  if (name == "gaussian") return Source::gaussian;
  if (name == "rademacher") return Source::rademacher;
  if (name == "orthogonalized") return Source::orthogonalized;
  if (name == "file") return Source::file;
  throw std::invalid_argument("unknown dataset source: " + name);
}

void validate(const Dataset& ds) {
  if (ds.n() < 1 || ds.d() < 1) {
    throw std::invalid_argument("dataset must have N >= 1 and d >= 1");
  }
  if (ds.y.size() != ds.n()) {
    throw std::invalid_argument("label count does not match sample count");
  }
  if (!ds.X.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite entries");
  }
  for (Eigen::Index i = 0; i < ds.y.size(); ++i) {
    if (ds.y[i] != 1.0 && ds.y[i] != -1.0) {
      throw std::invalid_argument("labels must be exactly +1 or -1");
    }
  }
}

namespace {

Eigen::VectorXd random_labels(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.rademacher();
  return y;
}

}  // namespace

Dataset gen_dataset(Source source, Eigen::Index d, Eigen::Index n,
                    std::uint64_t seed, double scale) {
  if (d < 1 || n < 1) throw std::invalid_argument("need d >= 1 and n >= 1");
  if (scale <= 0.0) throw std::invalid_argument("scale must be positive");
  if (source == Source::orthogonalized) {
    throw std::invalid_argument(
        "orthogonalized datasets come from gen_orthogonal_dataset");
  }
  if (source == Source::file) {
    throw std::invalid_argument("file is not a generable source");
  }

  Rng root(seed);
  Rng xs = root.fork("X");
  Rng ys = root.fork("y");

  Dataset ds;
  ds.X.resize(n, d);
  switch (source) {
    case Source::uniform:
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          ds.X(i, j) = scale * (2.0 * xs.uniform01() - 1.0);
      break;
    case Source::gaussian:
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) ds.X(i, j) = scale * xs.gaussian();
      break;
    case Source::rademacher:
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          ds.X(i, j) = scale * xs.rademacher();
      break;
    default:
      throw std::invalid_argument("unknown dataset source tag");
  }
  ds.y = random_labels(ys, n);
  ds.source = source;
  ds.seed = seed;
  ds.scale = scale;
  return ds;
}

Dataset gen_orthogonal_dataset(Eigen::Index d, Eigen::Index n,
                               std::uint64_t seed, double norm) {
  if (n > d) throw std::invalid_argument("cannot orthogonalize n > d rows");
  if (d < 1 || n < 1) throw std::invalid_argument("need d >= 1 and n >= 1");
  if (norm <= 0.0) throw std::invalid_argument("norm must be positive");

  Rng root(seed);
  Rng xs = root.fork("X");
  Rng ys = root.fork("y");

  Eigen::MatrixXd A(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) A(i, j) = xs.gaussian();

  // Two MGS passes keep the cross products at rounding level even when the
  // seeded rows are poorly conditioned.
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < i; ++k) {
        A.row(i) -= A.row(i).dot(A.row(k)) * A.row(k);
      }
      double len = A.row(i).norm();
      if (len < 1e-12) {
        throw std::runtime_error("degenerate row during orthogonalization");
      }
      A.row(i) /= len;
    }
  }
  A *= norm;

  Dataset ds;
  ds.X = std::move(A);
  ds.y = random_labels(ys, n);
  ds.source = Source::orthogonalized;
  ds.seed = seed;
  ds.scale = norm;
  return ds;
}

OrthoStats ortho_stats(const Dataset& ds) {
  if (ds.n() < 1) throw std::invalid_argument("empty dataset");
  OrthoStats st;
  // Plain left-to-right accumulation for the norms so the statistics agree
  // with a naive reference loop to the last bit.
  st.r_max = 0.0;
  st.r_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < ds.d(); ++j) acc += ds.X(i, j) * ds.X(i, j);
    double len = std::sqrt(acc);
    st.r_max = std::max(st.r_max, len);
    st.r_min = std::min(st.r_min, len);
  }
  st.p_max = 0.0;
  if (ds.n() > 1) {
    Eigen::MatrixXd gram = ds.X * ds.X.transpose();
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      for (Eigen::Index k = i + 1; k < ds.n(); ++k) {
        st.p_max = std::max(st.p_max, std::abs(gram(i, k)));
      }
    }
  }
  return st;
}

}  // namespace advfeat
