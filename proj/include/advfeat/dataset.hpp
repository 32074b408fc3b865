#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

#include "advfeat/rng.hpp"

namespace advfeat {

enum class Source : std::uint8_t {
  uniform = 0,
  gaussian = 1,
  rademacher = 2,
  orthogonalized = 3,
  file = 4,
};

const char* source_name(Source s);
Source source_from_name(const std::string& name);

// N samples as rows of X, labels exactly +1/-1.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Source source = Source::file;
  std::uint64_t seed = 0;
  double scale = 1.0;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }
};

struct OrthoStats {
  double r_max = 0.0;
  double r_min = 0.0;
  double p_max = 0.0;  // max_{n != k} |<x_n, x_k>|, 0 for a single sample
};

// Throws std::invalid_argument if an invariant is broken (labels not in
// {+1,-1}, empty shape, non-finite entries).
void validate(const Dataset& ds);

// Entries i.i.d. from the named distribution times `scale`, labels i.i.d.
// uniform over {+1,-1}.  Pure function of its arguments.
Dataset gen_dataset(Source source, Eigen::Index d, Eigen::Index n,
                    std::uint64_t seed, double scale = 1.0);

// Pairwise-orthogonal rows with common norm `norm`: modified Gram-Schmidt on
// a seeded Gaussian matrix, rows rescaled.  Requires n <= d.
Dataset gen_orthogonal_dataset(Eigen::Index d, Eigen::Index n,
                               std::uint64_t seed, double norm);

OrthoStats ortho_stats(const Dataset& ds);

}  // namespace advfeat
