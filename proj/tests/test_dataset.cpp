#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "advfeat/dataset.hpp"
#include "advfeat/theory.hpp"

using namespace advfeat;

TEST_CASE("uniform entries live in [-scale, scale] and labels in {+1,-1}") {
  Dataset ds = gen_dataset(Source::uniform, 4, 2, 7, 1.0);
  CHECK(ds.X.rows() == 2);
  CHECK(ds.X.cols() == 4);
  CHECK(ds.X.minCoeff() >= -1.0);
  CHECK(ds.X.maxCoeff() <= 1.0);
  for (Eigen::Index i = 0; i < ds.y.size(); ++i) {
    CHECK((ds.y[i] == 1.0 || ds.y[i] == -1.0));
  }
  validate(ds);
}

TEST_CASE("generation is a pure function of its arguments") {
  Dataset a = gen_dataset(Source::gaussian, 16, 8, 123, 2.0);
  Dataset b = gen_dataset(Source::gaussian, 16, 8, 123, 2.0);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  Dataset c = gen_dataset(Source::gaussian, 16, 8, 124, 2.0);
  CHECK(a.X != c.X);
}

TEST_CASE("gaussian norm concentration at d=3000") {
  // |x|^2 has mean d and sd sqrt(2d); 5*sqrt(3000) is 3.5 sigma, so the hit
  // rate over seeds must clear 99% comfortably.
  const int trials = 1000;
  const double d = 3000.0;
  int hits = 0;
  for (int s = 0; s < trials; ++s) {
    Dataset ds = gen_dataset(Source::gaussian, 3000, 1,
                             static_cast<std::uint64_t>(s), 1.0);
    if (std::abs(ds.X.row(0).squaredNorm() - d) <= 5.0 * std::sqrt(d)) ++hits;
  }
  CHECK(hits >= 990);
}

TEST_CASE("uniform norm concentration matches the stated tail bound") {
  // max_n | |X|^2 - d/3 | <= sqrt(d ln(tN))/2 with probability at least
  // (1 - 2/(tN))^N at t = 1000, N = 1.
  const int trials = 1000;
  const double d = 3000.0;
  const double bound = std::sqrt(d * std::log(1000.0)) / 2.0;
  int hits = 0;
  for (int s = 0; s < trials; ++s) {
    Dataset ds = gen_dataset(Source::uniform, 3000, 1,
                             static_cast<std::uint64_t>(s) + 999, 1.0);
    if (std::abs(ds.X.row(0).squaredNorm() - d / 3.0) <= bound) ++hits;
  }
  double stated = 1.0 - 2.0 / 1000.0;
  CHECK(static_cast<double>(hits) / trials >= stated - 0.03);
}

TEST_CASE("uniform vector norm bound holds at small scale") {
  const Eigen::Index n = 8, d = 64;  // d >= 2 ln(1000 N) ~ 18
  const int trials = 200;
  const double bound =
      std::sqrt(static_cast<double>(d) * std::log(1000.0 * n)) / 2.0;
  int hits = 0;
  for (int s = 0; s < trials; ++s) {
    Dataset ds =
        gen_dataset(Source::uniform, d, n, static_cast<std::uint64_t>(s), 1.0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(ds.X.row(i).squaredNorm() -
                                       static_cast<double>(d) / 3.0));
    }
    if (worst <= bound) ++hits;
  }
  double stated = std::pow(1.0 - 2.0 / (1000.0 * n), static_cast<double>(n));
  CHECK(static_cast<double>(hits) / trials >= stated - 0.03);
}

TEST_CASE("orthogonal triple in R^3 is orthonormal") {
  Dataset ds = gen_orthogonal_dataset(3, 3, 0, 1.0);
  Eigen::MatrixXd gram = ds.X * ds.X.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
        1e-9);
}

TEST_CASE("orthogonalized 512x64 instance meets its contract") {
  const double norm = std::sqrt(512.0);
  Dataset ds = gen_orthogonal_dataset(512, 64, 5, norm);
  OrthoStats st = ortho_stats(ds);
  CHECK(st.p_max <= 1e-6);
  CHECK(st.r_max == doctest::Approx(norm).epsilon(1e-9));
  CHECK(st.r_min == doctest::Approx(norm).epsilon(1e-9));

  ConditionReport rep = check_orthogonality_condition(st, ds.n(), 0.5);
  CHECK(rep.pass);
  CHECK(rep.lhs == doctest::Approx(0.125 * 512.0 / 192.0).epsilon(1e-6));
}

TEST_CASE("orthogonalization rejects n > d") {
  CHECK_THROWS_AS(gen_orthogonal_dataset(4, 5, 0, 1.0), std::invalid_argument);
}

TEST_CASE("gen_dataset rejects unknown generable sources") {
  CHECK_THROWS_AS(gen_dataset(Source::orthogonalized, 4, 2, 0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_dataset(Source::file, 4, 2, 0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(source_from_name("pareto"), std::invalid_argument);
}

TEST_CASE("ortho_stats hand cases") {
  Dataset ds;
  ds.X.resize(2, 2);
  ds.X << 1, 0, 0, 1;
  ds.y.resize(2);
  ds.y << 1, -1;
  OrthoStats st = ortho_stats(ds);
  CHECK(st.r_max == 1.0);
  CHECK(st.r_min == 1.0);
  CHECK(st.p_max == 0.0);

  ds.X << 2, 0, 1, 1;
  st = ortho_stats(ds);
  CHECK(st.r_max == doctest::Approx(2.0));
  CHECK(st.r_min == doctest::Approx(std::sqrt(2.0)));
  CHECK(st.p_max == doctest::Approx(2.0));
}

TEST_CASE("single sample has p_max zero by convention") {
  Dataset ds;
  ds.X.resize(1, 3);
  ds.X << 1, 2, 3;
  ds.y.resize(1);
  ds.y << 1;
  CHECK(ortho_stats(ds).p_max == 0.0);
}

TEST_CASE("ortho_stats agrees with the brute-force double loop") {
  Rng rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(15));
    Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(8));
    Dataset ds = gen_dataset(Source::gaussian, d, n, rng.next_u64(), 1.0);
    OrthoStats st = ortho_stats(ds);

    double rmax = 0.0, rmin = 1e300, pmax = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double nn = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) nn += ds.X(i, j) * ds.X(i, j);
      nn = std::sqrt(nn);
      rmax = std::max(rmax, nn);
      rmin = std::min(rmin, nn);
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == i) continue;
        double ip = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) ip += ds.X(i, j) * ds.X(k, j);
        pmax = std::max(pmax, std::abs(ip));
      }
    }
    CHECK(st.r_max == rmax);
    CHECK(st.r_min == rmin);
    CHECK(st.p_max == doctest::Approx(pmax).epsilon(1e-12));
  }
}

TEST_CASE("validate rejects broken datasets") {
  Dataset ds = gen_dataset(Source::uniform, 4, 2, 7, 1.0);
  ds.y[0] = 0.5;
  CHECK_THROWS_AS(validate(ds), std::invalid_argument);
  ds = gen_dataset(Source::uniform, 4, 2, 7, 1.0);
  ds.X(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(ds), std::invalid_argument);
}
