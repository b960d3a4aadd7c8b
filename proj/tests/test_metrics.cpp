#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "fusim/errors.hpp"
#include "fusim/metrics.hpp"

using namespace fusim;

namespace {

Eigen::MatrixXd sample_gaussian(int n, int d, double mean, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(mean, 1.0);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = gauss(rng);
  return x;
}

}  // namespace

TEST_CASE("chamfer distance of identical clouds is zero") {
  const auto x = sample_gaussian(15, 3, 0.0, 1);
  CHECK(chamfer_distance(x, x) == doctest::Approx(0.0));
}

TEST_CASE("chamfer distance singleton cases match hand arithmetic") {
  Eigen::MatrixXd x(1, 2), y(1, 2);
  x << 0.0, 0.0;
  y << 3.0, 4.0;
  CHECK(chamfer_distance(x, y) == doctest::Approx(50.0));  // 25 + 25

  Eigen::MatrixXd x2(2, 2), y2(1, 2);
  x2 << 0.0, 0.0, 1.0, 0.0;
  y2 << 0.0, 0.0;
  CHECK(chamfer_distance(x2, y2) == doctest::Approx(1.0));  // 0 + 1 + 0
}

TEST_CASE("chamfer distance is symmetric") {
  const auto x = sample_gaussian(8, 3, 0.0, 2);
  const auto y = sample_gaussian(11, 3, 1.0, 3);
  CHECK(chamfer_distance(x, y) == doctest::Approx(chamfer_distance(y, x)));
}

TEST_CASE("chamfer distance is zero only for equal multisets") {
  Eigen::MatrixXd x(2, 2), y(2, 2);
  x << 0.0, 0.0, 1.0, 1.0;
  y << 1.0, 1.0, 0.0, 0.0;  // same multiset, different order
  CHECK(chamfer_distance(x, y) == doctest::Approx(0.0));

  y(0, 0) = 0.5;
  CHECK(chamfer_distance(x, y) > 0.0);
}

TEST_CASE("chamfer distance rejects bad inputs") {
  Eigen::MatrixXd x(1, 2), empty(0, 2), y3(1, 3);
  x << 0.0, 0.0;
  y3 << 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(chamfer_distance(x, empty), ValidationError);
  CHECK_THROWS_AS(chamfer_distance(x, y3), ValidationError);
}

TEST_CASE("normalized chamfer halves when both directed sums are averaged") {
  Eigen::MatrixXd x(1, 2), y(1, 2);
  x << 0.0, 0.0;
  y << 3.0, 4.0;
  CHECK(chamfer_distance_normalized(x, y) == doctest::Approx(50.0));
  Eigen::MatrixXd x2(2, 2);
  x2 << 0.0, 0.0, 3.0, 4.0;
  // x2 -> y: (25 + 0) / 2 = 12.5; y -> x2: 0 / 1 = 0
  CHECK(chamfer_distance_normalized(x2, y) == doctest::Approx(12.5));
}

TEST_CASE("mmd of a sample with itself is exactly zero") {
  const auto x = sample_gaussian(30, 2, 0.0, 4);
  CHECK(mmd(x, x) == doctest::Approx(0.0));
}

TEST_CASE("mmd separates shifted distributions") {
  const auto x = sample_gaussian(200, 1, 0.0, 5);
  const auto x_prime = sample_gaussian(200, 1, 0.0, 6);
  const auto y = sample_gaussian(200, 1, 5.0, 7);
  CHECK(mmd(x, y) > mmd(x, x_prime));
  CHECK(mmd(x, y) > 0.1);
}

TEST_CASE("mmd is symmetric and nonnegative") {
  const auto x = sample_gaussian(40, 2, 0.0, 8);
  const auto y = sample_gaussian(35, 2, 0.5, 9);
  CHECK(mmd(x, y) == doctest::Approx(mmd(y, x)));
  CHECK(mmd(x, y) >= 0.0);
}

TEST_CASE("mmd vanishes as the bandwidth grows") {
  const auto x = sample_gaussian(50, 2, 0.0, 10);
  const auto y = sample_gaussian(50, 2, 3.0, 11);
  CHECK(mmd(x, y, Bandwidth::Fixed(1e9)) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mmd rejects empty and mismatched inputs") {
  Eigen::MatrixXd x(1, 2), empty(0, 2);
  x << 0.0, 0.0;
  CHECK_THROWS_AS(mmd(x, empty), ValidationError);
}
