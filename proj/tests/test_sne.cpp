#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fusim/errors.hpp"
#include "fusim/sne.hpp"

using namespace fusim;

namespace {

Eigen::MatrixXd random_points(int n, int d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = gauss(rng);
  return x;
}

// Independent entropy evaluation of the conditional distribution p_{.|i}.
double conditional_entropy_bits(const Eigen::MatrixXd& x, const Eigen::VectorXd& sigmas,
                                int i) {
  const int n = static_cast<int>(x.rows());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  double z = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double d2 = (x.row(i) - x.row(j)).squaredNorm();
    p[j] = std::exp(-d2 / (2.0 * sigmas[i] * sigmas[i]));
    z += p[j];
  }
  double h = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double pj = p[j] / z;
    if (pj > 0.0) h -= pj * std::log2(pj);
  }
  return h;
}

double embedding_cost_at(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
  return kl_cost(p, low_dim_affinities(y));
}

}  // namespace

TEST_CASE("calibrated sigmas hit the target entropy on two far clusters") {
  Eigen::MatrixXd x(6, 2);
  x << 0.0, 0.0, 0.1, 0.0, 0.0, 0.1,
       100.0, 100.0, 100.1, 100.0, 100.0, 100.1;
  const double perplexity = 2.0;
  const auto sigmas = calibrate_sigmas(x, perplexity);
  for (int i = 0; i < 6; ++i) {
    CHECK(conditional_entropy_bits(x, sigmas, i) ==
          doctest::Approx(std::log2(perplexity)).epsilon(1e-4));
    // sigma stays small relative to the ~140-unit inter-cluster gap
    CHECK(sigmas[i] < 10.0);
  }
}

TEST_CASE("identical points give sigma = 1") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 3);
  const auto sigmas = calibrate_sigmas(x, 2.0);
  for (int i = 0; i < 5; ++i) CHECK(sigmas[i] == 1.0);
}

TEST_CASE("perplexity at or above n is rejected") {
  const auto x = random_points(5, 2, 1);
  CHECK_THROWS_AS(calibrate_sigmas(x, 5.0), ValidationError);
  CHECK_THROWS_AS(calibrate_sigmas(x, 7.0), ValidationError);
}

TEST_CASE("conditional probabilities: n = 2 single-neighbor case") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 3.0;
  Eigen::VectorXd sigmas = Eigen::VectorXd::Ones(2);
  const auto p = joint_probabilities(x, sigmas);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(1, 1) == 0.0);
  CHECK(p(0, 1) == doctest::Approx(1.0));
  CHECK(p(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("conditional probabilities: three equidistant points are uniform") {
  Eigen::MatrixXd x(3, 2);
  x << 0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;
  Eigen::VectorXd sigmas = Eigen::VectorXd::Constant(3, 0.7);
  const auto p = joint_probabilities(x, sigmas);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(p(i, j) == doctest::Approx(i == j ? 0.0 : 0.5));
}

TEST_CASE("conditional probability rows sum to one") {
  const auto x = random_points(10, 3, 42);
  const auto sigmas = calibrate_sigmas(x, 3.0);
  const auto p = joint_probabilities(x, sigmas);
  for (int i = 0; i < 10; ++i) {
    double row = 0.0;
    for (int j = 0; j < 10; ++j) row += p(i, j);  // independent summation
    CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("low-dim affinities: two points at distance one") {
  Eigen::MatrixXd y(2, 1);
  y << 0.0, 1.0;
  const auto q = low_dim_affinities(y);
  CHECK(q(0, 1) == doctest::Approx(0.5));
  CHECK(q(1, 0) == doctest::Approx(0.5));
  CHECK(q(0, 0) == 0.0);
}

TEST_CASE("low-dim affinities: coincident points are uniform") {
  const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(4, 2);
  const auto q = low_dim_affinities(y);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(q(i, j) == doctest::Approx(i == j ? 0.0 : 1.0 / 12.0));
}

TEST_CASE("low-dim affinities sum to one globally") {
  const auto y = random_points(9, 2, 3);
  const auto q = low_dim_affinities(y);
  double total = 0.0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) total += q(i, j);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("kl cost is zero when P equals Q") {
  const auto y = random_points(6, 2, 4);
  const auto q = low_dim_affinities(y);
  CHECK(kl_cost(q, q) == doctest::Approx(0.0));
}

TEST_CASE("kl cost matches a hand-computed three-point value") {
  Eigen::MatrixXd p(3, 3);
  p << 0.0, 0.3, 0.1,
       0.3, 0.0, 0.1,
       0.1, 0.1, 0.0;
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(3, 3, 1.0 / 6.0);
  q.diagonal().setZero();
  // 2 * (0.3 ln 1.8 + 0.1 ln 0.6 + 0.1 ln 0.6), evaluated by hand
  const double expected = 2.0 * (0.3 * std::log(1.8) + 0.2 * std::log(0.6));
  CHECK(kl_cost(p, q) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kl cost is nonnegative for matched normalizations") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5;
    Eigen::MatrixXd p(n, n), q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        p(i, j) = i == j ? 0.0 : uni(rng);
        q(i, j) = i == j ? 0.0 : uni(rng);
      }
    p /= p.sum();
    q /= q.sum();
    CHECK(kl_cost(p, q) >= -1e-12);
  }
}

TEST_CASE("kl gradient vanishes when P equals Q") {
  const auto y = random_points(6, 2, 5);
  const auto q = low_dim_affinities(y);
  const auto grad = kl_gradient(q, q, y);
  CHECK(grad.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("kl gradient matches central finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const int n = 6, d = 3, target = 2;
    const auto x = random_points(n, d, 100 + seed);
    const auto sigmas = calibrate_sigmas(x, 1.5);
    const auto p = symmetrize_conditionals(joint_probabilities(x, sigmas));
    auto y = random_points(n, target, 200 + seed, 0.5);

    const auto analytic = kl_gradient(p, low_dim_affinities(y), y);
    const double h = 1e-5;
    Eigen::MatrixXd fd(n, target);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < target; ++k) {
        auto yp = y;
        auto ym = y;
        yp(i, k) += h;
        ym(i, k) -= h;
        fd(i, k) = (embedding_cost_at(p, yp) - embedding_cost_at(p, ym)) / (2.0 * h);
      }
    }
    const double rel = (analytic - fd).norm() / fd.norm();
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("kl gradient is invariant under global translation") {
  const auto x = random_points(7, 3, 17);
  const auto sigmas = calibrate_sigmas(x, 2.0);
  const auto p = symmetrize_conditionals(joint_probabilities(x, sigmas));
  const auto y = random_points(7, 2, 18, 0.5);
  const auto q = low_dim_affinities(y);
  const Eigen::MatrixXd shifted = y.rowwise() + Eigen::RowVector2d(3.0, -1.5);
  const auto ga = kl_gradient(p, q, y);
  const auto gb = kl_gradient(p, low_dim_affinities(shifted), shifted);
  CHECK((ga - gb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("embedding separates two Gaussian clusters and lowers the cost") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.3);
  const int per_cluster = 20, d = 5;
  AffinitySample sample;
  sample.points.resize(2 * per_cluster, d);
  for (int i = 0; i < per_cluster; ++i)
    for (int j = 0; j < d; ++j) sample.points(i, j) = noise(rng);
  for (int i = per_cluster; i < 2 * per_cluster; ++i)
    for (int j = 0; j < d; ++j) sample.points(i, j) = 6.0 + noise(rng);
  sample.labels.assign(2 * per_cluster, 0);

  EmbeddingConfig config;
  config.iterations = 300;
  config.seed = 3;
  const auto sol = embed(sample, config);

  CHECK(sol.final_cost < sol.cost_trace.front());
  CHECK(sol.final_cost <= sol.cost_trace.front());

  double intra = 0.0, inter = 0.0;
  int intra_n = 0, inter_n = 0;
  for (int i = 0; i < 2 * per_cluster; ++i) {
    for (int j = i + 1; j < 2 * per_cluster; ++j) {
      const double dist = (sol.embedding.row(i) - sol.embedding.row(j)).norm();
      const bool same = (i < per_cluster) == (j < per_cluster);
      (same ? intra : inter) += dist;
      ++(same ? intra_n : inter_n);
    }
  }
  CHECK(intra / intra_n < inter / inter_n);
}

TEST_CASE("embedding is deterministic for a fixed seed") {
  AffinitySample sample;
  sample.points = random_points(12, 4, 21);
  sample.labels.assign(12, 0);
  EmbeddingConfig config;
  config.iterations = 50;
  config.seed = 99;
  const auto a = embed(sample, config);
  const auto b = embed(sample, config);
  CHECK(a.embedding == b.embedding);  // bitwise
  CHECK(a.final_cost == b.final_cost);
}

TEST_CASE("zero iterations returns the initialization") {
  AffinitySample sample;
  sample.points = random_points(8, 3, 30);
  sample.labels.assign(8, 0);
  EmbeddingConfig config;
  config.iterations = 0;
  config.seed = 1;
  const auto sol = embed(sample, config);
  REQUIRE(sol.cost_trace.size() == 1);
  CHECK(sol.final_cost == sol.cost_trace[0]);
  // drawn from N(0, 1e-4): every coordinate is tiny
  CHECK(sol.embedding.cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("average cosine similarity identities") {
  const auto y = random_points(10, 2, 40);
  CHECK(average_cosine_similarity(y, y).value == doctest::Approx(1.0));

  Eigen::MatrixXd a(3, 2), b(3, 2);
  a << 1, 0, 0, 1, 1, 0;
  b << 0, 1, 1, 0, 0, 1;
  CHECK(average_cosine_similarity(a, b).value == doctest::Approx(0.0));
}

TEST_CASE("average cosine similarity skips zero rows and errors when none left") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 0, 1, 0;
  b << 1, 0, 1, 0;
  const auto result = average_cosine_similarity(a, b);
  CHECK(result.skipped_rows == 1);
  CHECK(result.value == doctest::Approx(1.0));

  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(3, 2);
  CHECK_THROWS_AS(average_cosine_similarity(zeros, zeros), NumericalError);
}

TEST_CASE("average cosine similarity is symmetric and scale invariant") {
  const auto a = random_points(9, 2, 50);
  const auto b = random_points(9, 2, 51);
  const auto ab = average_cosine_similarity(a, b).value;
  const auto ba = average_cosine_similarity(b, a).value;
  CHECK(ab == doctest::Approx(ba));
  CHECK(average_cosine_similarity(3.7 * a, b).value == doctest::Approx(ab));
  CHECK(average_cosine_similarity(a, 0.02 * b).value == doctest::Approx(ab));
}

TEST_CASE("coupled modalities embed more similarly than independent ones") {
  // slow ~ fast0 with small noise; fast1 is unrelated
  std::mt19937_64 rng(60);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int ticks = 24, d = 4;
  Eigen::MatrixXd fast0(ticks, d), fast1(ticks, d), slow(ticks, d);
  for (int t = 0; t < ticks; ++t)
    for (int j = 0; j < d; ++j) {
      fast0(t, j) = gauss(rng);
      fast1(t, j) = gauss(rng);
      slow(t, j) = fast0(t, j) + 0.05 * gauss(rng);
    }

  EmbeddingConfig config;
  config.iterations = 300;
  config.seed = 8;
  const double coupled = pairwise_modality_similarity(slow, fast0, config).value;
  const double decoupled = pairwise_modality_similarity(slow, fast1, config).value;
  CHECK(coupled > decoupled);
}

TEST_CASE("divergence is reported with the iteration number") {
  AffinitySample sample;
  sample.points = random_points(8, 3, 80);
  sample.labels.assign(8, 0);
  EmbeddingConfig config;
  config.iterations = 3;
  config.adam.learning_rate = 1e300;  // blows every point to +-1e300
  CHECK_THROWS_WITH_AS(embed(sample, config), doctest::Contains("iteration"),
                       NumericalError);
}

TEST_CASE("embedding rejects bad shapes") {
  AffinitySample sample;
  sample.points = random_points(3, 4, 70);
  sample.labels.assign(3, 0);
  EmbeddingConfig config;
  CHECK_THROWS_AS(embed(sample, config), ValidationError);  // n < 4

  sample.points = random_points(8, 2, 71);
  sample.labels.assign(8, 0);
  config.target_dim = 2;
  CHECK_THROWS_AS(embed(sample, config), ValidationError);  // target_dim == input dim
}
