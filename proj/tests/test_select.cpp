#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "fusim/errors.hpp"
#include "fusim/select.hpp"

using namespace fusim;

namespace {

SensorSpec make_sensor(const std::string& id, SensorRole role, double fov_start,
                       double fov_end) {
  SensorSpec s;
  s.id = id;
  s.role = role;
  s.fov = normalize_fov({{fov_start, fov_end}});
  s.frame_bytes = 1000;
  s.sample_interval_ms = 100.0;
  return s;
}

AffinityMatrix affinity_with_weights(const std::vector<std::pair<std::string, double>>& w,
                                     FusionCriterion criterion = FusionCriterion::Consistency) {
  AffinityMatrix affinity;
  SlowSensorAffinity entry;
  entry.criterion = criterion;
  for (const auto& [id, weight] : w) {
    entry.weights[id] = weight;
    entry.in_view.push_back(id);
  }
  std::sort(entry.in_view.begin(), entry.in_view.end());
  affinity.slow["slow"] = std::move(entry);
  return affinity;
}

// Exhaustive maximum of the size-k subset-sum objective.
double brute_force_best(const std::vector<double>& weights, int k) {
  const int n = static_cast<int>(weights.size());
  double best = -1.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) sum += weights[static_cast<size_t>(i)];
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace

TEST_CASE("fov iou identities") {
  const auto a = make_sensor("a", SensorRole::Fast, 0, 90);
  SUBCASE("identical views give 1") {
    CHECK(fov_iou(a, a) == doctest::Approx(1.0));
  }
  SUBCASE("disjoint views give 0") {
    const auto b = make_sensor("b", SensorRole::Fast, 180, 270);
    CHECK(fov_iou(a, b) == doctest::Approx(0.0));
  }
  SUBCASE("partial overlap: [0,90) vs [45,135) is one third") {
    const auto b = make_sensor("b", SensorRole::Fast, 45, 135);
    CHECK(fov_iou(a, b) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("symmetry") {
    const auto b = make_sensor("b", SensorRole::Fast, 45, 135);
    CHECK(fov_iou(a, b) == doctest::Approx(fov_iou(b, a)));
  }
  SUBCASE("wrap-around overlap") {
    const auto front = make_sensor("f", SensorRole::Fast, 315, 45);
    const auto right = make_sensor("r", SensorRole::Fast, 0, 90);
    // intersection [0,45) = 45, union 90 + 90 - 45 = 135
    CHECK(fov_iou(front, right) == doctest::Approx(45.0 / 135.0));
  }
}

TEST_CASE("criterion: full-view slow sensor with overlapping cameras") {
  const auto slow = make_sensor("lidar", SensorRole::Slow, 0, 360);
  std::vector<SensorSpec> cams;
  for (int i = 0; i < 5; ++i)
    cams.push_back(make_sensor("cam" + std::to_string(i), SensorRole::Fast,
                               i * 60.0, i * 60.0 + 90.0));
  std::vector<const SensorSpec*> ptrs;
  for (const auto& c : cams) ptrs.push_back(&c);

  const auto decision = affinity_criterion(slow, ptrs);
  CHECK(decision.criterion == FusionCriterion::Complementarity);
  CHECK(decision.in_view.size() == 5);
}

TEST_CASE("criterion: front slow sensor with a rear camera flips to consistency") {
  const auto slow = make_sensor("lidar", SensorRole::Slow, 315, 45);
  const auto rear = make_sensor("rear", SensorRole::Fast, 135, 225);
  const auto front = make_sensor("front", SensorRole::Fast, 0, 90);
  const std::vector<const SensorSpec*> ptrs = {&rear, &front};

  const auto decision = affinity_criterion(slow, ptrs);
  CHECK(decision.criterion == FusionCriterion::Consistency);
  REQUIRE(decision.in_view.size() == 1);
  CHECK(decision.in_view[0] == "front");
}

TEST_CASE("criterion: single partially overlapping fast sensor") {
  const auto slow = make_sensor("lidar", SensorRole::Slow, 0, 180);
  const auto cam = make_sensor("cam", SensorRole::Fast, 90, 270);
  const std::vector<const SensorSpec*> ptrs = {&cam};
  const auto decision = affinity_criterion(slow, ptrs);
  CHECK(decision.criterion == FusionCriterion::Complementarity);
  REQUIRE(decision.in_view.size() == 1);
  CHECK(decision.in_view[0] == "cam");
}

TEST_CASE("selection size follows the floor rule with the nonzero bump") {
  CHECK(select_k(5, MissingRate{0.5}) == 2);
  CHECK(select_k(3, MissingRate{0.2}) == 1);  // floor(0.6) = 0 -> 1
  CHECK(select_k(0, MissingRate{0.9}) == 0);
  CHECK(select_k(4, MissingRate{1.0}) == 4);
  CHECK(select_k(6, MissingRate{0.0}) == 1);
}

TEST_CASE("selection size is monotone in the missing rate") {
  for (int v = 1; v <= 8; ++v) {
    int prev = 0;
    for (double r = 0.0; r <= 1.0; r += 0.05) {
      const int k = select_k(v, MissingRate{r});
      CHECK(k >= prev);
      CHECK(k >= 1);
      CHECK(k <= v);
      prev = k;
    }
  }
}

TEST_CASE("subgraph selection picks the paper-ranked sensor at k = 1") {
  const auto affinity = affinity_with_weights({{"b1", 0.530}, {"b2", 0.272}, {"b3", 0.198}});
  const auto plan = select_subgraph(affinity, "slow", MissingRate{0.2});
  REQUIRE(plan.k == 1);
  REQUIRE(plan.selected.size() == 1);
  CHECK(plan.selected[0].first == "b1");
  CHECK(plan.selected[0].second == doctest::Approx(1.0));
  CHECK(plan.objective == doctest::Approx(0.530));
}

TEST_CASE("subgraph selection takes everything at r = 1") {
  const auto affinity = affinity_with_weights({{"b1", 0.530}, {"b2", 0.272}, {"b3", 0.198}});
  const auto plan = select_subgraph(affinity, "slow", MissingRate{1.0});
  CHECK(plan.k == 3);
  CHECK(plan.objective == doctest::Approx(1.0));
  double sum = 0.0;
  for (const auto& [id, w] : plan.selected) sum += w;
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("subgraph objective matches brute-force subset enumeration") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> size_dist(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size_dist(rng);
    std::vector<std::pair<std::string, double>> weights;
    std::vector<double> raw;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = uni(rng);
      weights.emplace_back("s" + std::to_string(i), w);
      total += w;
    }
    for (auto& [id, w] : weights) {
      w /= total;
      raw.push_back(w);
    }
    const double r = uni(rng);
    const auto affinity = affinity_with_weights(weights);
    const auto plan = select_subgraph(affinity, "slow", MissingRate{r});
    CHECK(plan.objective ==
          doctest::Approx(brute_force_best(raw, plan.k)).epsilon(1e-12));
  }
}

TEST_CASE("zero-weight alternatives never change the selected set") {
  const auto base = affinity_with_weights({{"a", 0.6}, {"b", 0.4}});
  const auto extended = affinity_with_weights({{"a", 0.6}, {"b", 0.4}, {"zz", 0.0}});
  for (const double r : {0.3, 0.6, 0.9}) {
    const auto p1 = select_subgraph(base, "slow", MissingRate{r});
    const auto p2 = select_subgraph(extended, "slow", MissingRate{r});
    std::vector<std::string> ids1, ids2;
    for (const auto& [id, w] : p1.selected) ids1.push_back(id);
    for (const auto& [id, w] : p2.selected) ids2.push_back(id);
    // k may grow with the extra candidate, but every originally selected
    // sensor must stay selected and no zero-weight sensor may displace one
    for (const auto& id : ids1)
      CHECK(std::find(ids2.begin(), ids2.end(), id) != ids2.end());
  }
}

TEST_CASE("ties break deterministically by ascending id") {
  const auto affinity = affinity_with_weights({{"x", 0.25}, {"m", 0.25}, {"a", 0.25}, {"z", 0.25}});
  const auto plan = select_subgraph(affinity, "slow", MissingRate{0.5});
  REQUIRE(plan.k == 2);
  CHECK(plan.selected[0].first == "a");
  CHECK(plan.selected[1].first == "m");
}

TEST_CASE("unknown slow id is rejected") {
  const auto affinity = affinity_with_weights({{"a", 1.0}});
  CHECK_THROWS_AS(select_subgraph(affinity, "missing", MissingRate{0.5}), ValidationError);
}
