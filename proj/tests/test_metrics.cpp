#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "flowsim/metrics.hpp"

using namespace flowsim;

TEST_CASE("accuracy and f1 point values") {
  CHECK(*accuracy({5, 0, 0, 5}) == doctest::Approx(1.0));
  CHECK(*accuracy({1, 1, 1, 1}) == doctest::Approx(0.5));
  CHECK(*accuracy({2, 1, 1, 3}) == doctest::Approx(5.0 / 7.0));
  CHECK_FALSE(accuracy({0, 0, 0, 0}).has_value());

  CHECK(*f1({2, 1, 1, 0}) == doctest::Approx(4.0 / 6.0));
  CHECK(*f1({5, 0, 0, 5}) == doctest::Approx(1.0));
  CHECK(*f1({0, 0, 3, 0}) == doctest::Approx(0.0));
  CHECK_FALSE(f1({0, 0, 0, 0}).has_value());
}

TEST_CASE("mcc point values") {
  CHECK(mcc({5, 0, 0, 5}) == doctest::Approx(1.0));
  CHECK(mcc({1, 1, 1, 1}) == doctest::Approx(0.0));
  // tp=2, fn=1, fp=1, tn=3: (6-1)/sqrt(3*3*4*4) = 5/12
  CHECK(mcc({2, 1, 1, 3}) == doctest::Approx(5.0 / 12.0).epsilon(1e-12));
  CHECK(mcc({0, 0, 0, 0}) == 0.0);
  CHECK(mcc({3, 0, 0, 0}) == 0.0);  // zero factor in the denominator
}

TEST_CASE("decomposed form matches the direct form") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20000; ++i) {
    ConfusionMatrix cm{rng() % 1000, rng() % 1000, rng() % 1000, rng() % 1000};
    if (i % 7 == 0) cm.tp = 0;
    if (i % 11 == 0) cm.fn = cm.fp = 0;
    CHECK(std::abs(mcc(cm) - mcc_decomposed(cm)) <= 1e-12);
    CHECK(mcc(cm) >= -1.0);
    CHECK(mcc(cm) <= 1.0);
  }
}

TEST_CASE("mcc symmetry properties") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5000; ++i) {
    ConfusionMatrix cm{rng() % 100, rng() % 100, rng() % 100, rng() % 100};
    ConfusionMatrix cls{cm.tn, cm.fp, cm.fn, cm.tp};     // tp<->tn, fp<->fn
    ConfusionMatrix neg{cm.fp, cm.tn, cm.tp, cm.fn};     // tp<->fp, tn<->fn
    CHECK(mcc(cm) == doctest::Approx(mcc(cls)).epsilon(1e-12));
    CHECK(mcc(cm) == doctest::Approx(-mcc(neg)).epsilon(1e-12));
  }
  // fp = fn = 0 with both classes present is a perfect predictor.
  CHECK(mcc({7, 0, 0, 123}) == doctest::Approx(1.0));
}

namespace {

TrainingEvent make_event(TrainKind kind, std::vector<int8_t> weights, uint64_t packet = 0,
                         bool on_hit = false) {
  TrainingEvent ev;
  ev.kind = kind;
  ev.applied = true;
  ev.on_hit = on_hit;
  ev.packet_index = packet;
  ev.weights = std::move(weights);
  for (size_t i = 0; i < ev.weights.size(); ++i) ev.vector.push_back({FeatureId(i), 0});
  return ev;
}

}  // namespace

TEST_CASE("per-feature confusion follows the stored weight sign") {
  std::vector<TrainingEvent> events;
  events.push_back(make_event(TrainKind::TruePositive, {+3}));   // truth Active, votes Active
  events.push_back(make_event(TrainKind::FalseNegative, {-2}));  // truth Active, votes Dormant
  events.push_back(make_event(TrainKind::TrueNegative, {0}));    // abstains

  auto rows = per_feature_confusion(events, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].cm.tp == 1);
  CHECK(rows[0].cm.fn == 1);
  CHECK(rows[0].cm.fp == 0);
  CHECK(rows[0].cm.tn == 0);
  CHECK(rows[0].abstain == 1);
}

TEST_CASE("influence point values") {
  SUBCASE("single TP event") {
    InfluenceAccumulator acc;
    acc.sums.assign(1, {});
    acc.counts.tp = 1;
    acc.sums[0].tp = 5;
    CHECK(influence_correct(acc, 0) == doctest::Approx(5.0));
    CHECK(influence_incorrect(acc, 0) == doctest::Approx(0.0));
  }
  SUBCASE("single FP event contributes negatively") {
    InfluenceAccumulator acc;
    acc.sums.assign(1, {});
    acc.counts.fp = 1;
    acc.sums[0].fp = 4;
    CHECK(influence_incorrect(acc, 0) == doctest::Approx(-4.0));
  }
  SUBCASE("two TPs and one TN combine") {
    InfluenceAccumulator acc;
    acc.sums.assign(1, {});
    acc.counts.tp = 2;
    acc.counts.tn = 1;
    acc.sums[0].tp = 3 + 1;
    acc.sums[0].tn = -2;
    CHECK(influence_correct(acc, 0) == doctest::Approx(4.0));  // 2 - (-2)
    CHECK(influence_total(acc, 0) == doctest::Approx(4.0));
  }
}

TEST_CASE("influence accumulates through the stats stream") {
  TrainingStats stats(1, 100);
  stats.add(make_event(TrainKind::TruePositive, {+3}));
  stats.add(make_event(TrainKind::TruePositive, {+1}));
  stats.add(make_event(TrainKind::TrueNegative, {-2}));
  const InfluenceAccumulator& acc = stats.influence();
  CHECK(influence_correct(acc, 0) == doctest::Approx(4.0));
  CHECK(stats.system().tp == 2);
  CHECK(stats.system().tn == 1);

  // A feature that always outputs zero weight has zero total influence.
  TrainingStats zero(1, 100);
  zero.add(make_event(TrainKind::TruePositive, {0}));
  zero.add(make_event(TrainKind::FalsePositive, {0}));
  CHECK(influence_total(zero.influence(), 0) == doctest::Approx(0.0));
}

TEST_CASE("bias series averages per epoch") {
  std::vector<TrainingEvent> events;
  events.push_back(make_event(TrainKind::TruePositive, {+2}, 0));
  events.push_back(make_event(TrainKind::TruePositive, {+2}, 5));
  events.push_back(make_event(TrainKind::TruePositive, {+3}, 10));
  events.push_back(make_event(TrainKind::TruePositive, {-3}, 12));

  BiasSeries bias = bias_series(events, 1, 10);
  REQUIRE(bias.mean_weight.size() == 1);
  REQUIRE(bias.mean_weight[0].size() == 2);
  CHECK(*bias.mean_weight[0][0] == doctest::Approx(2.0));
  CHECK(*bias.mean_weight[0][1] == doctest::Approx(0.0));  // balanced +3/-3

  // Empty epochs stay absent.
  std::vector<TrainingEvent> sparse{make_event(TrainKind::TruePositive, {+1}, 25)};
  BiasSeries gap = bias_series(sparse, 1, 10);
  REQUIRE(gap.mean_weight[0].size() == 3);
  CHECK_FALSE(gap.mean_weight[0][0].has_value());
  CHECK_FALSE(gap.mean_weight[0][1].has_value());
  CHECK(gap.mean_weight[0][2].has_value());

  CHECK_THROWS_AS(bias_series(events, 1, 0), std::invalid_argument);
}

TEST_CASE("reuse and bypass families are split by inference context") {
  TrainingStats stats(1, 100);
  stats.add(make_event(TrainKind::TruePositive, {+1}, 0, /*on_hit=*/true));
  stats.add(make_event(TrainKind::FalsePositive, {+1}, 1, /*on_hit=*/false));
  CHECK(stats.system(EventFamily::Reuse).tp == 1);
  CHECK(stats.system(EventFamily::Reuse).fp == 0);
  CHECK(stats.system(EventFamily::Bypass).fp == 1);
  CHECK(stats.system(EventFamily::All).total() == 2);
}

TEST_CASE("lifecycle arithmetic") {
  LifecycleRecord r{100, 150, 200, false};
  CHECK(lifecycle_lifetime(r) == 50);
  CHECK(lifecycle_deadtime(r) == 50);
  CHECK(lifecycle_efficiency(r) == doctest::Approx(0.5));
  CHECK(lifecycle_efficiency({100, 100, 200, false}) == doctest::Approx(0.0));
  CHECK(lifecycle_efficiency({100, 200, 200, false}) == doctest::Approx(1.0));
  CHECK(lifecycle_efficiency({100, 100, 100, false}) == 0.0);  // point residency
}

TEST_CASE("lifecycle stats reject malformed records") {
  std::vector<LifecycleRecord> records = {
      {100, 150, 200, false}, {100, 100, 200, false}, {100, 200, 150, false},  // tL > tE
  };
  LifecycleStats stats = lifecycle_stats(records);
  CHECK(stats.records == 2);
  CHECK(stats.rejected == 1);
  CHECK(stats.efficiency.max <= 1.0);
  CHECK(stats.efficiency.min >= 0.0);
  uint64_t mass = 0;
  for (uint64_t c : stats.efficiency_histogram) mass += c;
  CHECK(mass == stats.records);
}

TEST_CASE("processing time estimate") {
  CHECK(estimate_appt({1, 100}, 0.3) == doctest::Approx(31.0));
  CHECK(estimate_appt({1, 100}, 0.0) == doctest::Approx(1.0));
  CHECK(estimate_appt({1, 100}, 1.0) == doctest::Approx(101.0));
  CHECK_THROWS_AS(estimate_appt({1, 100}, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(estimate_appt({100, 1}, 0.5), std::invalid_argument);
}
