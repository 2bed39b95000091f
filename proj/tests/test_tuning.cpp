#include "coda/errors.hpp"
#include "coda/tuning.hpp"

#include "support/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace coda;

TEST_SUITE_BEGIN("tuning");

TEST_CASE("split plan blocks") {
  const SplitPlan plan = make_split(100, 10);
  CHECK(plan.train_begin == 0);
  CHECK(plan.train_end == 80);       // years 1..80
  CHECK(plan.validation_begin == 80);
  CHECK(plan.validation_end == 90);  // years 81..90
  CHECK(plan.test_begin == 90);
  CHECK(plan.test_end == 100);       // years 91..100

  const SplitPlan h20 = make_split(100, 20);
  CHECK(h20.train_end == 60);
  CHECK(h20.validation_end == 80);

  CHECK_THROWS_AS(make_split(30, 10), domain_error);
}

TEST_CASE("criterion names parse back") {
  for (const char* name : {"KLD", "JSD_a", "JSD_g", "CPD(0.2)",
                           "interval_score(0.05)"}) {
    const auto parsed = Criterion::parse(name);
    REQUIRE(parsed.has_value());
    CHECK(parsed->name() == name);
  }
  CHECK(!Criterion::parse("nonsense").has_value());
  CHECK(Criterion::parse("CPD_0.2").has_value());
}

TEST_CASE("window forecasts fill the fan triangularly") {
  const CompositionSeries series = testsupport::two_factor_series(
      {.n = 50, .dim = 8, .curve_noise = 0.01}, 40u);
  WindowOptions options;
  const ForecastFan fan = window_forecasts(series, 5, TransformSpec::make_ilr(8),
                                           KRule::fixed(1), ModelRule::rwd,
                                           options);
  REQUIRE(fan.h_max == 5);
  for (int h = 1; h <= 5; ++h) {
    CHECK(fan.point[h - 1].rows() == 5 + 1 - h);
    CHECK(fan.point[h - 1].allFinite());
  }
}

TEST_CASE("expanding and rolling agree at the first origin") {
  const CompositionSeries series = testsupport::two_factor_series(
      {.n = 60, .dim = 10, .curve_noise = 0.01}, 41u);
  WindowOptions expanding;
  expanding.scheme = WindowScheme::expanding;
  WindowOptions rolling;
  rolling.scheme = WindowScheme::rolling;  // window = first training length
  const ForecastFan a = window_forecasts(series, 6, TransformSpec::make_ilr(10),
                                         KRule::fixed(1), ModelRule::rwd, expanding);
  const ForecastFan b = window_forecasts(series, 6, TransformSpec::make_ilr(10),
                                         KRule::fixed(1), ModelRule::rwd, rolling);
  // the h = 6 forecast comes only from the first origin, where both schemes
  // train on the same block
  CHECK(a.point[5] == b.point[5]);
}

TEST_CASE("single-horizon window: one origin") {
  const CompositionSeries series = testsupport::two_factor_series(
      {.n = 40, .dim = 6, .curve_noise = 0.01}, 42u);
  WindowOptions options;
  const ForecastFan fan = window_forecasts(series, 1, TransformSpec::make_ilr(6),
                                           KRule::fixed(1), ModelRule::rwd, options);
  CHECK(fan.h_max == 1);
  CHECK(fan.point[0].rows() == 1);
}

TEST_CASE("score_fan averaged equals mean of per-horizon values") {
  const CompositionSeries series = testsupport::two_factor_series(
      {.n = 50, .dim = 8, .curve_noise = 0.02}, 43u);
  WindowOptions options;
  const ForecastFan fan = window_forecasts(series, 5, TransformSpec::make_ilr(8),
                                           KRule::fixed(2), ModelRule::rwd, options);
  const Matrix holdout = series.values.bottomRows(5);
  const Criterion criterion{Criterion::Kind::kld, 0.2};
  const auto per_h = score_fan_horizons(fan, holdout, criterion);
  double mean = 0.0;
  for (double v : per_h) mean += v;
  mean /= per_h.size();
  CHECK(score_fan(fan, holdout, criterion) == doctest::Approx(mean).epsilon(1e-12));
  for (double v : per_h) CHECK(v >= 0.0);
}

TEST_CASE("ilr-generated data tunes to a small alpha") {
  // trends and noise live in the ilr space, so the ilr limit forecasts best
  const CompositionSeries series = testsupport::two_factor_series(
      {.n = 70, .dim = 12, .trend1 = 0.10, .trend2 = -0.05,
       .score_noise1 = 0.15, .score_noise2 = 0.1, .curve_noise = 0.01},
      44u);
  TuneOptions options;
  options.grid_step = 0.05;     // coarse grid keeps the test fast
  options.refine_width = 0.0;
  options.k_rule = KRule::fixed(2);
  options.model_rule = ModelRule::rwd;
  const TuneResult result =
      tune_alpha(series, 10, Criterion{Criterion::Kind::kld, 0.2}, options);
  CHECK(result.alpha_star < 0.1);
  CHECK(!result.ilr_infeasible);
  // profile covers the grid and attains the minimum at alpha_star
  REQUIRE(!result.profile.empty());
  double best = std::numeric_limits<double>::infinity();
  double best_alpha = -1.0;
  for (const auto& [alpha, error] : result.profile) {
    if (error < best) {
      best = error;
      best_alpha = alpha;
    }
  }
  CHECK(best_alpha == doctest::Approx(result.alpha_star));
}

TEST_CASE("tuning never touches the test block") {
  CompositionSeries series = testsupport::two_factor_series(
      {.n = 60, .dim = 8, .curve_noise = 0.02}, 45u);
  TuneOptions options;
  options.grid_step = 0.25;
  options.refine_width = 0.0;
  options.k_rule = KRule::fixed(1);
  options.model_rule = ModelRule::rwd;
  const Criterion criterion{Criterion::Kind::kld, 0.2};

  const TuneResult clean = tune_alpha(series, 10, criterion, options);

  // scramble the last H years; the tuner must not notice
  CompositionSeries poisoned = series;
  for (int t = 50; t < 60; ++t) {
    Vector junk = Vector::LinSpaced(8, 1.0, 8.0);
    poisoned.values.row(t) = (junk / junk.sum()).transpose();
  }
  const TuneResult dirty = tune_alpha(poisoned, 10, criterion, options);
  CHECK(clean.alpha_star == dirty.alpha_star);
  REQUIRE(clean.profile.size() == dirty.profile.size());
  for (std::size_t i = 0; i < clean.profile.size(); ++i) {
    CHECK(clean.profile[i].first == dirty.profile[i].first);
    CHECK(clean.profile[i].second == dirty.profile[i].second);
  }
}

TEST_CASE("golden-section refinement localizes the grid minimum") {
  const CompositionSeries series = testsupport::two_factor_series(
      {.n = 70, .dim = 12, .trend1 = 0.10, .trend2 = -0.05,
       .score_noise1 = 0.15, .score_noise2 = 0.1, .curve_noise = 0.01},
      46u);
  TuneOptions coarse;
  coarse.grid_step = 0.2;
  coarse.refine_width = 0.0;
  coarse.k_rule = KRule::fixed(2);
  coarse.model_rule = ModelRule::rwd;
  TuneOptions refined = coarse;
  refined.refine_width = 1e-4;
  const Criterion criterion{Criterion::Kind::kld, 0.2};
  const TuneResult a = tune_alpha(series, 10, criterion, coarse);
  const TuneResult b = tune_alpha(series, 10, criterion, refined);
  // refinement can only improve the attained error
  const auto best_error = [](const TuneResult& r) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [alpha, error] : r.profile) best = std::min(best, error);
    return best;
  };
  CHECK(best_error(b) <= best_error(a) + 1e-15);
  CHECK(b.profile.size() > a.profile.size());
}

TEST_CASE("deterministic: repeated runs give identical profiles") {
  const CompositionSeries series = testsupport::two_factor_series(
      {.n = 50, .dim = 8, .curve_noise = 0.02}, 47u);
  TuneOptions options;
  options.grid_step = 0.25;
  options.refine_width = 0.0;
  options.k_rule = KRule::fixed(1);
  options.model_rule = ModelRule::rwd;
  const Criterion criterion{Criterion::Kind::kld, 0.2};
  const TuneResult a = tune_alpha(series, 10, criterion, options);
  const TuneResult b = tune_alpha(series, 10, criterion, options);
  CHECK(a.profile == b.profile);
  CHECK(a.alpha_star == b.alpha_star);
}

TEST_CASE("interval criterion requires bootstrap options") {
  const CompositionSeries series = testsupport::two_factor_series(
      {.n = 60, .dim = 8, .curve_noise = 0.02}, 48u);
  TuneOptions options;
  options.k_rule = KRule::fixed(1);
  options.model_rule = ModelRule::rwd;
  CHECK_THROWS_AS(
      tune_alpha(series, 10, Criterion{Criterion::Kind::cpd, 0.2}, options),
      tuning_error);
}

TEST_SUITE_END();
