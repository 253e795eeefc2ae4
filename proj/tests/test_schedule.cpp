#include <doctest.h>

#include "pacodi/diffusion_schedule.hpp"

#include <cmath>

using namespace pacodi;

TEST_CASE("linear schedule endpoints and cumulative product") {
    const NoiseSchedule s = NoiseSchedule::build(ScheduleKind::Linear, 2, 0.1, 0.2);
    CHECK(s.beta(1) == doctest::Approx(0.1));
    CHECK(s.beta(2) == doctest::Approx(0.2));
    CHECK(s.alpha_bar(0) == 1.0);
    CHECK(s.alpha_bar(1) == doctest::Approx(0.9));
    CHECK(s.alpha_bar(2) == doctest::Approx(0.72));
}

TEST_CASE("alpha_bar(1) equals 1 - beta(1) for any schedule") {
    for (auto kind : {ScheduleKind::Linear, ScheduleKind::Cosine}) {
        const NoiseSchedule s = NoiseSchedule::build(kind, 50, 1e-4, 2e-2);
        CHECK(s.alpha_bar(1) == doctest::Approx(1.0 - s.beta(1)).epsilon(1e-15));
    }
}

TEST_CASE("default linear schedule mixes to near zero") {
    const NoiseSchedule s = NoiseSchedule::build(ScheduleKind::Linear, 1000, 1e-4, 2e-2);
    // Independent evaluation of the product in long double.
    long double prod = 1.0L;
    for (int t = 1; t <= 1000; ++t) {
        const long double beta =
            1e-4L + (2e-2L - 1e-4L) * static_cast<long double>(t - 1) / 999.0L;
        prod *= 1.0L - beta;
    }
    CHECK(s.alpha_bar(1000) == doctest::Approx(static_cast<double>(prod)).epsilon(1e-12));
    CHECK(s.alpha_bar(1000) < 5e-5);
    CHECK_FALSE(s.terminal_retention_warning());
}

TEST_CASE("alpha_bar decreases strictly and betas stay in (0,1)") {
    for (auto kind : {ScheduleKind::Linear, ScheduleKind::Cosine}) {
        const NoiseSchedule s = NoiseSchedule::build(kind, 200, 1e-4, 0.05);
        for (int t = 1; t <= 200; ++t) {
            CHECK(s.beta(t) > 0.0);
            CHECK(s.beta(t) < 1.0);
            CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
        }
    }
}

TEST_CASE("schedule bound violations are rejected") {
    CHECK_THROWS_AS(NoiseSchedule::build(ScheduleKind::Linear, 0, 1e-4, 2e-2), InvalidInputError);
    CHECK_THROWS_AS(NoiseSchedule::build(ScheduleKind::Linear, 10, 0.0, 0.5), InvalidInputError);
    CHECK_THROWS_AS(NoiseSchedule::build(ScheduleKind::Linear, 10, 0.2, 0.1), InvalidInputError);
    CHECK_THROWS_AS(NoiseSchedule::build(ScheduleKind::Linear, 10, 0.1, 1.0), InvalidInputError);
}

namespace {
double elbo_formula(double alpha_t, double alpha_bar_t) {
    return (1.0 - alpha_t) / (2.0 * alpha_t * (1.0 - alpha_bar_t));
}
} // namespace

TEST_CASE("elbo weight at alpha=0.9, alpha_bar=0.72 is 0.198413") {
    CHECK(elbo_formula(0.9, 0.72) == doctest::Approx(0.19841269841269841).epsilon(1e-14));
}

TEST_CASE("elbo_weight implements the formula over a whole schedule") {
    const NoiseSchedule s = NoiseSchedule::build(ScheduleKind::Linear, 40, 1e-3, 0.1);
    for (int t = 1; t <= 40; ++t)
        CHECK(s.elbo_weight(t) ==
              doctest::Approx(elbo_formula(s.alpha(t), s.alpha_bar(t))).epsilon(1e-14));
    CHECK(s.weight(17, WeightingMode::Simple) == 1.0);
    CHECK_THROWS_AS(s.elbo_weight(41), InvalidInputError);
    CHECK_THROWS_AS(s.elbo_weight(0), InvalidInputError);
}

TEST_CASE("lambda vanishes as alpha_t -> 1 with alpha_bar fixed") {
    CHECK(elbo_formula(1.0 - 1e-10, 0.72) < 1e-9);
}

TEST_CASE("continuous weight equals lambda_t (1 - alpha_bar_t)") {
    const NoiseSchedule s = NoiseSchedule::build(ScheduleKind::Linear, 2, 0.1, 0.2);
    // At t=2: (1 - 0.8) / (2 * 0.8)... using alpha_t = 0.8 here? No: step 2
    // has beta = 0.2, so lambda(t) = 0.2 / (2 * 0.8) = 0.125; and equivalently
    // lambda_2 * (1 - 0.72).
    const double direct = (1.0 - s.alpha(2)) / (2.0 * s.alpha(2));
    const double converted = s.elbo_weight(2) * (1.0 - s.alpha_bar(2));
    CHECK(direct == doctest::Approx(converted).epsilon(1e-14));
    CHECK(s.continuous_weight(1.0, WeightingMode::Elbo) == doctest::Approx(direct));
    CHECK(s.continuous_weight(0.37, WeightingMode::Simple) == 1.0);
}

TEST_CASE("the two continuous-weight expressions agree at every step") {
    const NoiseSchedule s = NoiseSchedule::build(ScheduleKind::Linear, 500, 1e-4, 2e-2);
    for (int t = 1; t <= 500; ++t) {
        const double a = (1.0 - s.alpha(t)) / (2.0 * s.alpha(t));
        const double b = s.elbo_weight(t) * (1.0 - s.alpha_bar(t));
        CHECK(std::abs(a - b) <= 1e-12 * std::max(a, b));
    }
}

TEST_CASE("worked example: lambda(t) = 0.198413 * 0.28 = 0.1/1.8") {
    // Both expressions of the continuous weight, evaluated independently.
    const double via_conversion = elbo_formula(0.9, 0.72) * (1.0 - 0.72);
    const double direct = (1.0 - 0.9) / (2.0 * 0.9);
    CHECK(via_conversion == doctest::Approx(direct).epsilon(1e-14));
    CHECK(via_conversion == doctest::Approx(0.1 / 1.8).epsilon(1e-13));
    CHECK(via_conversion == doctest::Approx(0.0555555555555).epsilon(1e-9));
}

TEST_CASE("discretization consistency: beta_i == beta(t_i) * dt exactly") {
    for (auto kind : {ScheduleKind::Linear, ScheduleKind::Cosine}) {
        const NoiseSchedule s = NoiseSchedule::build(kind, 100, 1e-4, 2e-2);
        const double dt = 1.0 / 100;
        for (int i = 1; i <= 100; ++i) {
            const double t_i = static_cast<double>(i) / 100;
            CHECK(s.beta_continuous(t_i) * dt == s.beta(i));
        }
    }
}
