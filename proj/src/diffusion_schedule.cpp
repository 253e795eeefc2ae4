#include "pacodi/diffusion_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pacodi {

NoiseSchedule NoiseSchedule::build(ScheduleKind kind, int steps, double beta_min, double beta_max) {
    if (steps < 1) throw InvalidInputError("schedule: step count must be >= 1");
    if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0))
        throw InvalidInputError("schedule: require 0 < beta_min <= beta_max < 1");

    NoiseSchedule sch;
    sch.kind_ = kind;
    sch.betas_.resize(steps);

    if (kind == ScheduleKind::Linear) {
        for (int t = 1; t <= steps; ++t) {
            const double frac = steps > 1 ? static_cast<double>(t - 1) / (steps - 1) : 0.0;
            sch.betas_[t - 1] = beta_min + (beta_max - beta_min) * frac;
        }
    } else {
        // Squared-cosine alpha_bar curve converted to per-step betas.
        const double s = 0.008;
        auto f = [&](double u) {
            const double v = std::cos((u + s) / (1.0 + s) * std::numbers::pi / 2.0);
            return v * v;
        };
        const double f0 = f(0.0);
        double prev = 1.0;
        for (int t = 1; t <= steps; ++t) {
            const double cur = f(static_cast<double>(t) / steps) / f0;
            double beta = 1.0 - cur / prev;
            beta = std::clamp(beta, 1e-6, 0.999);
            sch.betas_[t - 1] = beta;
            prev *= 1.0 - beta;
        }
    }

    // The continuous view is the primitive: beta_i := beta(t_i) * dt holds
    // bitwise because the discrete betas are re-derived from it.
    const double dt = 1.0 / steps;
    sch.betas_cont_.resize(steps);
    for (int t = 1; t <= steps; ++t) {
        sch.betas_cont_[t - 1] = sch.betas_[t - 1] / dt;
        sch.betas_[t - 1] = sch.betas_cont_[t - 1] * dt;
    }

    sch.alpha_bars_.resize(steps + 1);
    sch.alpha_bars_[0] = 1.0;
    for (int t = 1; t <= steps; ++t)
        sch.alpha_bars_[t] = sch.alpha_bars_[t - 1] * (1.0 - sch.betas_[t - 1]);
    return sch;
}

void NoiseSchedule::check_step(int t) const {
    if (t < 1 || t > steps())
        throw InvalidInputError("schedule: step index out of range [1, T]");
}

double NoiseSchedule::beta(int t) const {
    check_step(t);
    return betas_[t - 1];
}

double NoiseSchedule::alpha(int t) const { return 1.0 - beta(t); }

double NoiseSchedule::alpha_bar(int t) const {
    if (t < 0 || t > steps())
        throw InvalidInputError("schedule: alpha_bar index out of range [0, T]");
    return alpha_bars_[t];
}

int NoiseSchedule::index_of_time(double s) const {
    const int T = steps();
    const int i = static_cast<int>(std::lround(s * T));
    return std::clamp(i, 1, T);
}

double NoiseSchedule::beta_continuous(double s) const {
    return betas_cont_[index_of_time(s) - 1];
}

double NoiseSchedule::elbo_weight(int t) const {
    check_step(t);
    const double a = alpha(t);
    const double ab = alpha_bar(t);
    return (1.0 - a) / (2.0 * a * (1.0 - ab));
}

double NoiseSchedule::weight(int t, WeightingMode mode) const {
    check_step(t);
    return mode == WeightingMode::Simple ? 1.0 : elbo_weight(t);
}

double NoiseSchedule::continuous_weight(double s, WeightingMode mode) const {
    if (mode == WeightingMode::Simple) return 1.0;
    const int t = index_of_time(s);
    return elbo_weight(t) * (1.0 - alpha_bar(t));
}

bool NoiseSchedule::terminal_retention_warning() const {
    return alpha_bars_.back() > 0.01;
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::Linear;
    if (s == "cosine") return ScheduleKind::Cosine;
    throw InvalidInputError("schedule.kind must be 'linear' or 'cosine', got '" + s + "'");
}

WeightingMode weighting_mode_from_string(const std::string& s) {
    if (s == "elbo") return WeightingMode::Elbo;
    if (s == "simple") return WeightingMode::Simple;
    throw InvalidInputError("schedule.weighting must be 'elbo' or 'simple', got '" + s + "'");
}

} // namespace pacodi
