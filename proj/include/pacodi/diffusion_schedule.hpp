#pragma once

#include "pacodi/types.hpp"

#include <vector>

namespace pacodi {

enum class ScheduleKind { Linear, Cosine };
enum class WeightingMode { Elbo, Simple };

// beta_t / alpha_t / alpha_bar_t over T discrete steps, plus the continuous
// view beta(s) on [0,1] defined by beta_i = beta(t_i) * dt with dt = 1/T.
// Convention: alpha_bar(0) = 1.
class NoiseSchedule {
public:
    static NoiseSchedule build(ScheduleKind kind, int steps, double beta_min, double beta_max);

    ScheduleKind kind() const { return kind_; }
    int steps() const { return static_cast<int>(betas_.size()); }

    double beta(int t) const;      // t in [1, T]
    double alpha(int t) const;     // 1 - beta_t
    double alpha_bar(int t) const; // t in [0, T], alpha_bar(0) = 1

    // Continuous time s in [0,1] mapped to the nearest discrete index.
    int index_of_time(double s) const;
    // beta(s) = T * beta_{index_of_time(s)}, so beta_i == beta(t_i) * (1/T)
    // exactly by construction.
    double beta_continuous(double s) const;

    // lambda_t = (1 - alpha_t) / (2 alpha_t (1 - alpha_bar_t))
    double elbo_weight(int t) const;
    double weight(int t, WeightingMode mode) const;
    // lambda(s) = lambda_t * (1 - alpha_bar_t) = (1 - alpha_t) / (2 alpha_t)
    double continuous_weight(double s, WeightingMode mode) const;

    // True when alpha_bar(T) > 0.01 (poor terminal mixing for generation).
    bool terminal_retention_warning() const;

private:
    ScheduleKind kind_ = ScheduleKind::Linear;
    std::vector<double> betas_;      // 1-based step t stored at [t-1]
    std::vector<double> betas_cont_; // beta(t_i) with beta_i = beta(t_i)/T bitwise
    std::vector<double> alpha_bars_; // alpha_bars_[t] for t in [0, T]

    void check_step(int t) const;
};

ScheduleKind schedule_kind_from_string(const std::string& s);
WeightingMode weighting_mode_from_string(const std::string& s);

} // namespace pacodi
