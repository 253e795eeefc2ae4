#pragma once

#include "pacodi/diffusion_schedule.hpp"
#include "pacodi/reverse_sampler.hpp"
#include "pacodi/rng.hpp"
#include "pacodi/spectral_noise.hpp"

#include <string>
#include <vector>

namespace pacodi {

// Numeric certification of the statistical identities behind the engine.
// Every check is deterministic given (parameters, seed): Monte Carlo work is
// split into fixed-size chunks with per-chunk RNG streams and reduced in
// chunk order, so thread count never changes a digit.

struct CheckStat {
    std::string label;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool within() const { return deviation <= tolerance; }
};

struct VerificationReport {
    std::string name;
    std::string params;
    std::vector<CheckStat> stats;
    bool informational = false;    // reported, never gates the exit code
    bool negative_control = false; // must FAIL to count as healthy
    double wall_seconds = 0.0;

    bool passed() const; // every stat within tolerance
    bool ok() const;     // passed(), inverted for negative controls
};

// cov(eps_r, eps_i) over N spectral-noise draws; tolerance 5 sigma^2 / sqrt(N).
VerificationReport check_orthogonality(int length, double sigma, long n_draws, std::uint64_t seed);

// Entrywise empirical Sigma_r / Sigma_i against the analytic X-shape.
VerificationReport check_covariance_structure(int length, double sigma, long n_draws,
                                              std::uint64_t seed);

// Same estimator against a deliberately wrong (isotropic) target: must fail.
VerificationReport check_covariance_negative_control(int length, double sigma, long n_draws,
                                                     std::uint64_t seed);

// Covariance of sqrt(a) E1 + sqrt(1-a) E2 against Sigma, plus exact DFT
// linearity on individual draws (residual < 1e-12).
VerificationReport check_additivity(int length, double sigma, double alpha, long n_draws,
                                    std::uint64_t seed);

// Fixed X0: cross-covariance of (R_t, I_t) statistically zero, and the joint
// reverse-posterior log-density equals the sum of the per-quadrature branch
// log-densities (dense block-diagonal Gaussian vs factorized closed forms).
// origin_scale 0 makes X0 = 0, the pure-noise special case.
VerificationReport check_conditional_factorization(int length, double sigma,
                                                   const NoiseSchedule& schedule, int t,
                                                   long n_draws, std::uint64_t seed,
                                                   double origin_scale = 1.0);

// Quadratures deliberately correlated: the cross-covariance check must fail.
VerificationReport check_factorization_negative_control(int length, double sigma,
                                                        const NoiseSchedule& schedule, int t,
                                                        long n_draws, std::uint64_t seed);

// noise_to_score against central finite differences of the compressed
// Gaussian log-density; the zero-variance imaginary Nyquist coordinate is
// excluded and noted in the params string.
VerificationReport check_score_identity(int length, double sigma, const NoiseSchedule& schedule,
                                        int t, std::uint64_t seed);

// Instance-wise discrete/continuous loss agreement over random triples.
VerificationReport check_loss_equivalence(int length, const NoiseSchedule& schedule, int trials,
                                          std::uint64_t seed);

// Omits the (1 - alpha_bar) weight conversion: must deviate by > 1e-3.
VerificationReport check_loss_equivalence_negative_control(int length,
                                                           const NoiseSchedule& schedule,
                                                           int trials, std::uint64_t seed);

// S_cos(k) = T * delta_{k mod T, 0}, S_sin(k) = 0, for all k <= k_max.
VerificationReport check_trig_orthogonality(int period, int k_max);

// Informational: quantifies the marginal cross-quadrature entanglement of a
// two-atom dataset with perfectly correlated quadratures (the gap the
// interactive correction exists to close), against exact mixture moments.
VerificationReport check_mft_marginal_entanglement(const NoiseSchedule& schedule, int t,
                                                   long n_draws, std::uint64_t seed);

// Reverse-SDE marginal preservation with the analytic per-bin Gaussian score:
// terminal per-bin variance within rel_tol of the data variance.
VerificationReport check_sde_marginal_preservation(int length, double sigma,
                                                   const NoiseSchedule& schedule, int em_steps,
                                                   int paths, SdeScoreFactor factor,
                                                   double rel_tol, std::uint64_t seed);

// Tab-separated rows, one per stat:
// name, params, stat label, deviation, tolerance, verdict, wall seconds.
std::string report_rows_tsv(const VerificationReport& report);

struct SuiteOptions {
    std::uint64_t seed = 20240901;
    long n_draws = 100000;
    bool include_sde_arbiter = true; // the slowest check; skippable for quick runs
};

// Default verification grid. Exit-code semantics: informational checks are
// excluded; negative controls must fail; everything else must pass.
std::vector<VerificationReport> run_verification_suite(const SuiteOptions& options);

bool suite_healthy(const std::vector<VerificationReport>& reports);

} // namespace pacodi
