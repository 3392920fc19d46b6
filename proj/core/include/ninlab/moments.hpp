#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace ninlab {

// Raw-moment description of the batch-averaged q * eps^n statistic. We
// parameterize by <eps^n> and <eps^2n> directly, which sidesteps the
// sigma_{n,eps} notation ambiguity between distributions.
struct MomentSpec {
    int n = 1;
    int batch_size = 1;
    long trials = 1000;
    double q_mean = 0.0;       // <q>
    double q_rms = 0.0;        // Q = sqrt(<q^2>)
    double eps_moment_n = 0.0; // <eps^n>
    double eps_moment_2n = 0.0; // <eps^2n>

    void validate() const; // throws ConfigError on inconsistent moments
};

// mean  = <q> <eps^n>
// var   = (<eps^2n> Q^2 - <q>^2 <eps^n>^2) / |B|
struct TheoremMoments {
    double mean = 0.0;
    double variance = 0.0;
};

TheoremMoments theorem_moments(const MomentSpec& spec);

// Raw moments of the two supported symmetric eps families.
// Gaussian: scale = sigma; uniform: scale = half-width.
enum class EpsDist { gaussian, uniform };
double eps_raw_moment(EpsDist dist, double scale, int order);

// Monte-Carlo estimate of the batch-average statistic: draws `trials`
// independent batches, takes each batch mean of q_i * eps_i^n, and returns
// the across-trial mean and variance with their standard errors.
struct McMoments {
    double mean = 0.0;
    double variance = 0.0;
    double se_mean = 0.0;
    double se_variance = 0.0;
    long trials = 0;
};

using Sampler = std::function<double(std::uint64_t counter)>;

McMoments mc_batch_moments(int n, const Sampler& q_sampler, const Sampler& eps_sampler,
                           int batch_size, long trials, std::uint64_t seed);

// End-to-end check of the theorem for Gaussian q ~ N(q_mean, q_sd^2) and a
// symmetric eps family. Pass iff both z-scores are at most z_max.
struct MomentCheckConfig {
    int n = 1;
    int batch_size = 100;
    long trials = 100000;
    double q_mean = 1.0;
    double q_sd = 1.0;
    EpsDist eps_dist = EpsDist::gaussian;
    double eps_scale = 1.0;
    double z_max = 3.0;
};

struct MomentReport {
    int n = 0;
    int batch_size = 0;
    long trials = 0;
    double analytic_mean = 0.0;
    double analytic_var = 0.0;
    double emp_mean = 0.0;
    double emp_var = 0.0;
    double z_mean = 0.0;
    double z_var = 0.0;
    bool pass = false;

    std::string to_json() const;
};

MomentReport verify_theorem(const MomentCheckConfig& config, std::uint64_t seed);

// The analytic MomentSpec implied by a check config.
MomentSpec analytic_spec(const MomentCheckConfig& config);

} // namespace ninlab
