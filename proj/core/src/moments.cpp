#include "ninlab/moments.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "ninlab/common.hpp"
#include "ninlab/csv.hpp"
#include "ninlab/matrix.hpp"
#include "ninlab/rng.hpp"

namespace ninlab {

void MomentSpec::validate() const {
    if (n < 1) throw ConfigError("moments: n must be a positive integer");
    if (batch_size < 1) throw ConfigError("moments: batch_size must be >= 1");
    if (trials < 1) throw ConfigError("moments: trials must be >= 1");
    if (q_rms * q_rms + 1e-12 < q_mean * q_mean)
        throw ConfigError("moments: q_rms^2 < q_mean^2");
    if (eps_moment_2n + 1e-12 < eps_moment_n * eps_moment_n)
        throw ConfigError("moments: <eps^2n> < <eps^n>^2");
}

TheoremMoments theorem_moments(const MomentSpec& spec) {
    spec.validate();
    TheoremMoments out;
    out.mean = spec.q_mean * spec.eps_moment_n;
    out.variance = (spec.eps_moment_2n * spec.q_rms * spec.q_rms -
                    spec.q_mean * spec.q_mean * spec.eps_moment_n * spec.eps_moment_n) /
                   static_cast<double>(spec.batch_size);
    if (out.variance < 0.0)
        throw ConfigError("moments: spec implies a negative variance");
    return out;
}

namespace {

double double_factorial(int k) {
    double v = 1.0;
    for (int i = k; i >= 2; i -= 2) v *= i;
    return v;
}

} // namespace

double eps_raw_moment(EpsDist dist, double scale, int order) {
    if (order < 0) throw ConfigError("eps_raw_moment: negative order");
    if (order == 0) return 1.0;
    if (order % 2 == 1) return 0.0; // symmetric around zero
    switch (dist) {
        case EpsDist::gaussian:
            return double_factorial(order - 1) * std::pow(scale, order);
        case EpsDist::uniform:
            return std::pow(scale, order) / static_cast<double>(order + 1);
    }
    return 0.0;
}

McMoments mc_batch_moments(int n, const Sampler& q_sampler, const Sampler& eps_sampler,
                           int batch_size, long trials, std::uint64_t seed) {
    if (batch_size < 1) throw ConfigError("mc_batch_moments: batch_size must be >= 1");
    if (trials < 2) throw ConfigError("mc_batch_moments: trials must be >= 2");

    std::vector<double> batch_means(static_cast<std::size_t>(trials));
    std::uint64_t counter = seed;
    std::vector<double> terms(static_cast<std::size_t>(batch_size));
    for (long trial = 0; trial < trials; ++trial) {
        for (int i = 0; i < batch_size; ++i) {
            const double q = q_sampler(counter++);
            const double eps = eps_sampler(counter++);
            terms[static_cast<std::size_t>(i)] = q * std::pow(eps, n);
        }
        batch_means[static_cast<std::size_t>(trial)] =
            pairwise_sum(terms) / static_cast<double>(batch_size);
    }

    const double t = static_cast<double>(trials);
    McMoments out;
    out.trials = trials;
    out.mean = pairwise_sum(batch_means) / t;
    std::vector<double> c2(batch_means.size()), c4(batch_means.size());
    for (std::size_t i = 0; i < batch_means.size(); ++i) {
        const double d = batch_means[i] - out.mean;
        c2[i] = d * d;
        c4[i] = d * d * d * d;
    }
    const double m2 = pairwise_sum(c2) / t;
    const double m4 = pairwise_sum(c4) / t;
    out.variance = m2 * t / (t - 1.0); // unbiased
    out.se_mean = std::sqrt(out.variance / t);
    // Var(s^2) = (m4 - sigma^4 (t-3)/(t-1)) / t, asymptotically (m4 - m2^2)/t.
    const double var_of_var = std::max(0.0, (m4 - m2 * m2 * (t - 3.0) / (t - 1.0)) / t);
    out.se_variance = std::sqrt(var_of_var);
    return out;
}

MomentSpec analytic_spec(const MomentCheckConfig& c) {
    MomentSpec spec;
    spec.n = c.n;
    spec.batch_size = c.batch_size;
    spec.trials = c.trials;
    spec.q_mean = c.q_mean;
    spec.q_rms = std::sqrt(c.q_mean * c.q_mean + c.q_sd * c.q_sd);
    spec.eps_moment_n = eps_raw_moment(c.eps_dist, c.eps_scale, c.n);
    spec.eps_moment_2n = eps_raw_moment(c.eps_dist, c.eps_scale, 2 * c.n);
    return spec;
}

MomentReport verify_theorem(const MomentCheckConfig& c, std::uint64_t seed) {
    const MomentSpec spec = analytic_spec(c);
    const TheoremMoments analytic = theorem_moments(spec);

    const Sampler q_sampler = [&c](std::uint64_t k) {
        return c.q_mean + c.q_sd * counter_gauss(0x71e8a5u, k, 0);
    };
    Sampler eps_sampler;
    if (c.eps_dist == EpsDist::gaussian) {
        eps_sampler = [&c](std::uint64_t k) {
            return c.eps_scale * counter_gauss(0xe95u, k, 1);
        };
    } else {
        eps_sampler = [&c](std::uint64_t k) {
            return c.eps_scale * (2.0 * to_unit(splitmix64(k ^ 0x9d2c5680u)) - 1.0);
        };
    }

    const McMoments mc =
        mc_batch_moments(c.n, q_sampler, eps_sampler, c.batch_size, c.trials, seed);

    MomentReport rep;
    rep.n = c.n;
    rep.batch_size = c.batch_size;
    rep.trials = c.trials;
    rep.analytic_mean = analytic.mean;
    rep.analytic_var = analytic.variance;
    rep.emp_mean = mc.mean;
    rep.emp_var = mc.variance;
    rep.z_mean = mc.se_mean > 0.0 ? (mc.mean - analytic.mean) / mc.se_mean : 0.0;
    rep.z_var = mc.se_variance > 0.0 ? (mc.variance - analytic.variance) / mc.se_variance : 0.0;
    rep.pass = std::fabs(rep.z_mean) <= c.z_max && std::fabs(rep.z_var) <= c.z_max;
    return rep;
}

std::string MomentReport::to_json() const {
    std::ostringstream out;
    out << "{\"n\": " << n << ", \"batch_size\": " << batch_size
        << ", \"trials\": " << trials << ", \"analytic_mean\": " << format_double(analytic_mean)
        << ", \"analytic_var\": " << format_double(analytic_var)
        << ", \"emp_mean\": " << format_double(emp_mean)
        << ", \"emp_var\": " << format_double(emp_var)
        << ", \"z_mean\": " << format_double(z_mean)
        << ", \"z_var\": " << format_double(z_var)
        << ", \"pass\": " << (pass ? "true" : "false") << "}";
    return out.str();
}

} // namespace ninlab
