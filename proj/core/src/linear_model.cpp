#include "ninlab/linear_model.hpp"

#include <cmath>
#include <sstream>

#include "ninlab/common.hpp"
#include "ninlab/csv.hpp"
#include "ninlab/rng.hpp"

namespace ninlab {

void LinearState::validate() const {
    if (eta <= 0.0) throw ConfigError("linear: eta must be positive");
    if (sigma_x <= 0.0) throw ConfigError("linear: sigma_x must be positive");
    if (sigma_eps < 0.0) throw ConfigError("linear: sigma_eps must be >= 0");
    if (batch_size < 1) throw ConfigError("linear: batch_size must be >= 1");
}

LinearCoefficients coefficients(const LinearState& s, double phi) {
    s.validate();
    const double resid = s.w1 * s.w0 - s.m;
    const double drive = s.eta * phi * s.sigma_x / std::sqrt(static_cast<double>(s.batch_size));
    LinearCoefficients c;
    c.phi = phi;
    c.a = drive * s.w_ni * (2.0 * s.w1 * s.w0 - s.m);
    c.a_tilde = drive * s.w1 * resid;
    c.b = s.eta * s.w_ni * s.w_ni;
    c.b_tilde = s.eta * s.w1 * s.w1;
    c.c = s.eta * resid * s.w0 * s.sigma_x * s.sigma_x;
    return c;
}

LinearState linear_step(const LinearState& s, double phi) {
    const LinearCoefficients k = coefficients(s, phi);
    const double se2 = s.sigma_eps * s.sigma_eps;
    LinearState next = s;
    next.w1 = k.a * s.sigma_eps + s.w1 * (1.0 - k.b * se2) - k.c;
    next.w_ni = k.a_tilde * s.sigma_eps + s.w_ni * (1.0 - k.b_tilde * se2);
    next.w0 = s.w0 - s.eta * (s.w1 * s.w0 - s.m) * s.w1 * s.sigma_x * s.sigma_x;
    return next;
}

double noise_free_loss(const LinearState& s) {
    const double resid = s.w1 * s.w0 - s.m;
    return 0.5 * s.sigma_x * s.sigma_x * resid * resid;
}

double expected_noisy_loss(const LinearState& s) {
    const double cross = s.w1 * s.w_ni * s.sigma_eps;
    return noise_free_loss(s) + 0.5 * cross * cross;
}

std::vector<double> LinearTrajectory::series_abs_niw() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(std::fabs(p.w_ni));
    return v;
}

std::vector<double> LinearTrajectory::series_loss() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.loss);
    return v;
}

std::vector<double> LinearTrajectory::series_noisy_loss() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) {
        const double cross = p.w1 * p.w_ni * sigma_eps;
        v.push_back(p.loss + 0.5 * cross * cross);
    }
    return v;
}

std::vector<double> LinearTrajectory::series_steps() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(static_cast<double>(p.step));
    return v;
}

namespace {

bool blew_up(const LinearState& s) {
    const bool finite = std::isfinite(s.w0) && std::isfinite(s.w1) && std::isfinite(s.w_ni);
    if (!finite) return true;
    const double biggest =
        std::max({std::fabs(s.w0), std::fabs(s.w1), std::fabs(s.w_ni)});
    return biggest > kDivergenceThreshold;
}

} // namespace

LinearTrajectory simulate_linear(const LinearState& initial, long steps, std::uint64_t seed) {
    if (steps < 1) throw ConfigError("simulate_linear: steps must be >= 1");
    initial.validate();
    LinearTrajectory traj;
    traj.sigma_eps = initial.sigma_eps;
    traj.points.reserve(static_cast<std::size_t>(steps) + 1);
    GaussianStream phi(seed);
    LinearState s = initial;
    for (long t = 0; t <= steps; ++t) {
        traj.points.push_back({t, s.w0, s.w1, s.w_ni, noise_free_loss(s), false});
        if (t == steps) break;
        s = linear_step(s, phi.next());
        if (blew_up(s)) {
            traj.points.push_back({t + 1, s.w0, s.w1, s.w_ni, noise_free_loss(s), true});
            traj.diverged = true;
            break;
        }
    }
    return traj;
}

LinearState empirical_linear_step(const LinearState& s, std::span<const double> xs,
                                  std::span<const double> eps) {
    s.validate();
    if (xs.empty() || xs.size() != eps.size())
        throw DataError("empirical_linear_step: empty or mismatched batch");
    const double inv = 1.0 / static_cast<double>(xs.size());
    double g0 = 0.0, g1 = 0.0, gni = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double hidden = s.w0 * xs[i] + s.w_ni * eps[i];
        const double resid = s.w1 * hidden - s.m * xs[i];
        g1 += resid * hidden;
        g0 += resid * s.w1 * xs[i];
        gni += resid * s.w1 * eps[i];
    }
    LinearState next = s;
    next.w0 = s.w0 - s.eta * g0 * inv;
    next.w1 = s.w1 - s.eta * g1 * inv;
    next.w_ni = s.w_ni - s.eta * gni * inv;
    return next;
}

std::string linear_trajectory_to_csv(const LinearTrajectory& traj) {
    std::ostringstream out;
    out << "step,w0,w1,w_ni,loss,diverged\n";
    for (const auto& p : traj.points) {
        out << p.step << ',' << format_double(p.w0) << ',' << format_double(p.w1) << ','
            << format_double(p.w_ni) << ',' << format_double(p.loss) << ','
            << (p.diverged ? 1 : 0) << '\n';
    }
    return out.str();
}

void write_linear_trajectory_csv(const LinearTrajectory& traj, const std::string& path) {
    write_text_file(path, linear_trajectory_to_csv(traj));
}

} // namespace ninlab
