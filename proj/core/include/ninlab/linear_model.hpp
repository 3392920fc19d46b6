#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ninlab {

// Two-layer linear network on univariate regression: output
// w1 * (w0 * x + w_ni * eps), labels y = m * x. Carries the task constants
// alongside the three weights.
struct LinearState {
    double w0 = 0.0;
    double w1 = 0.0;
    double w_ni = 0.0;
    double m = 1.0;
    double sigma_x = 1.0;
    double sigma_eps = 0.0;
    double eta = 0.01;
    int batch_size = 1000;

    void validate() const; // throws ConfigError
};

// Per-step coefficients of the coupled recursion. b and b_tilde are eta
// times squares, hence nonnegative.
struct LinearCoefficients {
    double a = 0.0;       // stochastic drive on w1
    double a_tilde = 0.0; // stochastic drive on w_ni
    double b = 0.0;       // eta * w_ni^2
    double b_tilde = 0.0; // eta * w1^2
    double c = 0.0;       // deterministic gradient term on w1
    double phi = 0.0;     // the sampled unit-variance variable
};

LinearCoefficients coefficients(const LinearState& state, double phi);

// One step of the coupled recursion; all three weights update from the
// pre-step state. w0 follows plain gradient descent on the noise-free loss.
LinearState linear_step(const LinearState& state, double phi);

// Noise-free loss 1/2 sigma_x^2 (w1 w0 - m)^2.
double noise_free_loss(const LinearState& state);
// Expectation of the noisy batch loss over (x, eps): adds
// 1/2 (w1 w_ni sigma_eps)^2. This is the train-loss proxy the phase
// classifier consumes for recursion trajectories.
double expected_noisy_loss(const LinearState& state);

struct LinearTrajectoryPoint {
    long step = 0;
    double w0 = 0.0, w1 = 0.0, w_ni = 0.0;
    double loss = 0.0; // noise-free
    bool diverged = false;
};

struct LinearTrajectory {
    std::vector<LinearTrajectoryPoint> points;
    bool diverged = false;
    double sigma_eps = 0.0;

    std::vector<double> series_abs_niw() const;
    std::vector<double> series_loss() const;
    std::vector<double> series_noisy_loss() const; // expected noisy loss
    std::vector<double> series_steps() const;
};

// Iterates linear_step with phi ~ N(0,1) drawn per step from a seeded
// stream; records every step and halts once a weight is non-finite or
// exceeds the divergence threshold.
LinearTrajectory simulate_linear(const LinearState& initial, long steps,
                                 std::uint64_t seed);

// One exact SGD step on the empirical MSE of a sampled batch
// {(x_i, eps_i)} with labels y_i = m * x_i. No series truncation.
LinearState empirical_linear_step(const LinearState& state, std::span<const double> xs,
                                  std::span<const double> eps);

// `step,w0,w1,w_ni,loss,diverged`
std::string linear_trajectory_to_csv(const LinearTrajectory& traj);
void write_linear_trajectory_csv(const LinearTrajectory& traj, const std::string& path);

} // namespace ninlab
