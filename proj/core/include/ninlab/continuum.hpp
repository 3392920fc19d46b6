#pragma once

#include <span>
#include <string>
#include <vector>

#include "ninlab/fitting.hpp"
#include "ninlab/linear_model.hpp"

namespace ninlab {

struct FlowState {
    double t = 0.0;
    double w0 = 0.0, w1 = 0.0, w_ni = 0.0;
    double loss = 0.0; // recomputed from the weights at every emitted point
};

// Classical fixed-step RK4 on the eta -> 0 limit of the decay-phase
// recursion:
//   w0'   = -(w1 w0 - m) w1 sigma_x^2
//   w1'   = -(w1 w0 - m) w0 sigma_x^2
//   w_ni' = -sigma_eps^2 w1^2 w_ni
// Throws NumericError if a weight passes the divergence threshold.
// emit_every > 1 thins the output but never the integration grid.
std::vector<FlowState> integrate_flow(const LinearState& initial, double t_end, double dt,
                                      int emit_every = 1);

// Exponential-integral predictions from the flow trajectory, normalized to
// the initial values:
//   L(t)/L(0)       = exp(-2 sigma_x^2 int (w0^2 + w1^2) dt')
//   w_ni(t)/w_ni(0) = exp(-sigma_eps^2 int w1^2 dt')
// Quadrature is the trapezoid rule on the emitted grid.
struct PredictedDecay {
    std::vector<double> t;
    std::vector<double> loss_ratio;
    std::vector<double> niw_ratio;
};

PredictedDecay predicted_decay(std::span<const FlowState> flow, double sigma_x,
                               double sigma_eps);

// One decay timescale: instantaneous -y/y' at the window start plus a
// log-linear fit over the window.
struct Tau {
    double instantaneous = 0.0;
    double fitted = 0.0;
    double fit_r2 = 0.0;
    bool valid = false;
    std::string diagnostic; // set when invalid
};

struct TimescaleReport {
    Tau noise; // from the |w_ni| / NIW-norm series
    Tau loss;  // from the train-loss series
    Tau test;  // from the test-loss series, when present
};

struct TimescaleInput {
    std::vector<double> t;
    std::vector<double> niw;
    std::vector<double> train_loss;
    std::vector<double> test_loss; // may be empty
    double overshoot = 1.2;        // window peak detection, as in the classifier
};

TimescaleReport timescales(const TimescaleInput& input);

// Verifies the small-eta identity delta L ~= -eta * |grad L|^2 on a
// noise-free discrete trajectory. Input: per-step losses (pre-update) and
// per-step squared gradient norms; returns relative residuals and their
// quantiles.
struct DeltaLossReport {
    std::vector<double> rel_residual;
    double median = 0.0;
    double q90 = 0.0;
};

DeltaLossReport delta_loss_check(std::span<const double> losses,
                                 std::span<const double> grad_sq, double eta);

// `sigma_eps,tau_niw_fit,tau_train_fit,tau_test_fit,r2_niw,r2_train,r2_test`
std::string timescale_csv_header();
std::string timescale_csv_row(double sigma_eps, const TimescaleReport& report);

} // namespace ninlab
