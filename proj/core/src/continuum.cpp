#include "ninlab/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ninlab/common.hpp"
#include "ninlab/csv.hpp"

namespace ninlab {

namespace {

struct Derivs {
    double dw0, dw1, dwni;
};

Derivs flow_rhs(double w0, double w1, double wni, double m, double sx2, double se2) {
    const double resid = w1 * w0 - m;
    return {-resid * w1 * sx2, -resid * w0 * sx2, -se2 * w1 * w1 * wni};
}

} // namespace

std::vector<FlowState> integrate_flow(const LinearState& initial, double t_end, double dt,
                                      int emit_every) {
    if (dt <= 0.0 || t_end < dt) throw ConfigError("integrate_flow: need 0 < dt <= t_end");
    if (emit_every < 1) throw ConfigError("integrate_flow: emit_every must be >= 1");
    initial.validate();
    const double sx2 = initial.sigma_x * initial.sigma_x;
    const double se2 = initial.sigma_eps * initial.sigma_eps;
    const double m = initial.m;

    double w0 = initial.w0, w1 = initial.w1, wni = initial.w_ni;
    const long n_steps = static_cast<long>(std::llround(t_end / dt));

    std::vector<FlowState> out;
    out.reserve(static_cast<std::size_t>(n_steps / emit_every) + 2);
    auto emit = [&](double t) {
        LinearState s = initial;
        s.w0 = w0;
        s.w1 = w1;
        s.w_ni = wni;
        out.push_back({t, w0, w1, wni, noise_free_loss(s)});
    };
    emit(0.0);

    for (long k = 0; k < n_steps; ++k) {
        const Derivs k1 = flow_rhs(w0, w1, wni, m, sx2, se2);
        const Derivs k2 = flow_rhs(w0 + 0.5 * dt * k1.dw0, w1 + 0.5 * dt * k1.dw1,
                                   wni + 0.5 * dt * k1.dwni, m, sx2, se2);
        const Derivs k3 = flow_rhs(w0 + 0.5 * dt * k2.dw0, w1 + 0.5 * dt * k2.dw1,
                                   wni + 0.5 * dt * k2.dwni, m, sx2, se2);
        const Derivs k4 = flow_rhs(w0 + dt * k3.dw0, w1 + dt * k3.dw1, wni + dt * k3.dwni,
                                   m, sx2, se2);
        w0 += dt / 6.0 * (k1.dw0 + 2.0 * k2.dw0 + 2.0 * k3.dw0 + k4.dw0);
        w1 += dt / 6.0 * (k1.dw1 + 2.0 * k2.dw1 + 2.0 * k3.dw1 + k4.dw1);
        wni += dt / 6.0 * (k1.dwni + 2.0 * k2.dwni + 2.0 * k3.dwni + k4.dwni);
        if (!std::isfinite(w0) || !std::isfinite(w1) || !std::isfinite(wni) ||
            std::max({std::fabs(w0), std::fabs(w1), std::fabs(wni)}) > kDivergenceThreshold)
            throw NumericError("integrate_flow: step instability at t = " +
                               std::to_string(dt * static_cast<double>(k + 1)));
        if ((k + 1) % emit_every == 0 || k + 1 == n_steps)
            emit(dt * static_cast<double>(k + 1));
    }
    return out;
}

PredictedDecay predicted_decay(std::span<const FlowState> flow, double sigma_x,
                               double sigma_eps) {
    if (flow.size() < 2) throw DataError("predicted_decay: trajectory too short");
    for (std::size_t i = 1; i < flow.size(); ++i)
        if (flow[i].t <= flow[i - 1].t)
            throw DataError("predicted_decay: non-monotone time grid");

    PredictedDecay pred;
    pred.t.reserve(flow.size());
    pred.loss_ratio.reserve(flow.size());
    pred.niw_ratio.reserve(flow.size());

    const double sx2 = sigma_x * sigma_x;
    const double se2 = sigma_eps * sigma_eps;
    double int_trace = 0.0; // int (w0^2 + w1^2) dt'
    double int_w1sq = 0.0;  // int w1^2 dt'
    auto trace_term = [](const FlowState& s) { return s.w0 * s.w0 + s.w1 * s.w1; };
    auto w1sq = [](const FlowState& s) { return s.w1 * s.w1; };

    pred.t.push_back(flow[0].t);
    pred.loss_ratio.push_back(1.0);
    pred.niw_ratio.push_back(1.0);
    for (std::size_t i = 1; i < flow.size(); ++i) {
        const double h = flow[i].t - flow[i - 1].t;
        int_trace += 0.5 * h * (trace_term(flow[i - 1]) + trace_term(flow[i]));
        int_w1sq += 0.5 * h * (w1sq(flow[i - 1]) + w1sq(flow[i]));
        pred.t.push_back(flow[i].t);
        pred.loss_ratio.push_back(std::exp(-2.0 * sx2 * int_trace));
        pred.niw_ratio.push_back(std::exp(-se2 * int_w1sq));
    }
    return pred;
}

namespace {

// Forward 3-point stencil for y'(t0) on a uniform grid.
double forward_derivative(std::span<const double> t, std::span<const double> y,
                          std::size_t i) {
    const double h = t[i + 1] - t[i];
    return (-3.0 * y[i] + 4.0 * y[i + 1] - y[i + 2]) / (2.0 * h);
}

Tau tau_of_series(std::span<const double> t, std::span<const double> series,
                  double overshoot) {
    Tau tau;
    if (series.size() < 3) {
        tau.diagnostic = "series too short";
        return tau;
    }
    const DecayWindow w = find_decay_window(series, overshoot);
    if (w.first + 3 > series.size()) {
        tau.diagnostic = "no decay window";
        return tau;
    }
    const double y0 = series[w.first];
    const double dy = forward_derivative(t, series, w.first);
    if (y0 > 0.0 && dy < 0.0) tau.instantaneous = -y0 / dy;

    const ExpFit fit = fit_exponential_windowed(t, series, overshoot);
    if (!fit.valid) {
        tau.diagnostic = "series does not fit a decaying exponential";
        return tau;
    }
    tau.fitted = fit.tau;
    tau.fit_r2 = fit.r2;
    tau.valid = std::isfinite(tau.fitted) && tau.fitted > 0.0;
    if (!tau.valid) tau.diagnostic = "fitted tau not positive/finite";
    return tau;
}

} // namespace

TimescaleReport timescales(const TimescaleInput& in) {
    if (in.t.size() != in.niw.size() || in.t.size() != in.train_loss.size())
        throw DataError("timescales: series lengths disagree");
    TimescaleReport rep;
    rep.noise = tau_of_series(in.t, in.niw, in.overshoot);
    rep.loss = tau_of_series(in.t, in.train_loss, in.overshoot);
    if (!in.test_loss.empty()) {
        if (in.test_loss.size() != in.t.size())
            throw DataError("timescales: test series length disagrees");
        rep.test = tau_of_series(in.t, in.test_loss, in.overshoot);
    } else {
        rep.test.diagnostic = "no test series";
    }
    return rep;
}

DeltaLossReport delta_loss_check(std::span<const double> losses,
                                 std::span<const double> grad_sq, double eta) {
    if (losses.size() < 2 || grad_sq.size() + 1 < losses.size())
        throw DataError("delta_loss_check: need losses[t], losses[t+1] and grad_sq[t]");
    DeltaLossReport rep;
    const std::size_t n = losses.size() - 1;
    rep.rel_residual.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double delta = losses[t + 1] - losses[t];
        const double predicted = -eta * grad_sq[t];
        const double scale = std::max(std::fabs(delta), std::fabs(predicted));
        rep.rel_residual.push_back(scale > 0.0 ? std::fabs(delta - predicted) / scale : 0.0);
    }
    std::vector<double> sorted(rep.rel_residual);
    std::sort(sorted.begin(), sorted.end());
    rep.median = sorted[sorted.size() / 2];
    rep.q90 = sorted[static_cast<std::size_t>(0.9 * static_cast<double>(sorted.size() - 1))];
    return rep;
}

std::string timescale_csv_header() {
    return "sigma_eps,tau_niw_fit,tau_train_fit,tau_test_fit,r2_niw,r2_train,r2_test";
}

std::string timescale_csv_row(double sigma_eps, const TimescaleReport& r) {
    auto tau_or_nan = [](const Tau& t) { return t.valid ? t.fitted : std::nan(""); };
    auto r2_or_nan = [](const Tau& t) { return t.valid ? t.fit_r2 : std::nan(""); };
    std::ostringstream out;
    out << format_double(sigma_eps) << ',' << format_double(tau_or_nan(r.noise)) << ','
        << format_double(tau_or_nan(r.loss)) << ',' << format_double(tau_or_nan(r.test))
        << ',' << format_double(r2_or_nan(r.noise)) << ',' << format_double(r2_or_nan(r.loss))
        << ',' << format_double(r2_or_nan(r.test));
    return out.str();
}

} // namespace ninlab
