#pragma once

#include <cstddef>
#include <span>

namespace ninlab {

// Ordinary least squares y = slope*x + intercept with the usual R^2.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool valid = false;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Log-linear exponential fit y ~ amplitude * exp(-t/tau). Non-positive y
// values are skipped; the fit is invalid unless at least three points remain
// and the slope indicates decay (tau > 0). r2 is measured in log space.
struct ExpFit {
    double amplitude = 0.0;
    double tau = 0.0;
    double r2 = 0.0;
    bool valid = false;
};

ExpFit fit_exponential(std::span<const double> t, std::span<const double> y);

// Decay-window bounds [first, last) for a nonnegative series: the window
// starts after the overshoot peak (if the series ever exceeds
// overshoot * y[0]) and ends where the series first reaches floor_ratio of
// its window-start value.
struct DecayWindow {
    std::size_t first = 0;
    std::size_t last = 0;
};

DecayWindow find_decay_window(std::span<const double> y, double overshoot,
                              double floor_ratio = 0.01);

// fit_exponential restricted to a decay window, retried from a few later
// starting points so an initial fast transient does not drag down R^2 of an
// otherwise clean exponential tail. Returns the best fit found.
ExpFit fit_exponential_windowed(std::span<const double> t, std::span<const double> y,
                                double overshoot, double floor_ratio = 0.01);

} // namespace ninlab
