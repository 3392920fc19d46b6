#include "ninlab/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ninlab {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    LineFit fit;
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return fit;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = fit.slope * x[i] + fit.intercept;
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.valid = true;
    return fit;
}

ExpFit fit_exponential(std::span<const double> t, std::span<const double> y) {
    ExpFit fit;
    const std::size_t n = std::min(t.size(), y.size());
    std::vector<double> tt, ly;
    tt.reserve(n);
    ly.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] > 0.0 && std::isfinite(y[i])) {
            tt.push_back(t[i]);
            ly.push_back(std::log(y[i]));
        }
    }
    if (tt.size() < 3) return fit;
    const LineFit line = fit_line(tt, ly);
    if (!line.valid || line.slope >= 0.0) return fit;
    fit.amplitude = std::exp(line.intercept);
    fit.tau = -1.0 / line.slope;
    fit.r2 = line.r2;
    fit.valid = true;
    return fit;
}

DecayWindow find_decay_window(std::span<const double> y, double overshoot,
                              double floor_ratio) {
    DecayWindow w{0, y.size()};
    if (y.empty()) return w;
    std::size_t peak = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[peak]) peak = i;
    if (y[0] > 0.0 && y[peak] >= overshoot * y[0] && peak + 1 < y.size()) w.first = peak;
    const double floor = floor_ratio * y[w.first];
    for (std::size_t i = w.first; i < y.size(); ++i) {
        if (y[i] <= floor) {
            w.last = i + 1;
            break;
        }
    }
    return w;
}

ExpFit fit_exponential_windowed(std::span<const double> t, std::span<const double> y,
                                double overshoot, double floor_ratio) {
    const DecayWindow w = find_decay_window(y, overshoot, floor_ratio);
    const std::size_t len = w.last - w.first;
    ExpFit best;
    // A fast initial transient (one or two large steps before the clean
    // exponential) can wreck the fit; retry from later starts and keep the
    // best R^2.
    for (std::size_t skip : {std::size_t{0}, len / 10, len / 4}) {
        const std::size_t a = w.first + skip;
        if (a + 3 > w.last) continue;
        ExpFit f = fit_exponential(t.subspan(a, w.last - a), y.subspan(a, w.last - a));
        if (f.valid && (!best.valid || f.r2 > best.r2)) best = f;
    }
    return best;
}

} // namespace ninlab
