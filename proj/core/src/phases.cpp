#include "ninlab/phases.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "ninlab/common.hpp"
#include "ninlab/csv.hpp"
#include "ninlab/fitting.hpp"

namespace ninlab {

std::string to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::decoupled: return "decoupled";
        case PhaseLabel::decay: return "decay";
        case PhaseLabel::catapult: return "catapult";
        case PhaseLabel::divergent: return "divergent";
    }
    return "?";
}

PhaseLabel phase_label_from_string(const std::string& s) {
    if (s == "decoupled") return PhaseLabel::decoupled;
    if (s == "decay") return PhaseLabel::decay;
    if (s == "catapult") return PhaseLabel::catapult;
    if (s == "divergent") return PhaseLabel::divergent;
    throw ConfigError("unknown phase label '" + s + "'");
}

PhaseBoundaries phase_boundaries(const LinearState& s) {
    s.validate();
    if (s.w1 == 0.0 && s.w_ni == 0.0)
        throw ConfigError("phase_boundaries: undefined for w1 = w_ni = 0");
    if (s.w1 == 0.0)
        throw ConfigError("phase_boundaries: b_tilde vanishes (w1 = 0)");
    const double inf = std::numeric_limits<double>::infinity();
    // |Phi| replaced by 1: these are magnitude scales, not sharp lines.
    const LinearCoefficients k = coefficients(s, 1.0);
    PhaseBoundaries b;
    b.sigma_dec = std::max(0.0, 2.0 * k.a_tilde / k.b_tilde);
    const double inv_b = k.b > 0.0 ? 2.0 / k.b : inf;
    const double inv_bt = 2.0 / k.b_tilde;
    b.sigma_cat = std::sqrt(std::min(inv_b, inv_bt));
    b.sigma_div = k.b > 0.0 ? std::sqrt(std::max(inv_b, inv_bt)) : inf;
    return b;
}

PhaseLabel classify_trajectory(std::span<const double> loss,
                               std::span<const double> niw_norm, bool diverged,
                               const ClassifierConfig& cfg) {
    auto nonfinite = [](std::span<const double> v) {
        return std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); });
    };
    if (diverged || nonfinite(loss) || nonfinite(niw_norm)) return PhaseLabel::divergent;
    if (loss.size() < cfg.min_steps || niw_norm.size() < cfg.min_steps)
        throw InsufficientDataError("classify_trajectory: trajectory too short (" +
                                    std::to_string(loss.size()) + " < " +
                                    std::to_string(cfg.min_steps) + " steps)");

    const double loss0 = loss.front();
    const double loss_max = *std::max_element(loss.begin(), loss.end());
    const double loss_end = loss.back();
    const double niw0 = niw_norm.front();
    const double niw_max = *std::max_element(niw_norm.begin(), niw_norm.end());
    const double niw_end = niw_norm.back();

    // Catapult: a loss blow-up that recovers, or an NIW excursion that grows
    // past the overshoot factor and then collapses while training recovers.
    const bool loss_spike = loss0 > 0.0 && loss_max > cfg.kappa * loss0 && loss_end < loss0;
    const bool niw_excursion = niw0 > 0.0 && niw_max >= cfg.overshoot * niw0 &&
                               niw_end <= cfg.recovery * niw_max &&
                               niw_end <= cfg.drop_min * niw0 && loss_end < loss0;
    if (loss_spike || niw_excursion) return PhaseLabel::catapult;

    // Decay: the NIW norm halves overall and the windowed series is an
    // exponential, or collapses below the window floor outright.
    if (niw0 > 0.0 && niw_end <= cfg.drop_min * niw0) {
        std::vector<double> t(niw_norm.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
        const ExpFit fit =
            fit_exponential_windowed(t, niw_norm, cfg.overshoot, cfg.window_floor);
        if (fit.valid && fit.r2 >= cfg.r2_min) return PhaseLabel::decay;
        const double niw_min = *std::min_element(niw_norm.begin(), niw_norm.end());
        if (niw_min <= cfg.window_floor * niw0) return PhaseLabel::decay;
    }
    return PhaseLabel::decoupled;
}

std::vector<ScanPoint> scan_sigma_grid(std::span<const double> sigma_grid,
                                       const RunFn& run, const ScanConfig& config) {
    if (config.seeds.empty()) throw ConfigError("scan_sigma_grid: need at least one seed");
    if (!std::is_sorted(sigma_grid.begin(), sigma_grid.end()))
        throw ConfigError("scan_sigma_grid: grid must be sorted ascending");
    const std::size_t n = sigma_grid.size();
    std::vector<ScanPoint> points(n);

    auto do_point = [&](std::size_t i) {
        ScanPoint& pt = points[i];
        pt.sigma_eps = sigma_grid[i];
        try {
            std::vector<RunSeries> runs;
            std::vector<PhaseLabel> labels;
            runs.reserve(config.seeds.size());
            for (std::uint64_t seed : config.seeds) {
                runs.push_back(run(sigma_grid[i], seed));
                const RunSeries& r = runs.back();
                labels.push_back(
                    classify_trajectory(r.loss, r.niw, r.diverged, config.classifier));
            }
            std::map<PhaseLabel, int> votes;
            for (PhaseLabel l : labels) ++votes[l];
            pt.label = std::max_element(votes.begin(), votes.end(),
                                        [](const auto& a, const auto& b) {
                                            return a.second < b.second;
                                        })
                           ->first;
            // Representative run: first seed agreeing with the majority.
            const std::size_t rep = static_cast<std::size_t>(
                std::find(labels.begin(), labels.end(), pt.label) - labels.begin());
            const RunSeries& r = runs[rep];
            if (!r.diverged && !r.t.empty()) {
                TimescaleInput in;
                in.t = r.t;
                in.niw = r.niw;
                in.train_loss = r.loss;
                in.test_loss = r.test_loss;
                in.overshoot = config.classifier.overshoot;
                pt.timescales = timescales(in);
                const double l0 = r.loss.front();
                const double lmax = *std::max_element(r.loss.begin(), r.loss.end());
                pt.peak_loss_ratio = l0 > 0.0 ? lmax / l0 : std::nan("");
            } else {
                pt.peak_loss_ratio = std::numeric_limits<double>::infinity();
            }
        } catch (const std::exception& e) {
            pt.failed = true;
            pt.error = e.what();
        }
    };

    const int workers = std::max(1, config.workers);
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) do_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int count = std::min<int>(workers, static_cast<int>(n));
        pool.reserve(static_cast<std::size_t>(count));
        for (int w = 0; w < count; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    do_point(i);
            });
        for (auto& th : pool) th.join();
    }
    return points;
}

RunFn linear_run_fn(LinearState base, long steps) {
    return [base, steps](double sigma_eps, std::uint64_t seed) {
        LinearState s = base;
        s.sigma_eps = sigma_eps;
        const LinearTrajectory traj = simulate_linear(s, steps, seed);
        RunSeries out;
        out.t = traj.series_steps();
        out.loss = traj.series_noisy_loss();
        out.niw = traj.series_abs_niw();
        out.diverged = traj.diverged;
        return out;
    };
}

std::string phase_scan_to_csv(std::span<const ScanPoint> points) {
    std::ostringstream out;
    out << "sigma_eps,label,tau_niw,tau_train,tau_test,peak_loss_ratio\n";
    for (const auto& p : points) {
        auto tau = [](const Tau& t) { return t.valid ? t.fitted : std::nan(""); };
        out << format_double(p.sigma_eps) << ',';
        if (p.failed)
            out << "error";
        else
            out << to_string(p.label);
        out << ',' << format_double(p.failed ? std::nan("") : tau(p.timescales.noise)) << ','
            << format_double(p.failed ? std::nan("") : tau(p.timescales.loss)) << ','
            << format_double(p.failed ? std::nan("") : tau(p.timescales.test)) << ','
            << format_double(p.failed ? std::nan("") : p.peak_loss_ratio) << '\n';
    }
    return out.str();
}

void write_phase_scan_csv(std::span<const ScanPoint> points, const std::string& path) {
    write_text_file(path, phase_scan_to_csv(points));
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    const auto c1 = text.find(':');
    if (c1 != std::string::npos) {
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw ConfigError("grid: expected start:end:count, got '" + text + "'");
        const double start = std::stod(text.substr(0, c1));
        const double end = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        const long count = std::stol(text.substr(c2 + 1));
        if (count < 1) throw ConfigError("grid: count must be >= 1");
        if (count == 1) return {start};
        grid.reserve(static_cast<std::size_t>(count));
        for (long i = 0; i < count; ++i)
            grid.push_back(start + (end - start) * static_cast<double>(i) /
                                       static_cast<double>(count - 1));
        return grid;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) grid.push_back(std::stod(item));
    }
    if (grid.empty()) throw ConfigError("grid: empty specification");
    return grid;
}

} // namespace ninlab
