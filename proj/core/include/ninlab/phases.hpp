#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ninlab/continuum.hpp"
#include "ninlab/linear_model.hpp"

namespace ninlab {

enum class PhaseLabel { decoupled, decay, catapult, divergent };

std::string to_string(PhaseLabel label);
PhaseLabel phase_label_from_string(const std::string& s);

// Noise-scale thresholds of the linear model at t = 0 (each a sigma_eps
// value, not its square). A vanishing w_ni maps the affected bound to
// infinity.
struct PhaseBoundaries {
    double sigma_dec = 0.0;
    double sigma_cat = 0.0;
    double sigma_div = 0.0;
};

PhaseBoundaries phase_boundaries(const LinearState& initial);

struct ClassifierConfig {
    double kappa = 3.0;        // loss-spike factor for catapult
    double overshoot = 1.2;    // NIW growth factor marking a catapult excursion
    double recovery = 0.5;     // NIW must fall back to this fraction of its peak
    double drop_min = 0.5;     // total NIW drop for the decay label
    double r2_min = 0.9;       // exponential-fit quality gate
    double window_floor = 0.01; // decay window ends at this fraction of start
    std::size_t min_steps = 50;
};

// Heuristic four-way classification from a loss series and a nonnegative
// NIW-norm series. Throws InsufficientDataError below min_steps (unless the
// diverged flag is set).
PhaseLabel classify_trajectory(std::span<const double> loss,
                               std::span<const double> niw_norm, bool diverged,
                               const ClassifierConfig& config = {});

// One grid point of a sigma scan.
struct ScanPoint {
    double sigma_eps = 0.0;
    PhaseLabel label = PhaseLabel::decoupled;
    TimescaleReport timescales;
    double peak_loss_ratio = 0.0;
    bool failed = false;
    std::string error;
};

// A run produces the series the classifier and timescale extractor need.
struct RunSeries {
    std::vector<double> t;
    std::vector<double> loss;      // train-loss proxy used for classification
    std::vector<double> niw;       // nonnegative NIW magnitude series
    std::vector<double> test_loss; // may be empty
    bool diverged = false;
};

using RunFn = std::function<RunSeries(double sigma_eps, std::uint64_t seed)>;

struct ScanConfig {
    std::vector<std::uint64_t> seeds = {1};
    int workers = 1;
    ClassifierConfig classifier;
};

// Runs `run` at every sigma in the grid for every seed, takes the majority
// label per point, and attaches the timescale summary of the first seed that
// agrees with the majority. Per-run exceptions are captured as failed points
// without aborting the scan. Output order matches the grid regardless of
// worker scheduling.
std::vector<ScanPoint> scan_sigma_grid(std::span<const double> sigma_grid,
                                       const RunFn& run, const ScanConfig& config);

// Canned run functions.
RunFn linear_run_fn(LinearState base, long steps);

// `sigma_eps,label,tau_niw,tau_train,tau_test,peak_loss_ratio`
std::string phase_scan_to_csv(std::span<const ScanPoint> points);
void write_phase_scan_csv(std::span<const ScanPoint> points, const std::string& path);

// Parses "a:b:n" (n points, endpoints inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& text);

} // namespace ninlab
