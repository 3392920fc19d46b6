#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ninlab/data_io.hpp"
#include "ninlab/mlp.hpp"

namespace ninlab {

struct TrajectoryPoint {
    long step = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double train_acc = 0.0; // nan for regression
    double test_acc = 0.0;  // nan for regression
    double niw_norm = 0.0;
    std::vector<double> layer_norms;
    bool diverged = false;
};

struct TrajectoryRecord {
    std::vector<TrajectoryPoint> points;
    bool diverged = false;
    // Filled only when TrainConfig::record_grad_sq is set: per-step squared
    // gradient norm of the whole parameter vector (for the delta-loss check).
    std::vector<double> grad_sq;
    std::vector<double> step_train_loss; // per-step batch loss, every step

    std::vector<double> series_train_loss() const;
    std::vector<double> series_test_loss() const;
    std::vector<double> series_niw_norm() const;
    std::vector<double> series_steps() const;
};

struct TrainConfig {
    std::vector<int> arch;
    Activation activation = Activation::relu;
    int ni_layer = 0;
    LossKind loss = LossKind::mse;
    double eta = 0.01;
    int batch_size = 128;
    int epochs = 1;
    std::uint64_t init_seed = 1;
    std::uint64_t shuffle_seed = 2;
    std::uint64_t noise_seed = 3;
    int log_every = 1;           // trajectory row every n steps
    double init_gain = 1.0;
    double divergence_threshold = kDivergenceThreshold;
    bool record_grad_sq = false;
};

// Vanilla SGD over the training split. Shuffles without replacement each
// epoch, resamples eps per epoch in resampled mode, evaluates the validation
// split with eps forced to 0, and stops early with the diverged flag set
// when the batch loss is non-finite or above the divergence threshold.
TrajectoryRecord train(const TrainConfig& config, const Dataset& data,
                       const NoiseSpec& noise);

// `step,train_loss,test_loss,train_acc,test_acc,niw_norm,w_norm_0,...,diverged`
std::string trajectory_to_csv(const TrajectoryRecord& record);
void write_trajectory_csv(const TrajectoryRecord& record, const std::string& path);

// Mean loss / accuracy of a split with eps = 0.
struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};
EvalResult evaluate(const MlpParams& params, const Split& split, LossKind kind,
                    bool classification);

} // namespace ninlab
