#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ninlab/matrix.hpp"

namespace ninlab {

enum class Activation { relu, linear, tanh, sigmoid };
enum class LossKind { mse, cross_entropy };

// Noise injection node behaviour. `off` forces the injected value to exactly
// zero; `fixed_per_sample` draws one value per sample and reuses it every
// epoch; `resampled_per_epoch` redraws per (epoch, sample).
enum class NoiseMode { off, fixed_per_sample, resampled_per_epoch };

struct NoiseSpec {
    double sigma_eps = 0.0;
    NoiseMode mode = NoiseMode::off;
};

// Feed-forward network parameters plus the noise-injection weight vector.
// weights[l] has shape (arch[l+1] x arch[l]); the NIN shifts the
// preactivations of layer ni_layer by niw * eps.
struct MlpParams {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> niw;
    int ni_layer = 0;
    Activation activation = Activation::relu;

    int num_layers() const { return static_cast<int>(weights.size()); }
    bool all_finite() const;
    // Throws ConfigError if shapes are inconsistent.
    void validate() const;
};

// Gradients share the parameter layout.
struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> niw;

    static MlpGradients zeros_like(const MlpParams& p);
    double squared_norm() const;
};

struct Batch {
    Matrix inputs;            // |B| x d_in
    Matrix targets;           // |B| x d_label (mse)
    std::vector<int> labels;  // |B| class ids (cross_entropy / accuracy)
    std::vector<double> noise; // |B| injected eps values
    std::size_t size() const { return inputs.rows(); }
};

struct InitScheme {
    // Entry variance is gain / fan_in; gain 0 gives an all-zero network.
    double gain = 1.0;
};

// Weights ~ N(0, gain/fan_in), biases zero, NIW follows the fan-in rule of
// the layer it feeds. Deterministic for a fixed seed.
MlpParams init_mlp(const std::vector<int>& arch, Activation activation, int ni_layer,
                   InitScheme scheme, std::uint64_t seed);

// Per-sample forward pass; keeps every preactivation for backprop and
// inspection. With eps == 0 the result is bit-identical to a NIN-free pass.
struct ForwardTrace {
    std::vector<std::vector<double>> preacts; // z per layer
    std::vector<std::vector<double>> acts;    // acts[0] = input, acts[L] = output
    const std::vector<double>& output() const { return acts.back(); }
};

void forward(const MlpParams& params, std::span<const double> input, double eps,
             ForwardTrace& trace);
std::vector<double> forward_output(const MlpParams& params, std::span<const double> input,
                                   double eps);

// Single-sample losses. MSE uses the 1/2 convention; cross-entropy applies a
// max-shifted softmax to the logits.
double mse_loss(std::span<const double> output, std::span<const double> target);
double cross_entropy_loss(std::span<const double> logits, int label);
double loss_eval(std::span<const double> output, std::span<const double> target,
                 int label, LossKind kind);

// Batch-averaged gradients of the empirical loss, including d/dNIW.
// Also reports the batch mean loss.
MlpGradients backward(const MlpParams& params, const Batch& batch, LossKind kind,
                      double* batch_loss = nullptr);

// theta <- theta - eta * grad, for every parameter group.
void sgd_step(MlpParams& params, const MlpGradients& grads, double eta);

} // namespace ninlab
