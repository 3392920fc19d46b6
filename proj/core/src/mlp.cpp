#include "ninlab/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "ninlab/common.hpp"
#include "ninlab/rng.hpp"

namespace ninlab {

namespace {

double activate(double z, Activation a) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::linear: return z;
        case Activation::tanh: return std::tanh(z);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    }
    return z;
}

// Derivative expressed through the preactivation. ReLU uses the standard
// subgradient with derivative 0 at exactly 0.
double activate_deriv(double z, Activation a) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::linear: return 1.0;
        case Activation::tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 - s);
        }
    }
    return 1.0;
}

void softmax_inplace(std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

} // namespace

bool MlpParams::all_finite() const {
    for (const Matrix& w : weights)
        if (!w.all_finite()) return false;
    for (const auto& b : biases)
        if (!ninlab::all_finite(b)) return false;
    return ninlab::all_finite(niw);
}

void MlpParams::validate() const {
    if (weights.empty() || weights.size() != biases.size())
        throw ConfigError("mlp: weights/biases layer counts disagree");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() == 0 || weights[l].cols() == 0)
            throw ConfigError("mlp: zero-width layer " + std::to_string(l));
        if (biases[l].size() != weights[l].rows())
            throw ConfigError("mlp: bias length mismatch at layer " + std::to_string(l));
        if (l + 1 < weights.size() && weights[l + 1].cols() != weights[l].rows())
            throw ConfigError("mlp: adjacent layer dims inconsistent at layer " +
                              std::to_string(l));
    }
    if (ni_layer < 0 || ni_layer >= num_layers())
        throw ConfigError("mlp: ni_layer out of range");
    if (niw.size() != weights[static_cast<std::size_t>(ni_layer)].rows())
        throw ConfigError("mlp: niw length must equal the output width of ni_layer");
}

MlpGradients MlpGradients::zeros_like(const MlpParams& p) {
    MlpGradients g;
    g.weights.reserve(p.weights.size());
    g.biases.reserve(p.biases.size());
    for (const Matrix& w : p.weights) g.weights.emplace_back(w.rows(), w.cols());
    for (const auto& b : p.biases) g.biases.emplace_back(b.size(), 0.0);
    g.niw.assign(p.niw.size(), 0.0);
    return g;
}

double MlpGradients::squared_norm() const {
    double s = 0.0;
    for (const Matrix& w : weights)
        for (double v : w.data()) s += v * v;
    for (const auto& b : biases)
        for (double v : b) s += v * v;
    for (double v : niw) s += v * v;
    return s;
}

MlpParams init_mlp(const std::vector<int>& arch, Activation activation, int ni_layer,
                   InitScheme scheme, std::uint64_t seed) {
    if (arch.size() < 2) throw ConfigError("init_mlp: arch needs at least 2 entries");
    for (int w : arch)
        if (w <= 0) throw ConfigError("init_mlp: zero or negative layer width");
    const int n_layers = static_cast<int>(arch.size()) - 1;
    if (ni_layer < 0 || ni_layer >= n_layers)
        throw ConfigError("init_mlp: ni_layer must be in [0, " +
                          std::to_string(n_layers - 1) + "]");
    if (scheme.gain < 0.0) throw ConfigError("init_mlp: negative init gain");

    MlpParams p;
    p.ni_layer = ni_layer;
    p.activation = activation;
    GaussianStream g(seed);
    for (int l = 0; l < n_layers; ++l) {
        const auto fan_in = static_cast<std::size_t>(arch[static_cast<std::size_t>(l)]);
        const auto fan_out = static_cast<std::size_t>(arch[static_cast<std::size_t>(l) + 1]);
        Matrix w(fan_out, fan_in);
        const double sd = std::sqrt(scheme.gain / static_cast<double>(fan_in));
        for (double& v : w.data()) v = g.next(0.0, sd);
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(fan_out, 0.0);
    }
    const double ni_sd =
        std::sqrt(scheme.gain / static_cast<double>(arch[static_cast<std::size_t>(ni_layer)]));
    p.niw.resize(p.weights[static_cast<std::size_t>(ni_layer)].rows());
    for (double& v : p.niw) v = g.next(0.0, ni_sd);
    p.validate();
    return p;
}

void forward(const MlpParams& params, std::span<const double> input, double eps,
             ForwardTrace& trace) {
    const int L = params.num_layers();
    if (input.size() != params.weights[0].cols())
        throw ConfigError("forward: input length mismatch");
    for (double v : input)
        if (!std::isfinite(v)) throw NumericError("forward: non-finite input");

    trace.preacts.resize(static_cast<std::size_t>(L));
    trace.acts.resize(static_cast<std::size_t>(L) + 1);
    trace.acts[0].assign(input.begin(), input.end());

    for (int l = 0; l < L; ++l) {
        const Matrix& w = params.weights[static_cast<std::size_t>(l)];
        const auto& b = params.biases[static_cast<std::size_t>(l)];
        const auto& x = trace.acts[static_cast<std::size_t>(l)];
        auto& z = trace.preacts[static_cast<std::size_t>(l)];
        z.assign(w.rows(), 0.0);
        for (std::size_t i = 0; i < w.rows(); ++i) {
            const double* wr = w.row(i);
            double acc = b[i];
            for (std::size_t j = 0; j < w.cols(); ++j) acc += wr[j] * x[j];
            z[i] = acc;
        }
        if (l == params.ni_layer && eps != 0.0)
            for (std::size_t i = 0; i < z.size(); ++i) z[i] += params.niw[i] * eps;

        auto& out = trace.acts[static_cast<std::size_t>(l) + 1];
        out.resize(z.size());
        if (l == L - 1) {
            out = z; // output layer stays affine; losses interpret it
        } else {
            for (std::size_t i = 0; i < z.size(); ++i)
                out[i] = activate(z[i], params.activation);
        }
    }
}

std::vector<double> forward_output(const MlpParams& params, std::span<const double> input,
                                   double eps) {
    ForwardTrace t;
    forward(params, input, eps, t);
    return t.output();
}

double mse_loss(std::span<const double> output, std::span<const double> target) {
    if (output.size() != target.size()) throw ConfigError("mse_loss: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double d = output[i] - target[i];
        s += d * d;
    }
    return 0.5 * s;
}

double cross_entropy_loss(std::span<const double> logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        throw DataError("cross_entropy_loss: label out of range");
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    return m + std::log(sum) - logits[static_cast<std::size_t>(label)];
}

double loss_eval(std::span<const double> output, std::span<const double> target,
                 int label, LossKind kind) {
    return kind == LossKind::mse ? mse_loss(output, target)
                                 : cross_entropy_loss(output, label);
}

MlpGradients backward(const MlpParams& params, const Batch& batch, LossKind kind,
                      double* batch_loss) {
    if (batch.size() == 0) throw DataError("backward: empty batch");
    if (!params.all_finite()) throw NumericError("backward: non-finite parameters");
    const int L = params.num_layers();
    const std::size_t n = batch.size();

    MlpGradients g = MlpGradients::zeros_like(params);
    ForwardTrace trace;
    std::vector<double> delta, delta_prev;
    double loss_sum = 0.0;

    for (std::size_t s = 0; s < n; ++s) {
        const std::span<const double> x(batch.inputs.row(s), batch.inputs.cols());
        const double eps = batch.noise.empty() ? 0.0 : batch.noise[s];
        forward(params, x, eps, trace);

        const auto& out = trace.output();
        if (kind == LossKind::mse) {
            const std::span<const double> y(batch.targets.row(s), batch.targets.cols());
            loss_sum += mse_loss(out, y);
            delta.resize(out.size());
            for (std::size_t i = 0; i < out.size(); ++i) delta[i] = out[i] - y[i];
        } else {
            const int label = batch.labels[s];
            loss_sum += cross_entropy_loss(out, label);
            delta = out;
            softmax_inplace(delta);
            delta[static_cast<std::size_t>(label)] -= 1.0;
        }

        // delta holds dL/dz at the current layer; walk backwards.
        for (int l = L - 1; l >= 0; --l) {
            const Matrix& w = params.weights[static_cast<std::size_t>(l)];
            Matrix& gw = g.weights[static_cast<std::size_t>(l)];
            auto& gb = g.biases[static_cast<std::size_t>(l)];
            const auto& xin = trace.acts[static_cast<std::size_t>(l)];
            for (std::size_t i = 0; i < w.rows(); ++i) {
                const double d = delta[i];
                if (d == 0.0) continue;
                double* gwr = gw.row(i);
                for (std::size_t j = 0; j < w.cols(); ++j) gwr[j] += d * xin[j];
                gb[i] += d;
            }
            if (l == params.ni_layer && eps != 0.0)
                for (std::size_t i = 0; i < delta.size(); ++i) g.niw[i] += eps * delta[i];
            if (l == 0) break;

            delta_prev.assign(w.cols(), 0.0);
            for (std::size_t i = 0; i < w.rows(); ++i) {
                const double d = delta[i];
                if (d == 0.0) continue;
                const double* wr = w.row(i);
                for (std::size_t j = 0; j < w.cols(); ++j) delta_prev[j] += wr[j] * d;
            }
            const auto& z = trace.preacts[static_cast<std::size_t>(l) - 1];
            for (std::size_t j = 0; j < delta_prev.size(); ++j)
                delta_prev[j] *= activate_deriv(z[j], params.activation);
            std::swap(delta, delta_prev);
        }
    }

    const double inv = 1.0 / static_cast<double>(n);
    for (Matrix& w : g.weights)
        for (double& v : w.data()) v *= inv;
    for (auto& b : g.biases)
        for (double& v : b) v *= inv;
    for (double& v : g.niw) v *= inv;
    if (batch_loss) *batch_loss = loss_sum * inv;
    return g;
}

void sgd_step(MlpParams& params, const MlpGradients& grads, double eta) {
    if (eta <= 0.0) throw ConfigError("sgd_step: eta must be positive");
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        auto& w = params.weights[l].data();
        const auto& gw = grads.weights[l].data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * gw[i];
        auto& b = params.biases[l];
        const auto& gb = grads.biases[l];
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= eta * gb[i];
    }
    for (std::size_t i = 0; i < params.niw.size(); ++i) params.niw[i] -= eta * grads.niw[i];
}

} // namespace ninlab
