#include "ninlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ninlab/common.hpp"
#include "ninlab/csv.hpp"

namespace ninlab {

std::vector<double> TrajectoryRecord::series_train_loss() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.train_loss);
    return v;
}

std::vector<double> TrajectoryRecord::series_test_loss() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.test_loss);
    return v;
}

std::vector<double> TrajectoryRecord::series_niw_norm() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.niw_norm);
    return v;
}

std::vector<double> TrajectoryRecord::series_steps() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(static_cast<double>(p.step));
    return v;
}

EvalResult evaluate(const MlpParams& params, const Split& split, LossKind kind,
                    bool classification) {
    EvalResult r;
    if (split.size() == 0) return r;
    ForwardTrace trace;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < split.size(); ++i) {
        const std::span<const double> x(split.inputs.row(i), split.inputs.cols());
        forward(params, x, 0.0, trace);
        const auto& out = trace.output();
        if (kind == LossKind::mse) {
            const std::span<const double> y(split.targets.row(i), split.targets.cols());
            loss_sum += mse_loss(out, y);
        } else {
            loss_sum += cross_entropy_loss(out, split.labels[i]);
        }
        if (classification) {
            const std::size_t arg = static_cast<std::size_t>(
                std::max_element(out.begin(), out.end()) - out.begin());
            if (static_cast<int>(arg) == split.labels[i]) ++correct;
        }
    }
    r.loss = loss_sum / static_cast<double>(split.size());
    r.accuracy = classification
                     ? static_cast<double>(correct) / static_cast<double>(split.size())
                     : std::nan("");
    return r;
}

namespace {

Batch gather_batch(const Split& split, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end, const NoiseStream& noise,
                   long epoch, bool classification) {
    Batch b;
    const std::size_t n = end - begin;
    b.inputs = Matrix(n, split.inputs.cols());
    b.targets = Matrix(n, split.targets.cols());
    if (classification) b.labels.resize(n);
    b.noise.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[begin + k];
        std::copy(split.inputs.row(src), split.inputs.row(src) + split.inputs.cols(),
                  b.inputs.row(k));
        std::copy(split.targets.row(src), split.targets.row(src) + split.targets.cols(),
                  b.targets.row(k));
        if (classification) b.labels[k] = split.labels[src];
        b.noise[k] = noise.at(epoch, src);
    }
    return b;
}

double batch_accuracy(const MlpParams& params, const Batch& b) {
    ForwardTrace trace;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const std::span<const double> x(b.inputs.row(i), b.inputs.cols());
        forward(params, x, b.noise[i], trace);
        const auto& out = trace.output();
        const std::size_t arg = static_cast<std::size_t>(
            std::max_element(out.begin(), out.end()) - out.begin());
        if (static_cast<int>(arg) == b.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(b.size());
}

} // namespace

TrajectoryRecord train(const TrainConfig& config, const Dataset& data,
                       const NoiseSpec& noise_spec) {
    if (data.train.size() == 0) throw DataError("train: empty training split");
    if (config.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    const bool classification = !data.regression;

    MlpParams params = init_mlp(config.arch, config.activation, config.ni_layer,
                                InitScheme{config.init_gain}, config.init_seed);
    NoiseStream noise(noise_spec, data.train.size(), config.noise_seed);
    std::mt19937_64 shuffle_rng(config.shuffle_seed);

    const std::size_t n = data.train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrajectoryRecord rec;
    long step = 0;

    auto log_point = [&](double train_loss, double train_acc, bool diverged) {
        TrajectoryPoint p;
        p.step = step;
        p.train_loss = train_loss;
        p.train_acc = train_acc;
        const EvalResult ev = evaluate(params, data.val, config.loss, classification);
        p.test_loss = ev.loss;
        p.test_acc = ev.accuracy;
        p.niw_norm = l2_norm(params.niw);
        p.layer_norms.reserve(params.weights.size());
        for (const Matrix& w : params.weights) p.layer_norms.push_back(w.frobenius_norm());
        p.diverged = diverged;
        rec.points.push_back(std::move(p));
    };

    for (int epoch = 0; epoch < config.epochs && !rec.diverged; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t at = 0; at < n; at += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(n, at + static_cast<std::size_t>(config.batch_size));
            Batch batch = gather_batch(data.train, order, at, end, noise, epoch, classification);

            double batch_loss = 0.0;
            MlpGradients grads = backward(params, batch, config.loss, &batch_loss);
            rec.step_train_loss.push_back(batch_loss);
            if (config.record_grad_sq) rec.grad_sq.push_back(grads.squared_norm());

            if (!std::isfinite(batch_loss) || batch_loss > config.divergence_threshold) {
                rec.diverged = true;
                log_point(batch_loss, std::nan(""), true);
                break;
            }
            if (step % config.log_every == 0) {
                const double acc = classification ? batch_accuracy(params, batch)
                                                  : std::nan("");
                log_point(batch_loss, acc, false);
            }
            sgd_step(params, grads, config.eta);
            ++step;
        }
    }
    return rec;
}

std::string trajectory_to_csv(const TrajectoryRecord& record) {
    std::ostringstream out;
    const std::size_t n_layers =
        record.points.empty() ? 0 : record.points.front().layer_norms.size();
    out << "step,train_loss,test_loss,train_acc,test_acc,niw_norm";
    for (std::size_t l = 0; l < n_layers; ++l) out << ",w_norm_" << l;
    out << ",diverged\n";
    for (const auto& p : record.points) {
        out << p.step << ',' << format_double(p.train_loss) << ','
            << format_double(p.test_loss) << ',' << format_double(p.train_acc) << ','
            << format_double(p.test_acc) << ',' << format_double(p.niw_norm);
        for (double w : p.layer_norms) out << ',' << format_double(w);
        out << ',' << (p.diverged ? 1 : 0) << '\n';
    }
    return out.str();
}

void write_trajectory_csv(const TrajectoryRecord& record, const std::string& path) {
    write_text_file(path, trajectory_to_csv(record));
}

} // namespace ninlab
