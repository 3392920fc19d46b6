#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ninlab/matrix.hpp"
#include "ninlab/mlp.hpp"

namespace ninlab {

// Raw IDX tensor: big-endian header, unsigned-byte payload. Only dtype 0x08
// (unsigned byte) is supported, which covers the FMNIST files.
struct IdxTensor {
    std::uint8_t dtype = 0x08;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> payload;

    std::size_t element_count() const;
};

IdxTensor load_idx(const std::string& path);
void write_idx(const IdxTensor& tensor, const std::string& path);

// One split of a prepared dataset. For classification, `labels` holds class
// ids and `targets` their one-hot encoding; for regression `labels` is empty.
struct Split {
    Matrix inputs;
    Matrix targets;
    std::vector<int> labels;
    std::size_t size() const { return inputs.rows(); }
};

struct Dataset {
    Split train, val, test;
    int input_dim = 0;
    int num_classes = 0; // 0 for regression
    bool regression = false;
};

enum class Normalize { scalar, per_pixel };

// Loads the four FMNIST IDX files from `dir`, flattens each image to a
// 784-vector, shuffles with `seed`, optionally caps the pool at
// `subset_size` images, splits train/validation by `split_ratio`, and
// standardizes using statistics of the training split only.
// subset_size == 0 means use everything.
Dataset prepare_fmnist(const std::string& dir, double split_ratio,
                       std::size_t subset_size, std::uint64_t seed,
                       Normalize normalize = Normalize::scalar);

// Univariate regression samples: x ~ N(0, sigma_x^2), y = m * x.
struct LinearSamples {
    std::vector<double> x, y;
};
LinearSamples gen_linear_data(std::size_t m, double sigma_x, double slope,
                              std::uint64_t seed);

// Wraps linear samples as a regression Dataset (single input, single target)
// with a train/validation split.
Dataset linear_regression_dataset(const LinearSamples& samples, double split_ratio);

// Reproducible per-sample noise values. `resampled_per_epoch` is a pure
// function of (seed, epoch, sample), so any batch ordering sees the same
// values; `fixed_per_sample` tabulates epoch 0 once.
class NoiseStream {
public:
    NoiseStream(NoiseSpec spec, std::size_t dataset_size, std::uint64_t seed);

    double at(long epoch, std::size_t sample_index) const;
    std::size_t size() const { return size_; }
    const NoiseSpec& spec() const { return spec_; }

private:
    NoiseSpec spec_;
    std::size_t size_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> fixed_table_;
};

} // namespace ninlab
