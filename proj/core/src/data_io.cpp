#include "ninlab/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "ninlab/common.hpp"
#include "ninlab/rng.hpp"

namespace ninlab {

std::size_t IdxTensor::element_count() const {
    std::size_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const std::uint8_t bytes[4] = {static_cast<std::uint8_t>(v >> 24),
                                   static_cast<std::uint8_t>(v >> 16),
                                   static_cast<std::uint8_t>(v >> 8),
                                   static_cast<std::uint8_t>(v)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

} // namespace

IdxTensor load_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_idx: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 4) throw FormatError("load_idx: file shorter than magic", 0);
    if (bytes[0] != 0 || bytes[1] != 0)
        throw FormatError("load_idx: bad magic prefix", 0);
    const std::uint8_t dtype = bytes[2];
    const std::uint8_t rank = bytes[3];
    if (dtype != 0x08) throw FormatError("load_idx: unsupported dtype", 2);
    if (rank == 0) throw FormatError("load_idx: zero-rank tensor", 3);
    const std::size_t header = 4 + 4 * static_cast<std::size_t>(rank);
    if (bytes.size() < header)
        throw FormatError("load_idx: truncated header", static_cast<long long>(bytes.size()));

    IdxTensor t;
    t.dtype = dtype;
    t.dims.resize(rank);
    for (std::size_t i = 0; i < rank; ++i) t.dims[i] = read_be32(&bytes[4 + 4 * i]);
    const std::size_t expected = t.element_count();
    if (bytes.size() != header + expected)
        throw FormatError("load_idx: payload size mismatch, expected " +
                              std::to_string(expected) + " bytes, got " +
                              std::to_string(bytes.size() - header),
                          static_cast<long long>(bytes.size()));
    t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    return t;
}

void write_idx(const IdxTensor& tensor, const std::string& path) {
    if (tensor.dims.empty()) throw FormatError("write_idx: zero-rank tensor");
    if (tensor.payload.size() != tensor.element_count())
        throw FormatError("write_idx: payload size does not match dims");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_idx: cannot open " + path);
    const std::uint8_t magic[4] = {0, 0, tensor.dtype,
                                   static_cast<std::uint8_t>(tensor.dims.size())};
    out.write(reinterpret_cast<const char*>(magic), 4);
    for (std::uint32_t d : tensor.dims) write_be32(out, d);
    out.write(reinterpret_cast<const char*>(tensor.payload.data()),
              static_cast<std::streamsize>(tensor.payload.size()));
    if (!out) throw DataError("write_idx: short write to " + path);
}

namespace {

struct RawFmnist {
    Matrix images; // n x 784, raw 0..255 values
    std::vector<int> labels;
};

RawFmnist load_pair(const std::string& images_path, const std::string& labels_path) {
    const IdxTensor imgs = load_idx(images_path);
    const IdxTensor labs = load_idx(labels_path);
    if (imgs.dims.size() != 3)
        throw FormatError("prepare_fmnist: image tensor must have rank 3");
    if (labs.dims.size() != 1)
        throw FormatError("prepare_fmnist: label tensor must have rank 1");
    if (imgs.dims[0] != labs.dims[0])
        throw DataError("prepare_fmnist: image/label counts disagree");
    const std::size_t n = imgs.dims[0];
    const std::size_t d = static_cast<std::size_t>(imgs.dims[1]) * imgs.dims[2];
    RawFmnist out;
    out.images = Matrix(n, d);
    for (std::size_t i = 0; i < n * d; ++i)
        out.images.data()[i] = static_cast<double>(imgs.payload[i]);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = labs.payload[i];
    return out;
}

Matrix one_hot(const std::vector<int>& labels, int num_classes) {
    Matrix t(labels.size(), static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i)
        t(i, static_cast<std::size_t>(labels[i])) = 1.0;
    return t;
}

Split make_split(const Matrix& pool, const std::vector<int>& labels,
                 const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                 int num_classes) {
    Split s;
    s.inputs = Matrix(end - begin, pool.cols());
    s.labels.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const std::size_t src = order[i];
        std::copy(pool.row(src), pool.row(src) + pool.cols(), s.inputs.row(i - begin));
        s.labels[i - begin] = labels[src];
    }
    s.targets = one_hot(s.labels, num_classes);
    return s;
}

void standardize(Matrix& m, double mean, double sd) {
    for (double& v : m.data()) v = (v - mean) / sd;
}

void standardize_per_pixel(Matrix& m, const std::vector<double>& mean,
                           const std::vector<double>& sd) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) r[j] = (r[j] - mean[j]) / sd[j];
    }
}

} // namespace

Dataset prepare_fmnist(const std::string& dir, double split_ratio, std::size_t subset_size,
                       std::uint64_t seed, Normalize normalize) {
    if (split_ratio <= 0.0 || split_ratio >= 1.0)
        throw ConfigError("prepare_fmnist: split_ratio must be in (0,1)");
    namespace fs = std::filesystem;
    const fs::path base(dir);
    const auto train_images = (base / "train-images-idx3-ubyte").string();
    const auto train_labels = (base / "train-labels-idx1-ubyte").string();
    if (!fs::exists(train_images) || !fs::exists(train_labels))
        throw DataError("prepare_fmnist: missing FMNIST IDX files under " + dir);

    RawFmnist pool = load_pair(train_images, train_labels);
    const std::size_t total = pool.images.rows();
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Fisher-Yates driven by the counter generator; deterministic in `seed`.
    for (std::size_t i = total - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(
            splitmix64(seed ^ splitmix64(i)) % (i + 1));
        std::swap(order[i], order[j]);
    }
    const std::size_t used = subset_size == 0 ? total : std::min(subset_size, total);
    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(split_ratio * static_cast<double>(used)));
    if (n_train == 0 || n_train == used)
        throw ConfigError("prepare_fmnist: degenerate split");

    Dataset ds;
    ds.input_dim = static_cast<int>(pool.images.cols());
    ds.num_classes = 10;
    ds.regression = false;
    ds.train = make_split(pool.images, pool.labels, order, 0, n_train, ds.num_classes);
    ds.val = make_split(pool.images, pool.labels, order, n_train, used, ds.num_classes);

    const auto test_images = (base / "t10k-images-idx3-ubyte").string();
    const auto test_labels = (base / "t10k-labels-idx1-ubyte").string();
    if (fs::exists(test_images) && fs::exists(test_labels)) {
        RawFmnist test = load_pair(test_images, test_labels);
        std::vector<std::size_t> ident(test.images.rows());
        std::iota(ident.begin(), ident.end(), std::size_t{0});
        ds.test = make_split(test.images, test.labels, ident, 0, test.images.rows(),
                             ds.num_classes);
    }

    // Normalization statistics come from the training split only.
    if (normalize == Normalize::scalar) {
        const auto& d = ds.train.inputs.data();
        const double mean = pairwise_sum(d) / static_cast<double>(d.size());
        double var = 0.0;
        for (double v : d) var += (v - mean) * (v - mean);
        var /= static_cast<double>(d.size());
        const double sd = std::sqrt(var);
        standardize(ds.train.inputs, mean, sd);
        standardize(ds.val.inputs, mean, sd);
        if (!ds.test.inputs.empty()) standardize(ds.test.inputs, mean, sd);
    } else {
        const std::size_t d = ds.train.inputs.cols();
        std::vector<double> mean(d, 0.0), sd(d, 0.0);
        const double n = static_cast<double>(ds.train.size());
        for (std::size_t i = 0; i < ds.train.size(); ++i) {
            const double* r = ds.train.inputs.row(i);
            for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
        }
        for (double& v : mean) v /= n;
        for (std::size_t i = 0; i < ds.train.size(); ++i) {
            const double* r = ds.train.inputs.row(i);
            for (std::size_t j = 0; j < d; ++j) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
        }
        for (double& v : sd) v = std::max(std::sqrt(v / n), 1e-12);
        standardize_per_pixel(ds.train.inputs, mean, sd);
        standardize_per_pixel(ds.val.inputs, mean, sd);
        if (!ds.test.inputs.empty()) standardize_per_pixel(ds.test.inputs, mean, sd);
    }
    return ds;
}

LinearSamples gen_linear_data(std::size_t m, double sigma_x, double slope,
                              std::uint64_t seed) {
    if (m == 0) throw ConfigError("gen_linear_data: need at least one sample");
    if (sigma_x <= 0.0) throw ConfigError("gen_linear_data: sigma_x must be positive");
    LinearSamples out;
    out.x.resize(m);
    out.y.resize(m);
    GaussianStream g(seed);
    for (std::size_t i = 0; i < m; ++i) {
        out.x[i] = g.next(0.0, sigma_x);
        out.y[i] = slope * out.x[i];
    }
    return out;
}

Dataset linear_regression_dataset(const LinearSamples& samples, double split_ratio) {
    if (split_ratio <= 0.0 || split_ratio >= 1.0)
        throw ConfigError("linear_regression_dataset: split_ratio must be in (0,1)");
    const std::size_t n = samples.x.size();
    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(split_ratio * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw ConfigError("linear_regression_dataset: degenerate split");
    Dataset ds;
    ds.input_dim = 1;
    ds.regression = true;
    auto fill = [&](Split& s, std::size_t begin, std::size_t end) {
        s.inputs = Matrix(end - begin, 1);
        s.targets = Matrix(end - begin, 1);
        for (std::size_t i = begin; i < end; ++i) {
            s.inputs(i - begin, 0) = samples.x[i];
            s.targets(i - begin, 0) = samples.y[i];
        }
    };
    fill(ds.train, 0, n_train);
    fill(ds.val, n_train, n);
    return ds;
}

NoiseStream::NoiseStream(NoiseSpec spec, std::size_t dataset_size, std::uint64_t seed)
    : spec_(spec), size_(dataset_size), seed_(seed) {
    if (spec_.sigma_eps < 0.0) throw ConfigError("NoiseStream: sigma_eps must be >= 0");
    if (spec_.mode == NoiseMode::fixed_per_sample) {
        fixed_table_.resize(size_);
        for (std::size_t i = 0; i < size_; ++i)
            fixed_table_[i] = spec_.sigma_eps * counter_gauss(seed_, 0, i);
    }
}

double NoiseStream::at(long epoch, std::size_t sample_index) const {
    if (sample_index >= size_) throw DataError("NoiseStream: sample index out of range");
    switch (spec_.mode) {
        case NoiseMode::off: return 0.0;
        case NoiseMode::fixed_per_sample: return fixed_table_[sample_index];
        case NoiseMode::resampled_per_epoch:
            return spec_.sigma_eps *
                   counter_gauss(seed_, static_cast<std::uint64_t>(epoch), sample_index);
    }
    return 0.0;
}

} // namespace ninlab
