#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace ninlab {

// Dense row-major matrix of doubles. Just enough linear algebra for an MLP.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : data_(rows * cols, fill), rows_(rows), cols_(cols) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::vector<double> data_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Pairwise (cascade) summation; keeps long accumulations order-stable.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size());
}

} // namespace ninlab
