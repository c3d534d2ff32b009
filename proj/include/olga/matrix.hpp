#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "olga/error.hpp"

namespace olga {

// Dense row-major matrix of doubles. The whole pipeline is desk-scale, so
// there is no sparse storage and no expression fusion; kernels below are
// plain loops arranged for contiguous access.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) throw DimensionError("Matrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(0.0); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool bitwise_equal(const Matrix& o) const {
        if (!same_shape(o)) return false;
        for (std::size_t i = 0; i < data_.size(); ++i)
            if (data_[i] != o.data_[i] || std::signbit(data_[i]) != std::signbit(o.data_[i]))
                return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class Unary { Tanh, Relu, Sigmoid, Exp };

inline double apply_unary(Unary op, double x) {
    switch (op) {
        case Unary::Tanh: return std::tanh(x);
        case Unary::Relu: return x > 0.0 ? x : 0.0;
        case Unary::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Unary::Exp: return std::exp(x);
    }
    return 0.0;
}

// Derivative expressed from input x and output y, so sigmoid/tanh reuse the
// forward value instead of re-evaluating exp. relu uses subgradient 0 at 0.
inline double unary_derivative(Unary op, double x, double y) {
    switch (op) {
        case Unary::Tanh: return 1.0 - y * y;
        case Unary::Relu: return x > 0.0 ? 1.0 : 0.0;
        case Unary::Sigmoid: return y * (1.0 - y);
        case Unary::Exp: return y;
    }
    return 0.0;
}

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* where) {
    if (!a.same_shape(b))
        throw DimensionError(std::string(where) + ": shape mismatch " + std::to_string(a.rows()) +
                             "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                             "x" + std::to_string(b.cols()));
}

// dst = a * b, i-k-j loop order so the inner loop streams both operands.
inline void matmul_into(Matrix& dst, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()));
    dst.zero();
    const std::size_t n = a.rows(), k_max = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* d = dst.data() + i * m;
        for (std::size_t k = 0; k < k_max; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data() + k * m;
            for (std::size_t j = 0; j < m; ++j) d[j] += aik * brow[j];
        }
    }
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix dst(a.rows(), b.cols());
    matmul_into(dst, a, b);
    return dst;
}

// dst += g * b^T  (gradient of the left matmul operand)
inline void accumulate_matmul_bt(Matrix& dst, const Matrix& g, const Matrix& b) {
    const std::size_t n = g.rows(), m = g.cols(), k_max = b.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const double* grow = g.data() + i * m;
        for (std::size_t k = 0; k < k_max; ++k) {
            const double* brow = b.data() + k * m;
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
            dst(i, k) += acc;
        }
    }
}

// dst += a^T * g  (gradient of the right matmul operand)
inline void accumulate_at_matmul(Matrix& dst, const Matrix& a, const Matrix& g) {
    const std::size_t n = a.rows(), k_max = a.cols(), m = g.cols();
    for (std::size_t i = 0; i < n; ++i) {
        const double* grow = g.data() + i * m;
        for (std::size_t k = 0; k < k_max; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            double* drow = dst.data() + k * m;
            for (std::size_t j = 0; j < m; ++j) drow[j] += aik * grow[j];
        }
    }
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

inline Matrix apply(Unary op, const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = apply_unary(op, a.data()[i]);
    return out;
}

inline double squared_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

inline double frobenius_squared(const Matrix& a) {
    return squared_norm({a.data(), a.size()});
}

}  // namespace olga
