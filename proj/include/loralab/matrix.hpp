#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace loralab {

/// Thrown when operand shapes are not conformable. The message names both shapes.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles. The only numeric container in the project:
/// weights, activations and gradients are all Matrix values.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_) {
            throw std::invalid_argument("entry count " + std::to_string(data_.size()) +
                                        " does not match " + std::to_string(rows_) + "x" +
                                        std::to_string(cols_));
        }
    }

    static Matrix filled(std::size_t rows, std::size_t cols, double value) {
        Matrix m(rows, cols);
        for (auto& x : m.data_) x = value;
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double c);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double c, const Matrix& a);

/// Standard matrix product. Dispatches to the OpenMP kernel for large work sizes;
/// serial and parallel kernels produce bit-identical results.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Square root of the sum of squared entries.
double frobenius_norm(const Matrix& a);

/// frobenius_norm(a) / sqrt(rows*cols); per-entry magnitude, comparable across widths.
double rms(const Matrix& a);

/// Entrywise strict sign: -1, 0 or +1. sign(0) = 0.
Matrix elementwise_sign(const Matrix& a);

/// y += alpha * x
void axpy(Matrix& y, double alpha, const Matrix& x);

bool all_finite(const Matrix& a);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace loralab
