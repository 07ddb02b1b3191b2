#include "loralab/matrix.hpp"

#include "loralab/kernels.hpp"

#include <cmath>

namespace loralab {

namespace {
void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shapes " + a.shape_str() + " and " +
                         b.shape_str() + " do not match");
    }
}
}  // namespace

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "add");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "sub");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double c) {
    for (auto& x : data_) x *= c;
    return *this;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    out += b;
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    out -= b;
    return out;
}

Matrix operator*(double c, const Matrix& a) {
    Matrix out = a;
    out *= c;
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: shapes " + a.shape_str() + " and " + b.shape_str() +
                         " are not conformable");
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t work = a.rows() * a.cols() * b.cols();
    if (work >= kernels::kParallelWorkThreshold) {
        kernels::matmul_parallel(a, b, out);
    } else {
        kernels::matmul_serial(a, b, out);
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

double frobenius_norm(const Matrix& a) {
    const std::size_t work = a.size();
    const double ss = work >= kernels::kParallelWorkThreshold ? kernels::sum_squares_parallel(a)
                                                              : kernels::sum_squares_serial(a);
    return std::sqrt(ss);
}

double rms(const Matrix& a) {
    if (a.empty()) return 0.0;
    return frobenius_norm(a) / std::sqrt(static_cast<double>(a.size()));
}

Matrix elementwise_sign(const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    const double* in = a.data();
    double* o = out.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        o[i] = in[i] > 0.0 ? 1.0 : (in[i] < 0.0 ? -1.0 : 0.0);
    }
    return out;
}

void axpy(Matrix& y, double alpha, const Matrix& x) {
    require_same_shape(y, x, "axpy");
    double* py = y.data();
    const double* px = x.data();
    for (std::size_t i = 0; i < y.size(); ++i) py[i] += alpha * px[i];
}

bool all_finite(const Matrix& a) {
    const double* p = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(p[i])) return false;
    }
    return true;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::fabs(a.data()[i] - b.data()[i]);
        if (d > worst) worst = d;
    }
    return worst;
}

}  // namespace loralab
