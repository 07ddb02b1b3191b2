#include "loralab/kernels.hpp"

#include <cstdint>

namespace loralab::kernels {

void matmul_serial(const Matrix& a, const Matrix& b, Matrix& out) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) {
                acc += pa[i * k + l] * pb[l * n + j];
            }
            po[i * n + j] = acc;
        }
    }
}

void matmul_parallel(const Matrix& a, const Matrix& b, Matrix& out) {
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
    const std::size_t k = a.cols(), n = b.cols();
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        double* row = po + static_cast<std::size_t>(i) * n;
        for (std::size_t j = 0; j < n; ++j) row[j] = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            const double aik = pa[static_cast<std::size_t>(i) * k + l];
            const double* brow = pb + l * n;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] += aik * brow[j];
            }
        }
    }
}

namespace {
double row_sum_squares(const double* row, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * row[j];
    return acc;
}
}  // namespace

double sum_squares_serial(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        total += row_sum_squares(a.data() + i * n, n);
    }
    return total;
}

double sum_squares_parallel(const Matrix& a) {
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
    const std::size_t n = a.cols();
    std::vector<double> partial(static_cast<std::size_t>(m), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        partial[static_cast<std::size_t>(i)] =
            row_sum_squares(a.data() + static_cast<std::size_t>(i) * n, n);
    }
    double total = 0.0;
    for (std::int64_t i = 0; i < m; ++i) total += partial[static_cast<std::size_t>(i)];
    return total;
}

void decayed_update_serial(Matrix& param, const Matrix& grad, double eta, double decay) {
    double* p = param.data();
    const double* g = grad.data();
    const std::size_t n = param.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double prev = p[i];
        p[i] = prev - eta * g[i] - eta * decay * prev;
    }
}

void decayed_update_parallel(Matrix& param, const Matrix& grad, double eta, double decay) {
    double* p = param.data();
    const double* g = grad.data();
    const std::int64_t n = static_cast<std::int64_t>(param.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double prev = p[i];
        p[i] = prev - eta * g[i] - eta * decay * prev;
    }
}

}  // namespace loralab::kernels
