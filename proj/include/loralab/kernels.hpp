#pragma once

#include "loralab/matrix.hpp"

namespace loralab::kernels {

// Serial reference kernels and their OpenMP counterparts. Each pair is
// bit-identical by construction: parallelism is only over output rows and the
// per-element accumulation order is the same in both, so results do not depend
// on the thread count. Tests assert exact equality; the bench target compares
// throughput.

/// out = a * b, plain i-j-k triple loop.
void matmul_serial(const Matrix& a, const Matrix& b, Matrix& out);

/// out = a * b, i-k-j loop order, rows of `a` distributed across threads.
void matmul_parallel(const Matrix& a, const Matrix& b, Matrix& out);

/// Sum of squared entries, accumulated per row and then combined in row order.
double sum_squares_serial(const Matrix& a);

/// Same association as the serial version; row partials computed in parallel.
double sum_squares_parallel(const Matrix& a);

/// param[i] -= eta * (grad[i] + decay * param[i])  (decoupled weight decay)
void decayed_update_serial(Matrix& param, const Matrix& grad, double eta, double decay);
void decayed_update_parallel(Matrix& param, const Matrix& grad, double eta, double decay);

/// Work threshold (multiply-adds) above which the parallel kernels are used.
inline constexpr std::size_t kParallelWorkThreshold = 1u << 16;

}  // namespace loralab::kernels
