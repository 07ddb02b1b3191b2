#pragma once

#include "loralab/matrix.hpp"
#include "loralab/rng.hpp"

#include <cstddef>
#include <optional>

namespace loralab {

/// How the adapter factors start out. The width-aware variants derive their
/// scale from the in-dimension n: KaimingUniformA uses half-width 1/n and
/// GaussianWidthA uses variance 1/n. GaussianBoth takes explicit variances;
/// when omitted they default to 1/n as well.
enum class InitVariant {
    ZeroBoth,
    KaimingUniformA_ZeroB,
    GaussianWidthA_ZeroB,
    GaussianBoth,
};

struct InitScheme {
    InitVariant variant = InitVariant::KaimingUniformA_ZeroB;
    std::optional<double> var_a;  // GaussianBoth only; default 1/n
    std::optional<double> var_b;  // GaussianBoth only; default 1/n
};

/// A linear layer with a frozen base weight and a trainable low-rank correction:
/// the effective weight is w0 + s * b * a. Training never touches w0.
struct LoraLinear {
    Matrix w0;  // m x n, frozen
    Matrix a;   // r x n, trainable
    Matrix b;   // m x r, trainable
    double s = 1.0;
    std::size_t m = 0, n = 0, r = 0;
};

struct ForwardCache {
    Matrix z;   // n x batch input
    Matrix az;  // r x batch
    Matrix y;   // m x batch output
};

struct GradientBundle {
    Matrix raw_grad_a;  // r x n
    Matrix raw_grad_b;  // m x r
    Matrix d_y;         // m x batch, loss gradient at the output
};

/// sig = s * b^T * d_y, the signal entering the A-gradient.
struct BackSignal {
    Matrix sig;  // r x batch
};

/// The three components of the output change caused by one gradient update:
/// delta1 from the B step, delta2 from the A step, delta3 the second-order
/// cross term. Their sum equals the update-induced output change exactly.
struct DeltaDecomposition {
    Matrix delta1;
    Matrix delta2;
    Matrix delta3;
};

/// Builds a layer with Gaussian variance-1/n base weight and scheme-chosen a, b.
/// Draw order: w0 first, then a, then b.
LoraLinear init(std::size_t m, std::size_t n, std::size_t r, double s, const InitScheme& scheme,
                SeededRng& rng);

/// Same, but adopts an existing base weight (teacher-student setups share w0).
LoraLinear init_with_w0(Matrix w0, std::size_t r, double s, const InitScheme& scheme,
                        SeededRng& rng);

ForwardCache forward(const LoraLinear& layer, const Matrix& z);

std::pair<GradientBundle, BackSignal> backward(const LoraLinear& layer, const ForwardCache& cache,
                                               const Matrix& d_y);

/// Per-factor learning rates: the B update uses eta_b, the A update eta_a.
/// Identity: delta1+delta2+delta3 == s*(b - eta_b*g_b)*(a - eta_a*g_a)*z - s*b*a*z.
DeltaDecomposition delta_decompose(const Matrix& a_t, const Matrix& b_t, const Matrix& g_a,
                                   const Matrix& g_b, double s, double eta_a, double eta_b,
                                   const Matrix& z);

/// Single learning rate for both factors.
DeltaDecomposition delta_decompose(const Matrix& a_t, const Matrix& b_t, const Matrix& g_a,
                                   const Matrix& g_b, double s, double eta, const Matrix& z);

/// Mean-per-sample squared error: loss = ||y - y_star||_F^2 / (2*batch),
/// d_y = (y - y_star) / batch.
std::pair<double, Matrix> loss_and_grad(const ForwardCache& cache, const Matrix& y_star);

}  // namespace loralab
