#include "loralab/lora.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace loralab {

namespace {

void sample_factors(LoraLinear& layer, const InitScheme& scheme, SeededRng& rng) {
    const std::size_t m = layer.m, n = layer.n, r = layer.r;
    switch (scheme.variant) {
        case InitVariant::ZeroBoth:
            layer.a = Matrix(r, n);
            layer.b = Matrix(m, r);
            break;
        case InitVariant::KaimingUniformA_ZeroB:
            layer.a = sample_uniform(rng, r, n, 1.0 / static_cast<double>(n));
            layer.b = Matrix(m, r);
            break;
        case InitVariant::GaussianWidthA_ZeroB:
            layer.a = sample_gaussian(rng, r, n, 1.0 / static_cast<double>(n));
            layer.b = Matrix(m, r);
            break;
        case InitVariant::GaussianBoth: {
            const double width_var = 1.0 / static_cast<double>(n);
            layer.a = sample_gaussian(rng, r, n, scheme.var_a.value_or(width_var));
            layer.b = sample_gaussian(rng, m, r, scheme.var_b.value_or(width_var));
            break;
        }
    }
}

}  // namespace

LoraLinear init(std::size_t m, std::size_t n, std::size_t r, double s, const InitScheme& scheme,
                SeededRng& rng) {
    Matrix w0 = sample_gaussian(rng, m, n, 1.0 / static_cast<double>(n));
    return init_with_w0(std::move(w0), r, s, scheme, rng);
}

LoraLinear init_with_w0(Matrix w0, std::size_t r, double s, const InitScheme& scheme,
                        SeededRng& rng) {
    const std::size_t m = w0.rows(), n = w0.cols();
    if (r > std::min(m, n)) {
        throw std::invalid_argument("init: rank " + std::to_string(r) + " exceeds min(" +
                                    std::to_string(m) + ", " + std::to_string(n) + ")");
    }
    if (!(s > 0.0)) {
        throw std::invalid_argument("init: scale s must be > 0, got " + std::to_string(s));
    }
    LoraLinear layer;
    layer.w0 = std::move(w0);
    layer.s = s;
    layer.m = m;
    layer.n = n;
    layer.r = r;
    sample_factors(layer, scheme, rng);
    return layer;
}

ForwardCache forward(const LoraLinear& layer, const Matrix& z) {
    if (z.rows() != layer.n) {
        throw ShapeError("forward: input " + z.shape_str() + " does not match layer in-dim " +
                         std::to_string(layer.n));
    }
    ForwardCache cache;
    cache.z = z;
    cache.az = matmul(layer.a, z);
    cache.y = matmul(layer.w0, z);
    axpy(cache.y, layer.s, matmul(layer.b, cache.az));
    return cache;
}

std::pair<GradientBundle, BackSignal> backward(const LoraLinear& layer, const ForwardCache& cache,
                                               const Matrix& d_y) {
    if (!d_y.same_shape(cache.y)) {
        throw ShapeError("backward: d_y " + d_y.shape_str() + " does not match output " +
                         cache.y.shape_str());
    }
    BackSignal signal{layer.s * matmul(transpose(layer.b), d_y)};
    GradientBundle grads;
    grads.raw_grad_b = layer.s * matmul(d_y, transpose(cache.az));
    grads.raw_grad_a = matmul(signal.sig, transpose(cache.z));
    grads.d_y = d_y;
    return {std::move(grads), std::move(signal)};
}

DeltaDecomposition delta_decompose(const Matrix& a_t, const Matrix& b_t, const Matrix& g_a,
                                   const Matrix& g_b, double s, double eta_a, double eta_b,
                                   const Matrix& z) {
    DeltaDecomposition d;
    d.delta1 = (-s * eta_b) * matmul(g_b, matmul(a_t, z));
    d.delta2 = (-s * eta_a) * matmul(b_t, matmul(g_a, z));
    d.delta3 = (s * eta_a * eta_b) * matmul(g_b, matmul(g_a, z));
    return d;
}

DeltaDecomposition delta_decompose(const Matrix& a_t, const Matrix& b_t, const Matrix& g_a,
                                   const Matrix& g_b, double s, double eta, const Matrix& z) {
    return delta_decompose(a_t, b_t, g_a, g_b, s, eta, eta, z);
}

std::pair<double, Matrix> loss_and_grad(const ForwardCache& cache, const Matrix& y_star) {
    if (!y_star.same_shape(cache.y)) {
        throw ShapeError("loss_and_grad: target " + y_star.shape_str() +
                         " does not match output " + cache.y.shape_str());
    }
    const double batch = static_cast<double>(cache.z.cols());
    Matrix resid = cache.y - y_star;
    const double fn = frobenius_norm(resid);
    const double loss = fn * fn / (2.0 * batch);
    resid *= 1.0 / batch;
    return {loss, std::move(resid)};
}

}  // namespace loralab
