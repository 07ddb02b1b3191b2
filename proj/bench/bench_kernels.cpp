// Throughput comparison of the serial reference kernels against the OpenMP
// ones. Results must match bitwise; this target only reports speed.
//
//   ./bench_kernels [--sizes 256,512,1024] [--reps 3]

#include "loralab/kernels.hpp"
#include "loralab/matrix.hpp"
#include "loralab/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

using namespace loralab;

namespace {

double seconds_of(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(stop - start).count());
    }
    return best;
}

std::vector<std::size_t> parse_sizes(const char* text) {
    std::vector<std::size_t> sizes;
    std::string token;
    for (const char* p = text;; ++p) {
        if (*p == ',' || *p == '\0') {
            if (!token.empty()) sizes.push_back(std::stoull(token));
            token.clear();
            if (*p == '\0') break;
        } else {
            token += *p;
        }
    }
    return sizes;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> sizes{128, 256, 512, 1024};
    int reps = 3;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--sizes") == 0 && i + 1 < argc) {
            sizes = parse_sizes(argv[++i]);
        } else if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc) {
            reps = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--sizes a,b,c] [--reps n]\n", argv[0]);
            return 1;
        }
    }

    std::printf("%-22s %10s %12s %12s %8s\n", "kernel", "n", "serial", "parallel", "speedup");
    SeededRng rng(1);
    for (const std::size_t n : sizes) {
        const Matrix a = sample_gaussian(rng, n, n, 1.0);
        const Matrix b = sample_gaussian(rng, n, 16, 1.0);
        Matrix out_s(n, 16), out_p(n, 16);

        const double ts = seconds_of([&] { kernels::matmul_serial(a, b, out_s); }, reps);
        const double tp = seconds_of([&] { kernels::matmul_parallel(a, b, out_p); }, reps);
        if (!(out_s == out_p)) {
            std::fprintf(stderr, "matmul kernels disagree at n=%zu\n", n);
            return 1;
        }
        const double flops = 2.0 * static_cast<double>(n) * n * 16;
        std::printf("%-22s %10zu %9.2f ms %9.2f ms %7.2fx  (%.2f / %.2f GFLOP/s)\n",
                    "matmul (n x n x 16)", n, ts * 1e3, tp * 1e3, ts / tp, flops / ts * 1e-9,
                    flops / tp * 1e-9);
    }

    for (const std::size_t n : sizes) {
        const Matrix a = sample_gaussian(rng, n, n, 1.0);
        const double ts = seconds_of([&] { (void)kernels::sum_squares_serial(a); }, reps);
        const double tp = seconds_of([&] { (void)kernels::sum_squares_parallel(a); }, reps);
        if (kernels::sum_squares_serial(a) != kernels::sum_squares_parallel(a)) {
            std::fprintf(stderr, "sum_squares kernels disagree at n=%zu\n", n);
            return 1;
        }
        std::printf("%-22s %10zu %9.2f ms %9.2f ms %7.2fx\n", "sum_squares (n x n)", n, ts * 1e3,
                    tp * 1e3, ts / tp);
    }

    for (const std::size_t n : sizes) {
        Matrix p1 = sample_gaussian(rng, n, n, 1.0);
        Matrix p2 = p1;
        const Matrix g = sample_gaussian(rng, n, n, 1.0);
        const double ts =
            seconds_of([&] { kernels::decayed_update_serial(p1, g, 1e-4, 0.01); }, reps);
        const double tp =
            seconds_of([&] { kernels::decayed_update_parallel(p2, g, 1e-4, 0.01); }, reps);
        std::printf("%-22s %10zu %9.2f ms %9.2f ms %7.2fx\n", "decayed_update (n x n)", n,
                    ts * 1e3, tp * 1e3, ts / tp);
    }
    return 0;
}
