#include "loralab/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace loralab {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const Gamma kOne = Gamma::finite(1.0);
}  // namespace

Gamma Gamma::finite(double v) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument("Gamma::finite: exponent must be a finite real");
    }
    return Gamma(v);
}

Gamma Gamma::neg_infinity() { return Gamma(kNegInf); }

bool Gamma::is_neg_infinity() const { return v_ == kNegInf; }

std::string Gamma::str() const {
    if (is_neg_infinity()) return "neg-inf";
    std::ostringstream os;
    os << v_;
    return os.str();
}

Gamma gamma_mul(Gamma x, Gamma y) {
    if (x.is_neg_infinity() || y.is_neg_infinity()) return Gamma::neg_infinity();
    return Gamma::finite(x.value() + y.value());
}

Gamma gamma_add(Gamma x, Gamma y) { return x.value() >= y.value() ? x : y; }

std::string to_string(InitCase c) {
    switch (c) {
        case InitCase::Case1: return "Case1";
        case InitCase::Case2: return "Case2";
        case InitCase::Mixed: return "Mixed";
    }
    return "?";
}

DeltaGammas delta_gammas(Gamma gamma_s, Gamma gamma_eta, Gamma gamma_atz, Gamma gamma_bt) {
    const Gamma s_eta = gamma_mul(gamma_s, gamma_eta);
    DeltaGammas d;
    d.delta1 = gamma_mul(s_eta, gamma_atz);
    d.delta2 = gamma_mul(gamma_mul(s_eta, gamma_bt), kOne);
    d.delta3 = gamma_mul(gamma_mul(s_eta, gamma_eta), kOne);
    return d;
}

std::pair<Gamma, Gamma> induction_step(Gamma gamma_prev_atz, Gamma gamma_prev_bt,
                                       Gamma gamma_eta) {
    return {gamma_add(gamma_prev_atz, gamma_mul(gamma_eta, kOne)),
            gamma_add(gamma_prev_bt, gamma_eta)};
}

InitCase classify_init(const ScalingSpec& spec) {
    const Gamma eta_plus_one = gamma_mul(spec.gamma_eta, kOne);
    const bool a_low = spec.gamma_a0z <= eta_plus_one;
    const bool b_low = spec.gamma_b0 <= spec.gamma_eta;
    if (a_low && b_low) return InitCase::Case1;
    if (!a_low && !b_low) return InitCase::Case2;
    return InitCase::Mixed;
}

TheoremVerdict theorem_check(const ScalingSpec& spec) {
    const Gamma residual = gamma_mul(gamma_mul(spec.gamma_s, spec.gamma_eta),
                                     gamma_mul(spec.gamma_eta, kOne));
    const InitCase init_case = classify_init(spec);
    const bool stable = residual == Gamma::finite(0.0) && init_case == InitCase::Case1;
    return {stable, residual, init_case};
}

GammaTrajectory gamma_trajectory(const ScalingSpec& spec, std::size_t steps) {
    if (steps < 1) {
        throw std::invalid_argument("gamma_trajectory: steps must be >= 1");
    }
    GammaTrajectory traj;
    Gamma atz = spec.gamma_a0z;
    Gamma bt = spec.gamma_b0;
    for (std::size_t t = 0; t < steps; ++t) {
        std::tie(atz, bt) = induction_step(atz, bt, spec.gamma_eta);
        const DeltaGammas d = delta_gammas(spec.gamma_s, spec.gamma_eta, atz, bt);
        traj.gamma_atz.push_back(atz);
        traj.gamma_bt.push_back(bt);
        traj.gamma_delta1.push_back(d.delta1);
        traj.gamma_delta2.push_back(d.delta2);
        traj.gamma_delta3.push_back(d.delta3);
        traj.gamma_delta_y.push_back(gamma_add(gamma_add(d.delta1, d.delta2), d.delta3));
    }
    return traj;
}

Gamma shrink_gamma_bound(std::size_t n_steps, Gamma gamma_shrink, Gamma gamma_a0z,
                         Gamma gamma_eta) {
    if (!gamma_shrink.is_neg_infinity() && gamma_shrink.value() > 0.0) {
        throw std::invalid_argument("shrink_gamma_bound: shrink exponent must be <= 0");
    }
    Gamma shrunk_init = gamma_a0z;
    if (n_steps >= 1) {
        const Gamma total = gamma_shrink.is_neg_infinity()
                                ? Gamma::neg_infinity()
                                : Gamma::finite(static_cast<double>(n_steps) *
                                                gamma_shrink.value());
        shrunk_init = gamma_mul(total, gamma_a0z);
    }
    return gamma_add(shrunk_init, gamma_mul(gamma_eta, kOne));
}

std::optional<Gamma> parse_gamma(const std::string& text) {
    if (text == "neg-inf" || text == "-inf") return Gamma::neg_infinity();
    try {
        std::size_t consumed = 0;
        const double v = std::stod(text, &consumed);
        if (consumed != text.size() || !std::isfinite(v)) return std::nullopt;
        return Gamma::finite(v);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace loralab
