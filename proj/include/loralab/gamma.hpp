#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace loralab {

/// Width-scaling exponent: a quantity v with exponent g behaves as Theta(n^g).
/// NegInfinity is the exponent of an exactly-zero quantity; it is absorbing
/// under gamma_mul and the identity of gamma_add. Exponents are compared
/// exactly, so callers should stick to dyadic / quarter-grid values.
class Gamma {
public:
    Gamma() = default;
    static Gamma finite(double v);
    static Gamma neg_infinity();

    bool is_neg_infinity() const;
    /// Finite exponent value; -inf when NegInfinity.
    double value() const { return v_; }

    bool operator==(const Gamma& o) const { return v_ == o.v_; }
    bool operator<(const Gamma& o) const { return v_ < o.v_; }
    bool operator<=(const Gamma& o) const { return v_ <= o.v_; }
    bool operator>(const Gamma& o) const { return v_ > o.v_; }
    bool operator>=(const Gamma& o) const { return v_ >= o.v_; }

    std::string str() const;

private:
    explicit Gamma(double v) : v_(v) {}
    double v_ = 0.0;
};

/// Exponents of products add; NegInfinity absorbs (zero times anything is zero).
Gamma gamma_mul(Gamma x, Gamma y);

/// Exponents of sums take the max; NegInfinity is the identity.
Gamma gamma_add(Gamma x, Gamma y);

/// The four exponents that determine a setup's scaling behavior.
struct ScalingSpec {
    Gamma gamma_s;
    Gamma gamma_eta;
    Gamma gamma_a0z;  // exponent of A0 * Z
    Gamma gamma_b0;
};

/// Which side dominates: gradient updates (Case1), the initialization (Case2),
/// or the forbidden one-sided situation (Mixed).
enum class InitCase { Case1, Case2, Mixed };

std::string to_string(InitCase c);

struct DeltaGammas {
    Gamma delta1;
    Gamma delta2;
    Gamma delta3;
};

/// Component exponents under unit-exponent optimized gradients:
///   delta1 = s + eta + atz,  delta2 = s + eta + bt + 1,  delta3 = s + 2*eta + 1.
DeltaGammas delta_gammas(Gamma gamma_s, Gamma gamma_eta, Gamma gamma_atz, Gamma gamma_bt);

/// One step of the max-recurrences:
///   atz' = max(atz, eta + 1),  bt' = max(bt, eta).
std::pair<Gamma, Gamma> induction_step(Gamma gamma_prev_atz, Gamma gamma_prev_bt, Gamma gamma_eta);

/// Case1 iff a0z <= eta+1 and b0 <= eta; Case2 iff both strictly reversed;
/// Mixed otherwise. NegInfinity compares below every finite value.
InitCase classify_init(const ScalingSpec& spec);

struct TheoremVerdict {
    bool stable;
    Gamma residual;  // gamma_s + 2*gamma_eta + 1
    InitCase init_case;
};

/// Stable iff the residual is exactly 0 and the initialization is Case1.
TheoremVerdict theorem_check(const ScalingSpec& spec);

struct GammaTrajectory {
    std::vector<Gamma> gamma_atz;
    std::vector<Gamma> gamma_bt;
    std::vector<Gamma> gamma_delta1;
    std::vector<Gamma> gamma_delta2;
    std::vector<Gamma> gamma_delta3;
    std::vector<Gamma> gamma_delta_y;  // max of the three components
};

/// Iterates the induction from (a0z, b0) and records the component exponents
/// after each of `steps` >= 1 updates.
GammaTrajectory gamma_trajectory(const ScalingSpec& spec, std::size_t steps);

/// Exponent bound after n_steps of shrinking:
///   max(n_steps * gamma_shrink + gamma_a0z, gamma_eta + 1)
/// gamma_shrink must be <= 0; n_steps == 0 leaves the init exponent untouched.
Gamma shrink_gamma_bound(std::size_t n_steps, Gamma gamma_shrink, Gamma gamma_a0z,
                         Gamma gamma_eta);

/// Parses a decimal exponent or the literal "neg-inf" / "-inf".
std::optional<Gamma> parse_gamma(const std::string& text);

}  // namespace loralab
