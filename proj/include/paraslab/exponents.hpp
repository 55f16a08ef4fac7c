#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace paraslab {

// Exact rational, used so boundary parameter sets like p = 5/3 classify
// without floating-point slop.
struct Rational {
    long long num = 0;
    long long den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    // Accepts "5/3", "2", "-7/4". Returns nullopt on malformed input.
    static std::optional<Rational> parse(std::string_view text);
};

// The tuple (N, p, q, D1, D2) governing problem (P); D = min(D1, D2).
// Construction enforces 0 < p <= q, pq > 1, N >= 1, D1 > 0, D2 > 0 and
// throws std::invalid_argument otherwise.
class SystemParams {
public:
    SystemParams(int dim, double p, double q, double d1 = 1.0, double d2 = 1.0);
    SystemParams(int dim, Rational p, Rational q, double d1 = 1.0, double d2 = 1.0);

    int dim() const { return dim_; }
    double p() const { return p_; }
    double q() const { return q_; }
    double d1() const { return d1_; }
    double d2() const { return d2_; }
    double d_min() const { return d_min_; }
    double d_max() const { return d1_ > d2_ ? d1_ : d2_; }

    const std::optional<Rational>& p_exact() const { return p_rat_; }
    const std::optional<Rational>& q_exact() const { return q_rat_; }

private:
    void validate() const;

    int dim_;
    double p_, q_, d1_, d2_, d_min_;
    std::optional<Rational> p_rat_, q_rat_;
};

enum class Case { A, B, C, D, E, F };

char case_letter(Case c);
std::optional<Case> case_from_letter(char c);

// Outcome of the six-way regime classification.
struct CaseLabel {
    Case label;
    double ratio;     // (q+1)/(pq-1)
    double half_dim;  // N/2
    double q_fujita;  // 1 + 2/N
};

// Derived exponents consumed throughout the artifact.
struct ExponentSet {
    double lambda_mu;  // 2(p+1)/(pq-1), singularity power of the u-side datum
    double lambda_nu;  // 2(q+1)/(pq-1)
    double r1_star;    // (N/2)(pq-1)/(p+1)
    double r2_star;    // (N/2)(pq-1)/(q+1)
    double scal_u;     // (p+1)/(pq-1)
    double scal_v;     // (q+1)/(pq-1)
    double d_over_q;   // (N+2)/q, d = N+2 the parabolic dimension
};

struct LebesgueIndices {
    double P;  // N(p/r2 - 1/r1)
    double Q;  // N(q/r1 - 1/r2)
    bool within_criterion;  // max{P,Q} <= 2
};

// Relative-equality tolerance used for boundary cases when exact
// rationals are not supplied.
inline constexpr double kCaseEqTol = 1e-12;

CaseLabel classify(const SystemParams& params);
ExponentSet derive_exponents(const SystemParams& params);

// Throws std::domain_error when p < 1 (the statement assumes p >= 1) or
// r1, r2 are not in (1, inf).
LebesgueIndices lebesgue_indices(const SystemParams& params, double r1, double r2);

}  // namespace paraslab
