#include "paraslab/exponents.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace paraslab {

std::optional<Rational> Rational::parse(std::string_view text) {
    auto read_ll = [](std::string_view s, long long& out) {
        const char* first = s.data();
        const char* last = s.data() + s.size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        return ec == std::errc() && ptr == last;
    };
    Rational r;
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        if (!read_ll(text, r.num)) return std::nullopt;
        r.den = 1;
        return r;
    }
    if (!read_ll(text.substr(0, slash), r.num)) return std::nullopt;
    if (!read_ll(text.substr(slash + 1), r.den)) return std::nullopt;
    if (r.den == 0) return std::nullopt;
    if (r.den < 0) {
        r.num = -r.num;
        r.den = -r.den;
    }
    return r;
}

SystemParams::SystemParams(int dim, double p, double q, double d1, double d2)
    : dim_(dim), p_(p), q_(q), d1_(d1), d2_(d2), d_min_(std::fmin(d1, d2)) {
    validate();
}

SystemParams::SystemParams(int dim, Rational p, Rational q, double d1, double d2)
    : dim_(dim), p_(p.value()), q_(q.value()), d1_(d1), d2_(d2), d_min_(std::fmin(d1, d2)),
      p_rat_(p), q_rat_(q) {
    validate();
}

void SystemParams::validate() const {
    if (dim_ < 1) throw std::invalid_argument("SystemParams: N must be >= 1");
    if (!(p_ > 0.0) || !(q_ > 0.0)) throw std::invalid_argument("SystemParams: p, q must be positive");
    if (!(p_ <= q_)) throw std::invalid_argument("SystemParams: requires p <= q");
    bool pq_gt_one;
    if (p_rat_ && q_rat_) {
        const auto& a = *p_rat_;
        const auto& b = *q_rat_;
        pq_gt_one = static_cast<__int128>(a.num) * b.num > static_cast<__int128>(a.den) * b.den;
    } else {
        pq_gt_one = p_ * q_ > 1.0;
    }
    if (!pq_gt_one) throw std::invalid_argument("SystemParams: requires pq > 1");
    if (!(d1_ > 0.0) || !(d2_ > 0.0)) throw std::invalid_argument("SystemParams: D1, D2 must be positive");
}

char case_letter(Case c) {
    switch (c) {
        case Case::A: return 'A';
        case Case::B: return 'B';
        case Case::C: return 'C';
        case Case::D: return 'D';
        case Case::E: return 'E';
        case Case::F: return 'F';
    }
    return '?';
}

std::optional<Case> case_from_letter(char c) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
        case 'A': return Case::A;
        case 'B': return Case::B;
        case 'C': return Case::C;
        case 'D': return Case::D;
        case 'E': return Case::E;
        case 'F': return Case::F;
    }
    return std::nullopt;
}

namespace {

// -1, 0, +1 comparison of (q+1)/(pq-1) against N/2 and of q against
// 1 + 2/N, exact when rationals are present.
int sign3(double lhs, double rhs) {
    const double tol = kCaseEqTol * std::fmax(1.0, std::fmax(std::fabs(lhs), std::fabs(rhs)));
    if (std::fabs(lhs - rhs) <= tol) return 0;
    return lhs < rhs ? -1 : 1;
}

int sign128(__int128 v) { return v < 0 ? -1 : (v > 0 ? 1 : 0); }

int sign3_int(__int128 lhs, __int128 rhs) { return sign128(lhs - rhs); }

struct CaseSigns {
    int ratio_vs_half;   // (q+1)/(pq-1) <=> N/2
    int q_vs_fujita;     // q <=> 1 + 2/N
    int p_vs_q;          // p <=> q
};

CaseSigns case_signs(const SystemParams& params) {
    CaseSigns s{};
    if (params.p_exact() && params.q_exact()) {
        const auto& pr = *params.p_exact();
        const auto& qr = *params.q_exact();
        const __int128 a = pr.num, b = pr.den, c = qr.num, d = qr.den;
        const __int128 n = params.dim();
        // (q+1)/(pq-1) vs N/2  <=>  2 b (c+d) vs N (a c - b d), both over b d > 0
        s.ratio_vs_half = sign3_int(2 * b * (c + d), n * (a * c - b * d));
        // q vs (N+2)/N  <=>  c N vs d (N+2)
        s.q_vs_fujita = sign3_int(c * n, d * (n + 2));
        s.p_vs_q = sign3_int(a * d, c * b);
    } else {
        const double p = params.p(), q = params.q();
        const double n = params.dim();
        s.ratio_vs_half = sign3((q + 1.0) / (p * q - 1.0), 0.5 * n);
        s.q_vs_fujita = sign3(q, 1.0 + 2.0 / n);
        s.p_vs_q = sign3(p, q);
    }
    return s;
}

}  // namespace

CaseLabel classify(const SystemParams& params) {
    const auto s = case_signs(params);
    Case label;
    if (s.ratio_vs_half < 0) {
        label = Case::A;
    } else if (s.ratio_vs_half == 0) {
        label = (s.p_vs_q == 0) ? Case::C : Case::B;
    } else {
        if (s.q_vs_fujita > 0) label = Case::D;
        else if (s.q_vs_fujita == 0) label = Case::E;
        else label = Case::F;
    }
    const double n = params.dim();
    return CaseLabel{label,
                     (params.q() + 1.0) / (params.p() * params.q() - 1.0),
                     0.5 * n,
                     1.0 + 2.0 / n};
}

ExponentSet derive_exponents(const SystemParams& params) {
    const double p = params.p(), q = params.q();
    const double n = params.dim();
    const double pq1 = p * q - 1.0;
    ExponentSet e{};
    e.lambda_mu = 2.0 * (p + 1.0) / pq1;
    e.lambda_nu = 2.0 * (q + 1.0) / pq1;
    e.r1_star = 0.5 * n * pq1 / (p + 1.0);
    e.r2_star = 0.5 * n * pq1 / (q + 1.0);
    e.scal_u = (p + 1.0) / pq1;
    e.scal_v = (q + 1.0) / pq1;
    e.d_over_q = (n + 2.0) / q;
    return e;
}

LebesgueIndices lebesgue_indices(const SystemParams& params, double r1, double r2) {
    if (params.p() < 1.0)
        throw std::domain_error("lebesgue_indices: hypothesis violated, statement requires p >= 1");
    if (!(r1 > 1.0) || !(r2 > 1.0))
        throw std::domain_error("lebesgue_indices: r1, r2 must lie in (1, inf)");
    const double n = params.dim();
    LebesgueIndices out{};
    out.P = n * (params.p() / r2 - 1.0 / r1);
    out.Q = n * (params.q() / r1 - 1.0 / r2);
    out.within_criterion = std::fmax(out.P, out.Q) <= 2.0;
    return out;
}

}  // namespace paraslab
