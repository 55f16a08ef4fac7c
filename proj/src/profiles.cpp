#include "paraslab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "paraslab/quadrature.hpp"

namespace paraslab {

double sphere_area(int dim) {
    return 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim);
}

// ---------------------------------------------------------------------------
// Modulator

Modulator::Modulator() = default;

Modulator Modulator::table(std::vector<double> radii, std::vector<double> values) {
    if (radii.size() != values.size() || radii.size() < 2)
        throw std::invalid_argument("Modulator::table: need >= 2 matching (radius, value) rows");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || radii[i] > 1.0)
            throw std::invalid_argument("Modulator::table: radii must lie in (0, 1]");
        if (!(values[i] > 0.0))
            throw std::invalid_argument("Modulator::table: values must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw std::invalid_argument("Modulator::table: radii must be strictly increasing");
    }
    auto rows = std::make_shared<std::vector<std::pair<double, double>>>();
    rows->reserve(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) rows->emplace_back(radii[i], values[i]);

    // Piecewise power-law: linear interpolation in (log r, log v); the first
    // segment's slope continues below the table, the last value holds above.
    auto fn = [rows](double r) -> double {
        const auto& t = *rows;
        if (r >= t.back().first) return t.back().second;
        std::size_t hi = 1;
        if (r > t.front().first) {
            while (hi + 1 < t.size() && t[hi].first < r) ++hi;
        }
        const double lr0 = std::log(t[hi - 1].first), lr1 = std::log(t[hi].first);
        const double lv0 = std::log(t[hi - 1].second), lv1 = std::log(t[hi].second);
        const double w = (std::log(r) - lr0) / (lr1 - lr0);
        return std::exp(lv0 + w * (lv1 - lv0));
    };
    Modulator m;
    m.fn_ = std::move(fn);
    m.name_ = "table";
    m.table_ = std::move(rows);
    return m;
}

Modulator Modulator::from_function(std::function<double(double)> fn, std::string name) {
    Modulator m;
    m.fn_ = std::move(fn);
    m.name_ = std::move(name);
    return m;
}

double Modulator::operator()(double r) const { return fn_ ? fn_(r) : 1.0; }

bool Modulator::is_nondecreasing_table() const {
    if (!table_) return false;
    for (std::size_t i = 1; i < table_->size(); ++i)
        if ((*table_)[i].second < (*table_)[i - 1].second) return false;
    return true;
}

Modulator Modulator::powered(double m) const {
    if (is_identity()) return Modulator();
    auto inner = fn_;
    return from_function([inner, m](double r) { return std::pow(inner(r), m); },
                         name_ + "^pow");
}

Modulator Modulator::rescaled_log(double sqrt_t, double kappa) const {
    auto inner = fn_;  // empty == identity
    if (kappa == 0.0 && !inner && sqrt_t == 1.0) return Modulator();
    auto fn = [inner, sqrt_t, kappa](double r) -> double {
        const double y = sqrt_t * r;
        double v = inner ? inner(y) : 1.0;
        if (kappa != 0.0) v *= std::pow(std::fabs(std::log(0.5 * y)), kappa);
        return v;
    };
    return from_function(std::move(fn), name_ + "@scaled");
}

// ---------------------------------------------------------------------------
// RadialProfile

double RadialProfile::density(double r) const {
    if (amplitude == 0.0) return 0.0;
    if (!(r > 0.0) || r >= cutoff) return 0.0;
    double v = amplitude;
    if (lambda != 0.0) v *= std::pow(r, -lambda);
    if (kappa != 0.0) v *= std::pow(std::fabs(std::log(0.5 * r)), kappa);
    if (!modulator.is_identity()) v *= modulator(r);
    return v;
}

RadialDensity RadialProfile::as_density() const {
    RadialDensity d;
    d.value = [p = *this](double r) { return p.density(r); };
    d.power_hint = amplitude > 0.0 ? lambda : 0.0;
    d.support = amplitude > 0.0 ? cutoff : 0.0;
    d.atom = atom;
    return d;
}

RadialProfile RadialProfile::powered(double m) const {
    if (atom > 0.0 && m != 1.0)
        throw std::domain_error("RadialProfile::powered: point mass has no pointwise power");
    RadialProfile out = *this;
    out.amplitude = std::pow(amplitude, m);
    out.lambda = lambda * m;
    out.kappa = kappa * m;
    out.modulator = modulator.is_identity() ? Modulator() : modulator.powered(m);
    return out;
}

// ---------------------------------------------------------------------------
// Radial mass integrals with singular endpoint handling

namespace {

constexpr double kPowerEqTol = 1e-9;

struct TailIntegral {
    double value = 0.0;
    bool finite = true;
    double rate = 0.0;  // d log(partial integral) / d log(1/tau) when divergent
};

// Integrates g over [ell_lo, infinity) in the variable ell = log(2/r),
// where g decays no faster than a power of ell (log-weighted radial
// integrands). Numeric window up to ell_max, then fitted power-law tail;
// growing integrands are flagged divergent with their measured rate.
TailIntegral log_tail_integral(const std::function<double(double)>& g, double ell_lo,
                               double ell_max = 200.0) {
    TailIntegral out;
    const double l1 = std::max(2.0 * ell_lo, ell_lo + 5.0);
    // Exponential-in-ell growth means a tau-power divergence.
    const double gm = g(ell_max), gw = g(ell_max / 1.3);
    if (gm > 0.0 && gw > 0.0) {
        const double c = std::log(gm / gw) / (ell_max - ell_max / 1.3);
        if (c > 1e-6) {
            out.finite = false;
            out.rate = c;
            QuadResult head = integrate(g, ell_lo, l1, 1e-9);
            out.value = head.value;
            return out;
        }
    }
    QuadResult head = integrate(g, ell_lo, std::min(l1, ell_max), 1e-10);
    out.value = head.value;
    if (l1 >= ell_max) return out;
    // Geometric panels out to ell_max.
    double lo = l1;
    while (lo < ell_max) {
        const double hi = std::min(1.6 * lo, ell_max);
        QuadResult p = integrate(g, lo, hi, 1e-10);
        out.value += p.value;
        lo = hi;
    }
    // Power tail g ~ A ell^{-s} beyond ell_max.
    const double ga = g(ell_max / 1.6), gb = g(ell_max);
    if (!(gb > 0.0)) return out;  // integrand died; nothing left
    if (!(ga > 0.0)) return out;
    const double s = -std::log(gb / ga) / std::log(1.6);
    if (s > 1.05) {
        out.value += gb * ell_max / (s - 1.0);
        return out;
    }
    out.finite = false;
    out.rate = 0.0;  // at most logarithmic divergence in tau
    return out;
}

// integral of f(r) w(r) r^{N-1} dr over [0, hi] where f ~ r^{-power} at 0
// and w is a bounded weight (cap-area fraction etc., w == 1 by default).
TailIntegral singular_radial_integral(const RadialDensity& density, int dim, double hi,
                                      const std::function<double(double)>& weight = nullptr) {
    TailIntegral out;
    if (!(hi > 0.0)) return out;
    const double lam = density.power_hint;
    auto f = [&](double r) {
        double v = density.value(r);
        if (weight) v *= weight(r);
        return v;
    };
    // Zero (or vanishing-near-zero) densities need no special casing.
    bool vanishes = true;
    for (double rt : {hi * 1e-3, hi * 1e-6, hi * 1e-9})
        if (f(rt) != 0.0) { vanishes = false; break; }
    if (vanishes) {
        QuadResult plain = integrate([&](double r) { return f(r) * std::pow(r, dim - 1); },
                                     0.0, hi, 1e-10);
        out.value = plain.value;
        return out;
    }
    if (lam < dim - kPowerEqTol) {
        // u = r^{N - lam} absorbs the power singularity exactly.
        const double e = dim - lam;
        auto g = [&](double u) {
            const double r = std::pow(u, 1.0 / e);
            return f(r) * std::pow(r, lam);
        };
        QuadResult q = integrate(g, 0.0, std::pow(hi, e), 1e-10);
        out.value = q.value / e;
        return out;
    }
    if (lam <= dim + kPowerEqTol) {
        // lam == N: ell = log(2/r), r^{N-1} dr = -r^N dell.
        auto g = [&](double ell) {
            const double r = 2.0 * std::exp(-ell);
            return f(r) * std::pow(r, dim);
        };
        return log_tail_integral(g, std::log(2.0 / hi));
    }
    // lam > N: genuinely non-integrable.
    out.finite = false;
    out.rate = lam - dim;
    // Partial mass down to a fixed cutoff, for rate reporting.
    QuadResult part = integrate([&](double r) { return f(r) * std::pow(r, dim - 1); },
                                hi * 1e-6, hi, 1e-8);
    out.value = part.value;
    return out;
}

// Fraction of the sphere of radius r (center origin) lying inside
// B(x, sigma) with |x| = d, times the full sphere area r^{N-1} omega.
// Exact for N = 1, 2, 3; numeric polar-cap integral otherwise.
double sphere_in_ball_area(int dim, double r, double d, double sigma) {
    if (r <= 0.0) return 0.0;
    if (d + r <= sigma) return sphere_area(dim) * std::pow(r, dim - 1);  // whole sphere inside
    if (std::fabs(d - r) >= sigma) return 0.0;                          // disjoint
    if (dim == 1) {
        double a = (std::fabs(r - d) <= sigma) ? 1.0 : 0.0;
        double b = (r + d <= sigma) ? 1.0 : 0.0;
        return a + b;
    }
    double cth = (r * r + d * d - sigma * sigma) / (2.0 * r * d);
    cth = std::clamp(cth, -1.0, 1.0);
    const double theta = std::acos(cth);
    if (dim == 2) return 2.0 * r * theta;
    if (dim == 3) return 2.0 * M_PI * r * r * (1.0 - cth);
    const double band = 2.0 * std::pow(M_PI, 0.5 * (dim - 1)) / std::tgamma(0.5 * (dim - 1));
    QuadResult cap = integrate([dim](double phi) { return std::pow(std::sin(phi), dim - 2); },
                               0.0, theta, 1e-12);
    return band * std::pow(r, dim - 1) * cap.value;
}

MassFlag ball_measure_impl(const RadialDensity& density, int dim, double d, double sigma) {
    MassFlag out;
    if (!(sigma > 0.0)) throw std::invalid_argument("ball_measure: sigma must be positive");
    if (d < 0.0) throw std::invalid_argument("ball_measure: center_radius must be >= 0");
    double mass = 0.0;
    if (density.atom > 0.0 && d <= sigma) mass += density.atom;

    const double support = density.support;
    const double omega = sphere_area(dim);
    if (support > 0.0) {
        if (d == 0.0 || d <= 1e-300) {
            TailIntegral ti = singular_radial_integral(density, dim, std::min(sigma, support));
            if (!ti.finite) {
                out.finite = false;
                out.growth_rate = ti.rate;
                out.mass = omega * ti.value + mass;
                return out;
            }
            mass += omega * ti.value;
        } else {
            const double full_hi = std::max(0.0, std::min(sigma - d, support));
            if (full_hi > 0.0) {
                TailIntegral ti = singular_radial_integral(density, dim, full_hi);
                if (!ti.finite) {
                    out.finite = false;
                    out.growth_rate = ti.rate;
                    out.mass = omega * ti.value + mass;
                    return out;
                }
                mass += omega * ti.value;
            }
            const double part_lo = std::max(0.0, std::fabs(sigma - d));
            const double part_hi = std::min(d + sigma, support);
            if (part_hi > part_lo) {
                QuadResult q = integrate(
                    [&](double r) { return density.value(r) * sphere_in_ball_area(dim, r, d, sigma); },
                    part_lo, part_hi, 1e-10);
                mass += q.value;
            }
        }
    }
    out.mass = mass;
    return out;
}

}  // namespace

MassFlag ball_measure_checked(const RadialDensity& density, int dim, double center_radius,
                              double sigma) {
    return ball_measure_impl(density, dim, center_radius, sigma);
}

MassFlag radial_shell_mass(const RadialDensity& density, int dim, double lo, double hi) {
    MassFlag out;
    hi = std::min(hi, density.support);
    if (!(hi > lo)) return out;
    const double omega = sphere_area(dim);
    if (lo <= 0.0) {
        TailIntegral ti = singular_radial_integral(density, dim, hi);
        out.finite = ti.finite;
        out.growth_rate = ti.rate;
        out.mass = omega * ti.value;
        return out;
    }
    QuadResult q = integrate([&](double r) { return density.value(r) * std::pow(r, dim - 1); },
                             lo, hi, 1e-10);
    out.mass = omega * q.value;
    return out;
}

double ball_measure(const RadialDensity& density, int dim, double center_radius, double sigma) {
    MassFlag f = ball_measure_impl(density, dim, center_radius, sigma);
    if (!f.finite) throw std::domain_error("ball_measure: infinite mass inside the ball");
    return f.mass;
}

double ball_measure(const RadialProfile& profile, double center_radius, double sigma) {
    return ball_measure(profile.as_density(), profile.dim, center_radius, sigma);
}

MassFlag local_finiteness(const RadialProfile& profile) {
    return ball_measure_impl(profile.as_density(), profile.dim, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// sup over centers

namespace {

bool radially_nonincreasing(const RadialDensity& density, double r_hi) {
    if (!(r_hi > 0.0)) return true;
    const double r_lo = r_hi * 1e-8;
    double prev = density.value(r_lo);
    const int n = 160;
    for (int i = 1; i <= n; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / n);
        const double v = density.value(r * (1.0 - 1e-13));
        if (v > prev * (1.0 + 1e-10) + 1e-300) return false;
        prev = v;
    }
    return true;
}

}  // namespace

double sup_ball_measure(const RadialDensity& density, int dim, double sigma) {
    const double support = density.support;
    const double origin = ball_measure(density, dim, 0.0, sigma);
    if (support <= 0.0) return origin;  // pure atom
    if (!std::isfinite(support)) {
        // Unbounded support: translation handled by monotonicity only.
        if (radially_nonincreasing(density, 64.0 * sigma)) return origin;
    } else if (radially_nonincreasing(density, support)) {
        // Spot check on a coarse center grid.
        double best = origin;
        const double d_max = support + sigma;
        for (int i = 1; i <= 32; ++i) {
            const double d = d_max * i / 32.0;
            best = std::fmax(best, ball_measure(density, dim, d, sigma));
        }
        if (best <= origin * (1.0 + 1e-9) + 1e-300) return origin;
        // fall through to refinement around the grid max
    }
    // Center-grid maximization with golden-section refinement.
    const double d_max = (std::isfinite(support) ? support : 64.0 * sigma) + sigma;
    int best_i = 0;
    double best = origin;
    const int n = 48;
    for (int i = 1; i <= n; ++i) {
        const double d = d_max * i / n;
        const double v = ball_measure(density, dim, d, sigma);
        if (v > best) { best = v; best_i = i; }
    }
    double lo = d_max * std::max(0, best_i - 1) / n;
    double hi = d_max * std::min(n, best_i + 1) / n;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = ball_measure(density, dim, x1, sigma);
    double f2 = ball_measure(density, dim, x2, sigma);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = ball_measure(density, dim, x2, sigma);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = ball_measure(density, dim, x1, sigma);
        }
    }
    return std::fmax(best, std::fmax(f1, f2));
}

double sup_ball_measure(const RadialProfile& profile, double sigma) {
    return sup_ball_measure(profile.as_density(), profile.dim, sigma);
}

// ---------------------------------------------------------------------------
// Modulator integrability (Theorem 1.2 (d), (e) hypotheses)

MassFlag modulator_case_d_integral(const Modulator& h, double q) {
    // \int_0^1 h(tau)^q tau^{-1} dtau in ell = log(2/tau).
    auto g = [&](double ell) { return std::pow(h(2.0 * std::exp(-ell)), q); };
    TailIntegral ti = log_tail_integral(g, std::log(2.0));
    MassFlag out;
    out.finite = ti.finite;
    out.mass = ti.value;
    out.growth_rate = ti.rate;
    return out;
}

MassFlag modulator_case_e_integral(const Modulator& h, double q) {
    // f(r) = \int_0^r h(tau) tau^{-1} dtau, then \int_0^1 f(r)^q r^{-1} dr.
    // Inner integral tabulated on an ell-grid and continued by fitted tail.
    const double ell0 = std::log(2.0);
    const double ell_max = 200.0;
    const int n = 400;
    std::vector<double> ells(n + 1), cumulative(n + 1);
    for (int i = 0; i <= n; ++i) ells[i] = ell0 + (ell_max - ell0) * i / n;
    auto g = [&](double ell) { return h(2.0 * std::exp(-ell)); };
    cumulative[n] = 0.0;
    for (int i = n - 1; i >= 0; --i)
        cumulative[i] = cumulative[i + 1] + integrate(g, ells[i], ells[i + 1], 1e-9).value;
    // tail beyond ell_max from power fit
    double tail = 0.0;
    bool tail_finite = true;
    {
        const double ga = g(ell_max / 1.6), gb = g(ell_max);
        if (gb > 0.0 && ga > 0.0) {
            const double s = -std::log(gb / ga) / std::log(1.6);
            if (s > 1.05) tail = gb * ell_max / (s - 1.0);
            else tail_finite = false;
        }
    }
    MassFlag out;
    if (!tail_finite) {
        out.finite = false;
        return out;
    }
    auto inner = [&](double ell) -> double {
        if (ell >= ell_max) return tail;  // deep-tail plateau approximation
        const double x = (ell - ell0) / (ell_max - ell0) * n;
        const int i = std::min(n - 1, std::max(0, static_cast<int>(x)));
        const double w = x - i;
        return cumulative[i] * (1.0 - w) + cumulative[i + 1] * w + tail;
    };
    auto outer = [&](double ell) { return std::pow(inner(ell), q); };
    TailIntegral ti = log_tail_integral(outer, ell0);
    out.finite = ti.finite;
    out.mass = ti.value;
    out.growth_rate = ti.rate;
    return out;
}

// ---------------------------------------------------------------------------
// Orlicz transforms

OrliczSpec OrliczSpec::phi(double beta) { return OrliczSpec{Kind::Phi, beta, M_E}; }
OrliczSpec OrliczSpec::psi(double alpha) { return OrliczSpec{Kind::Psi, alpha, M_E}; }

OrliczSpec OrliczSpec::lambda(double lam, double L) {
    if (!(L >= M_E)) throw std::invalid_argument("OrliczSpec: Lambda base L must be >= e");
    return OrliczSpec{Kind::Lambda, lam, L};
}

double orlicz_apply(const OrliczSpec& spec, double tau) {
    if (!(tau >= 0.0)) throw std::domain_error("orlicz_apply: tau must be >= 0");
    if (!(spec.exponent > 0.0)) throw std::invalid_argument("orlicz_apply: exponent must be > 0");
    const double base = spec.kind == OrliczSpec::Kind::Lambda ? spec.base : M_E;
    return tau * std::pow(std::log(base + tau), spec.exponent);
}

double orlicz_invert(const OrliczSpec& spec, double y) {
    if (!(y >= 0.0)) throw std::domain_error("orlicz_invert: y must be >= 0");
    if (y == 0.0) return 0.0;
    const double base = spec.kind == OrliczSpec::Kind::Lambda ? spec.base : M_E;
    // log(base + s) >= 1, so the root lies in [0, y].
    double lo = 0.0, hi = y;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (orlicz_apply(spec, mid) < y) lo = mid; else hi = mid;
    }
    // Newton polish.
    double s = 0.5 * (lo + hi);
    for (int i = 0; i < 6; ++i) {
        const double lg = std::log(base + s);
        const double f = s * std::pow(lg, spec.exponent) - y;
        const double df = std::pow(lg, spec.exponent) +
                          s * spec.exponent * std::pow(lg, spec.exponent - 1.0) / (base + s);
        const double step = f / df;
        s -= step;
        if (!(s > 0.0)) s = 0.5 * (lo + hi);
        if (std::fabs(step) <= 1e-15 * s) break;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Theorem families and scaling

ProfilePair make_optimal_profile(const SystemParams& params, Case case_label, double c1, double c2,
                                 const std::optional<Modulator>& h) {
    if (classify(params).label != case_label)
        throw std::invalid_argument("make_optimal_profile: case does not match classify(params)");
    if (c1 < 0.0 || c2 < 0.0)
        throw std::invalid_argument("make_optimal_profile: amplitudes must be >= 0");
    const bool needs_h = (case_label == Case::D || case_label == Case::E);
    if (needs_h && !h)
        throw std::invalid_argument("make_optimal_profile: cases D and E require a modulator");
    if (!needs_h && h)
        throw std::invalid_argument("make_optimal_profile: modulator is only accepted for cases D and E");
    if (needs_h && h->name() == "table" && !h->is_nondecreasing_table())
        throw std::invalid_argument("make_optimal_profile: modulator table must be nondecreasing");

    const ExponentSet e = derive_exponents(params);
    const double n = params.dim();
    ProfilePair out;
    out.mu.dim = out.nu.dim = params.dim();
    out.mu.cutoff = out.nu.cutoff = 1.0;
    out.mu.amplitude = c1;
    out.nu.amplitude = c2;
    switch (case_label) {
        case Case::A:
            out.mu.lambda = e.lambda_mu;
            out.nu.lambda = e.lambda_nu;
            break;
        case Case::B: {
            const double pq1 = params.p() * params.q() - 1.0;
            out.mu.lambda = e.lambda_mu;
            out.mu.kappa = -params.p() / pq1;
            out.nu.lambda = n;
            out.nu.kappa = -1.0 / pq1 - 1.0;
            break;
        }
        case Case::C:
            out.mu.lambda = out.nu.lambda = n;
            out.mu.kappa = out.nu.kappa = -0.5 * n - 1.0;
            break;
        case Case::D:
        case Case::E:
            out.mu.lambda = (case_label == Case::D) ? e.d_over_q : n;
            out.mu.modulator = *h;
            out.nu.amplitude = 0.0;  // nu is a plain Radon measure: point mass
            out.nu.atom = c2;
            break;
        case Case::F:
            out.mu.amplitude = out.nu.amplitude = 0.0;
            out.mu.atom = c1;
            out.nu.atom = c2;
            break;
    }
    return out;
}

RadialProfile scale_profile(const RadialProfile& profile, const SystemParams& params,
                            double t_scale, Side side) {
    if (!(t_scale > 0.0)) throw std::invalid_argument("scale_profile: T must be positive");
    const ExponentSet e = derive_exponents(params);
    const double s = side == Side::U ? e.scal_u : e.scal_v;
    const double rt = std::sqrt(t_scale);
    RadialProfile out;
    out.dim = profile.dim;
    out.amplitude = profile.amplitude * std::pow(t_scale, s - 0.5 * profile.lambda);
    out.lambda = profile.lambda;
    out.cutoff = profile.cutoff / rt;
    out.atom = profile.atom * std::pow(t_scale, s - 0.5 * params.dim());
    if (t_scale == 1.0) {
        out.kappa = profile.kappa;
        out.modulator = profile.modulator;
    } else if (profile.kappa == 0.0 && profile.modulator.is_identity()) {
        out.kappa = 0.0;
        out.modulator = Modulator();  // pure power: closed under dilation
    } else {
        // |log(sqrt(T) r / 2)|^kappa and h(sqrt(T) r) fold into the modulator.
        out.kappa = 0.0;
        out.modulator = profile.modulator.rescaled_log(rt, profile.kappa);
    }
    return out;
}

}  // namespace paraslab
