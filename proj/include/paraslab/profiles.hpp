#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "paraslab/exponents.hpp"

namespace paraslab {

// Positive modulator h on the support of a radial profile. Either the
// identity, a monotone piecewise-linear table on (0,1] (interpolated
// linearly in log r), or a closure produced by scaling/powering.
class Modulator {
public:
    Modulator();  // identity

    // radii strictly increasing in (0,1], values > 0. Throws on bad tables.
    static Modulator table(std::vector<double> radii, std::vector<double> values);
    static Modulator from_function(std::function<double(double)> fn, std::string name);

    double operator()(double r) const;
    bool is_identity() const { return !fn_; }
    const std::string& name() const { return name_; }

    // h increasing on its table (used to check the Theorem 1.2(d,e) classes).
    bool is_nondecreasing_table() const;

    Modulator powered(double m) const;                    // h^m
    Modulator rescaled_log(double sqrt_t, double kappa) const;  // |log(sqrt_t r/2)|^kappa * h(sqrt_t r)

private:
    std::function<double(double)> fn_;  // empty == identity
    std::string name_ = "identity";
    std::shared_ptr<const std::vector<std::pair<double, double>>> table_;  // set for table modulators
};

// Any evaluable radial density with enough metadata for singular
// quadrature: value(r) ~ r^{-power_hint} * slowly varying as r -> 0,
// supported on [0, support), plus an optional point mass at the origin.
struct RadialDensity {
    std::function<double(double)> value;  // density at radius r > 0
    double power_hint = 0.0;              // local power of the r -> 0 singularity
    double support = 1.0;                 // density vanishes for r >= support (inf allowed)
    double atom = 0.0;                    // point mass at the origin
};

// Exact symbolic radial initial datum
//   density(r) = c * r^{-lambda} * |log(r/2)|^{kappa} * h(r),  0 < r < cutoff,
// plus a point mass `atom` at the origin.
struct RadialProfile {
    double amplitude = 0.0;  // c >= 0
    double lambda = 0.0;     // power >= 0
    double kappa = 0.0;      // log-power
    Modulator modulator;     // h
    double cutoff = 1.0;     // support B(0, cutoff); may be +inf
    double atom = 0.0;       // m >= 0
    int dim = 1;             // ambient spatial dimension N

    double density(double r) const;
    RadialDensity as_density() const;

    // density^m with the atom dropped; throws if atom > 0 and m != 1.
    RadialProfile powered(double m) const;

    bool is_zero() const { return amplitude == 0.0 && atom == 0.0; }
};

// Finite-mass adjudication for the unit ball (quadrature-backed when a
// table modulator defeats the analytic criterion).
struct MassFlag {
    bool finite = true;
    double mass = 0.0;        // mass of B(0,1) when finite
    double growth_rate = 0.0; // measured divergence rate when not
};

MassFlag local_finiteness(const RadialProfile& profile);

// Theorem 1.2(d)/(e) modulator hypotheses, evaluated on the table:
// (d): \int_0^1 h(tau)^q tau^{-1} dtau;
// (e): \int_0^1 [\int_0^r h(tau) tau^{-1} dtau]^q r^{-1} dr.
MassFlag modulator_case_d_integral(const Modulator& h, double q);
MassFlag modulator_case_e_integral(const Modulator& h, double q);

// Increasing Orlicz-type transforms tau |-> tau [log(base+tau)]^exponent.
struct OrliczSpec {
    enum class Kind { Phi, Psi, Lambda };
    Kind kind = Kind::Phi;
    double exponent = 1.0;  // beta / alpha / lambda
    double base = 0.0;      // L for Lambda (>= e); Phi/Psi use e

    static OrliczSpec phi(double beta);
    static OrliczSpec psi(double alpha);
    static OrliczSpec lambda(double lam, double L);
};

double orlicz_apply(const OrliczSpec& spec, double tau);
// Solves spec(s) = y for s >= 0 to 1e-12 relative; throws on y < 0.
double orlicz_invert(const OrliczSpec& spec, double y);

// The Theorem 1.2 optimal-singularity families, cutoff R = 1.
// Cases D and E require the modulator (h1 resp. h2); other cases forbid it.
struct ProfilePair {
    RadialProfile mu;
    RadialProfile nu;
};

ProfilePair make_optimal_profile(const SystemParams& params, Case case_label,
                                 double c1, double c2,
                                 const std::optional<Modulator>& h = std::nullopt);

// Mass of the ball of radius sigma centered at distance center_radius
// from the origin. Throws std::domain_error("infinite mass") when a
// non-integrable singularity lies inside the ball.
double ball_measure(const RadialProfile& profile, double center_radius, double sigma);
double ball_measure(const RadialDensity& density, int dim, double center_radius, double sigma);

// As above but returning a divergence verdict instead of throwing:
// on divergence, .finite = false and .growth_rate holds the measured rate.
MassFlag ball_measure_checked(const RadialDensity& density, int dim, double center_radius, double sigma);

// omega_{N-1} * \int_lo^hi f(r) r^{N-1} dr with singular handling at lo = 0.
MassFlag radial_shell_mass(const RadialDensity& density, int dim, double lo, double hi);

// sup over centers of ball_measure; origin-centered for radially
// nonincreasing densities, center-grid maximization otherwise.
double sup_ball_measure(const RadialProfile& profile, double sigma);
double sup_ball_measure(const RadialDensity& density, int dim, double sigma);

enum class Side { U, V };

// The parabolic similarity transform: density value |-> T^s value(T^{1/2} x)
// with s = scal_u (u-side) or scal_v (v-side); atoms scale by T^{s - N/2}.
RadialProfile scale_profile(const RadialProfile& profile, const SystemParams& params,
                            double t_scale, Side side);

// Surface area of the unit sphere S^{N-1}.
double sphere_area(int dim);

}  // namespace paraslab
