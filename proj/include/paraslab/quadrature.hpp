#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace paraslab {

// Result of an adaptive quadrature pass.
struct QuadResult {
    double value = 0.0;
    double error = 0.0;   // absolute error estimate
    bool converged = true;
    std::int64_t evals = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1,1].
// Column 0: abscissa, column 1: Gauss-7 weight, column 2: Kronrod-15 weight.
inline constexpr double kGK15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0,               0.204432940075298},
    {0.586087235467691, 0.0,               0.169004726639267},
    {0.864864423359769, 0.0,               0.104790010322250},
    {0.991455371120813, 0.0,               0.022935322010529},
};

template <class F>
inline double gk15(F&& f, double a, double b, double& err, std::int64_t& evals) {
    const double mid = 0.5 * (a + b);
    const double hlf = 0.5 * (b - a);
    double y0 = f(mid);
    double g7 = kGK15[0][1] * y0;
    double k15 = kGK15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = hlf * kGK15[i][0];
        const double yi = f(mid + dx) + f(mid - dx);
        g7 += kGK15[i][1] * yi;
        k15 += kGK15[i][2] * yi;
    }
    evals += 15;
    g7 *= hlf;
    k15 *= hlf;
    err = std::pow(200.0 * std::fabs(g7 - k15), 1.5);
    return k15;
}

template <class F>
inline void adapt(F&& f, double a, double b, double tol, int depth, QuadResult& out) {
    double err = 0.0;
    const double s = gk15(f, a, b, err, out.evals);
    if (err <= tol || depth >= 52 || !(b - a > 0.0)) {
        out.value += s;
        out.error += err;
        if (err > tol && depth >= 52) out.converged = false;
        return;
    }
    const double mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth + 1, out);
    adapt(f, mid, b, 0.5 * tol, depth + 1, out);
}

}  // namespace detail

// Adaptive Gauss-Kronrod 7/15 on [a,b]. The tolerance is
// max(abs_tol, rel_tol*|I|) applied per subinterval against the first
// whole-interval estimate.
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 0.0) {
    QuadResult out;
    if (!(b > a)) return out;
    double err0 = 0.0;
    const double coarse = detail::gk15(f, a, b, err0, out.evals);
    const double tol = std::max(abs_tol, rel_tol * std::fabs(coarse));
    if (err0 <= tol) {
        out.value = coarse;
        out.error = err0;
        return out;
    }
    out.evals = 0;
    detail::adapt(f, a, b, std::max(tol, 1e-300), 0, out);
    return out;
}

// Integrates f over [a, inf) where f decays at least exponentially past
// some scale; panels double in width until their contribution is
// negligible against the running total.
template <class F>
QuadResult integrate_decaying_tail(F&& f, double a, double rel_tol = 1e-10, int max_panels = 64) {
    QuadResult out;
    double left = a;
    double width = 1.0;
    for (int k = 0; k < max_panels; ++k) {
        QuadResult panel = integrate(f, left, left + width, rel_tol, 0.0);
        out.value += panel.value;
        out.error += panel.error;
        out.evals += panel.evals;
        out.converged = out.converged && panel.converged;
        if (k > 2 && std::fabs(panel.value) <= rel_tol * std::fabs(out.value) + 1e-300) return out;
        left += width;
        width *= 2.0;
    }
    out.converged = false;
    return out;
}

}  // namespace paraslab
