#include "paraslab/semigroup.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include "paraslab/quadrature.hpp"

namespace paraslab {

// ---------------------------------------------------------------------------
// GridField

GridField::GridField(int dim, int points_per_axis, double box_halfwidth, double fill)
    : dim_(dim), m_(points_per_axis), halfwidth_(box_halfwidth) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("GridField: dim must be 1, 2 or 3");
    if (points_per_axis < 2 || points_per_axis % 2 != 0)
        throw std::invalid_argument("GridField: points_per_axis must be even and >= 2");
    if (!(box_halfwidth > 0.0)) throw std::invalid_argument("GridField: box halfwidth must be > 0");
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(points_per_axis);
    values_.assign(n, fill);
}

double GridField::cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dim_; ++d) v *= cell_width();
    return v;
}

double GridField::radius_of(std::size_t flat) const {
    double r2 = 0.0;
    for (int d = dim_ - 1; d >= 0; --d) {
        const int idx = static_cast<int>(flat % m_);
        flat /= m_;
        const double x = coord(idx);
        r2 += x * x;
    }
    return std::sqrt(r2);
}

double GridField::mass() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * cell_volume();
}

double GridField::sup() const {
    double s = 0.0;
    for (double v : values_) s = std::fmax(s, v);
    return s;
}

double GridField::support_radius() const {
    const double thresh = 1e-14 * sup();
    double r = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] > thresh) r = std::fmax(r, radius_of(i));
    return r;
}

void GridField::clamp_nonnegative(double rel_tol) {
    const double s = sup();
    const double floor_allowed = -rel_tol * std::fmax(s, 1e-300);
    for (double& v : values_) {
        if (v < 0.0) {
            if (v < floor_allowed)
                throw std::runtime_error("GridField: semigroup produced a negative value beyond tolerance");
            v = 0.0;
        }
    }
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid TimeGrid::graded(double t_end, int count, double ratio) {
    if (!(t_end > 0.0)) throw std::invalid_argument("TimeGrid: t_end must be > 0");
    if (count < 4) throw std::invalid_argument("TimeGrid: need at least 4 nodes");
    if (!(ratio > 1.0) || ratio > 2.0) throw std::invalid_argument("TimeGrid: ratio must lie in (1, 2]");

    // Graded blocks at both ends, uniform plateau between; block depth capped
    // so the smallest interval is >= 1e-6 of the plateau interval.
    const int depth_cap = static_cast<int>(std::log(1e6) / std::log(ratio));
    const int g = std::min(count / 4, depth_cap);
    std::vector<double> h(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const int from_left = i;
        const int from_right = count - 1 - i;
        const int k = std::min({from_left, from_right, g});
        h[i] = std::pow(ratio, k);
    }
    double total = 0.0;
    for (double hi : h) total += hi;
    TimeGrid out;
    out.t_end = t_end;
    out.ratio = ratio;
    out.nodes.resize(count);
    out.weights.resize(count);
    double acc = 0.0;
    for (int i = 0; i < count; ++i) {
        out.weights[i] = h[i] / total * t_end;
        acc += out.weights[i];
        out.nodes[i] = acc;
    }
    out.nodes.back() = t_end;
    return out;
}

// ---------------------------------------------------------------------------
// Heat kernel

double heat_kernel(int dim, double x_norm, double t, double diffusivity) {
    if (!(t > 0.0)) throw std::domain_error("heat_kernel: t must be > 0");
    if (!(diffusivity > 0.0)) throw std::domain_error("heat_kernel: diffusivity must be > 0");
    const double dt = diffusivity * t;
    return std::pow(4.0 * M_PI * dt, -0.5 * dim) * std::exp(-x_norm * x_norm / (4.0 * dt));
}

// ---------------------------------------------------------------------------
// Spectral backend

namespace {
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Spectral::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    ~Impl() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

Spectral::Spectral(int dim, int points_per_axis, double box_halfwidth)
    : impl_(std::make_unique<Impl>()), dim_(dim), m_(points_per_axis), halfwidth_(box_halfwidth) {
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(m_);
    std::vector<std::complex<double>> scratch(n);
    int dims[3] = {m_, m_, m_};
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
        impl_->fwd = fftw_plan_dft(dim_, dims, ptr, ptr, FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
        impl_->bwd = fftw_plan_dft(dim_, dims, ptr, ptr, FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (!impl_->fwd || !impl_->bwd) throw std::runtime_error("Spectral: FFTW planning failed");

    // |k|^2 with k_j = pi * m_j / L, m_j in [-M/2, M/2).
    k2_.resize(n);
    const double k0 = M_PI / halfwidth_;
    std::vector<double> k1(m_);
    for (int i = 0; i < m_; ++i) {
        const int f = i <= m_ / 2 ? i : i - m_;
        k1[i] = k0 * f;
    }
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t rem = flat;
        double acc = 0.0;
        for (int d = dim_ - 1; d >= 0; --d) {
            const int idx = static_cast<int>(rem % m_);
            rem /= m_;
            acc += k1[idx] * k1[idx];
        }
        k2_[flat] = acc;
    }
}

Spectral::~Spectral() = default;

std::vector<std::complex<double>> Spectral::forward(const GridField& field) const {
    if (field.dim() != dim_ || field.m() != m_)
        throw std::invalid_argument("Spectral::forward: geometry mismatch");
    std::vector<std::complex<double>> modes(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) modes[i] = field[i];
    auto* ptr = reinterpret_cast<fftw_complex*>(modes.data());
    fftw_execute_dft(impl_->fwd, ptr, ptr);
    return modes;
}

GridField Spectral::inverse(const std::vector<std::complex<double>>& modes) const {
    if (modes.size() != k2_.size()) throw std::invalid_argument("Spectral::inverse: size mismatch");
    std::vector<std::complex<double>> work = modes;
    auto* ptr = reinterpret_cast<fftw_complex*>(work.data());
    fftw_execute_dft(impl_->bwd, ptr, ptr);
    GridField out(dim_, m_, halfwidth_);
    const double scale = 1.0 / static_cast<double>(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) out[i] = work[i].real() * scale;
    out.clamp_nonnegative();
    return out;
}

GridField apply_semigroup_grid(const GridField& field, double diffusivity, double t,
                               int* tail_warnings) {
    if (t < 0.0) throw std::domain_error("apply_semigroup_grid: t must be >= 0");
    if (!(diffusivity > 0.0)) throw std::domain_error("apply_semigroup_grid: diffusivity must be > 0");
    if (t == 0.0) return field;

    const double ell = std::sqrt(diffusivity * t);  // diffusion length
    const double box = field.halfwidth();
    if (12.0 * ell > box)
        throw std::runtime_error("apply_semigroup_grid: Gaussian tail criterion violated (12 sqrt(Dt) exceeds the box)");
    if (tail_warnings) {
        const double margin = box - field.support_radius();
        if (margin < 6.0 * ell) ++*tail_warnings;
    }

    Spectral spec(field.dim(), field.m(), field.halfwidth());
    auto modes = spec.forward(field);
    const auto& k2 = spec.k2();
    const double dt = diffusivity * t;
    for (std::size_t i = 0; i < modes.size(); ++i) modes[i] *= std::exp(-k2[i] * dt);
    return spec.inverse(modes);
}

// ---------------------------------------------------------------------------
// Radial backend

namespace {

// exp(-z) I_0(z) for z >= 0.
double bessel_i0_scaled(double z) {
    if (z < 0.0) z = -z;
    if (z <= 40.0) {
        double term = 1.0, sum = 1.0;
        const double w = 0.25 * z * z;
        for (int k = 1; k < 160; ++k) {
            term *= w / (static_cast<double>(k) * k);
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return std::exp(-z) * sum;
    }
    // Asymptotic expansion, |error| < 3e-9 for z > 40.
    const double iz = 1.0 / z;
    const double c1 = 0.125, c2 = 9.0 / 128.0, c3 = 75.0 / 1024.0, c4 = 11025.0 / 98304.0;
    return (1.0 + iz * (c1 + iz * (c2 + iz * (c3 + iz * c4)))) / std::sqrt(2.0 * M_PI * z);
}

// Angular average: \int_{S^{N-1}} G(x - s w, tau) dw at |x| = r, sphere
// radius s. Exact for N = 1, 2, 3; numeric polar integral otherwise.
double sphere_kernel(int dim, double r, double s, double tau) {
    const double pref = std::pow(4.0 * M_PI * tau, -0.5 * dim);
    if (dim == 1) {
        return pref * (std::exp(-(r - s) * (r - s) / (4.0 * tau)) +
                       std::exp(-(r + s) * (r + s) / (4.0 * tau)));
    }
    const double z = r * s / (2.0 * tau);
    const double gauss = std::exp(-(r - s) * (r - s) / (4.0 * tau));
    if (dim == 2) return pref * 2.0 * M_PI * gauss * bessel_i0_scaled(z);
    if (dim == 3) {
        double factor;
        if (z < 1e-6) factor = 4.0 * M_PI * (1.0 + z * z / 6.0) * std::exp(-z);
        else factor = 2.0 * M_PI / z * (1.0 - std::exp(-2.0 * z));
        // (2 pi / z)(e^z - e^-z) * e^{-(r^2+s^2)/4tau} == gauss * (2pi/z)(1 - e^{-2z})
        return pref * gauss * factor;
    }
    const double band = 2.0 * std::pow(M_PI, 0.5 * (dim - 1)) / std::tgamma(0.5 * (dim - 1));
    QuadResult ang = integrate(
        [&](double theta) {
            return std::exp(z * (std::cos(theta) - 1.0)) * std::pow(std::sin(theta), dim - 2);
        },
        0.0, M_PI, 1e-10);
    return pref * gauss * band * ang.value;
}

}  // namespace

std::vector<double> apply_semigroup_radial(const RadialDensity& density, int dim,
                                           double diffusivity, double t,
                                           const std::vector<double>& radii, double rel_tol) {
    if (!(t > 0.0)) throw std::domain_error("apply_semigroup_radial: t must be > 0");
    const double tau = diffusivity * t;
    const double width = std::sqrt(tau);
    const double support = density.support;
    std::vector<double> out(radii.size(), 0.0);

    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r0 = radii[i];
        double val = 0.0;
        if (density.atom > 0.0) val += density.atom * heat_kernel(dim, r0, tau, 1.0);
        if (support > 0.0) {
            // integrand in mass form: f(s) K(r0,s) s^{N-1}; split panels so the
            // Gaussian ridge at s ~ r0 and the s -> 0 singularity are isolated.
            const double lam = density.power_hint;
            const double r_max = std::isfinite(support) ? support : r0 + 14.0 * width;
            std::vector<double> cuts;
            cuts.push_back(0.0);
            const double sing_hi = std::min(r_max, std::fmax(0.25 * width, 1e-3 * r_max));
            cuts.push_back(sing_hi);
            for (double c : {r0 - 10.0 * width, r0 - 2.0 * width, r0 + 2.0 * width,
                             r0 + 10.0 * width})
                if (c > sing_hi && c < r_max) cuts.push_back(c);
            cuts.push_back(r_max);
            std::sort(cuts.begin(), cuts.end());

            double total = 0.0;
            bool ok = true;
            double err_est = 0.0;
            // singular head via power/log substitution
            {
                const double b = cuts[1];
                if (b > 0.0) {
                    auto g_weight = [&](double s) { return sphere_kernel(dim, r0, s, tau); };
                    // u = s^{N - lam} (lam < N), ell-substitution at lam == N
                    if (lam < dim - 1e-9) {
                        const double e = dim - lam;
                        QuadResult q = integrate(
                            [&](double u) {
                                const double s = std::pow(u, 1.0 / e);
                                return density.value(s) * std::pow(s, lam) * g_weight(s);
                            },
                            0.0, std::pow(b, e), rel_tol * 0.1);
                        total += q.value / e;
                        ok = ok && q.converged;
                        err_est += q.error;
                    } else {
                        auto g = [&](double ell) {
                            const double s = 2.0 * std::exp(-ell);
                            return density.value(s) * std::pow(s, dim) * g_weight(s);
                        };
                        QuadResult q = integrate(g, std::log(2.0 / b), std::log(2.0 / b) + 180.0,
                                                 rel_tol * 0.1);
                        total += q.value;
                        ok = ok && q.converged;
                        err_est += q.error;
                    }
                }
            }
            for (std::size_t c = 1; c + 1 < cuts.size(); ++c) {
                QuadResult q = integrate(
                    [&](double s) {
                        return density.value(s) * sphere_kernel(dim, r0, s, tau) *
                               std::pow(s, dim - 1);
                    },
                    cuts[c], cuts[c + 1], rel_tol * 0.1);
                total += q.value;
                ok = ok && q.converged;
                err_est += q.error;
            }
            if (!ok && err_est > 1e-6 * std::fabs(total))
                throw std::runtime_error("apply_semigroup_radial: quadrature did not converge, error estimate " +
                                         std::to_string(err_est));
            val += total;
        }
        out[i] = val;
    }
    return out;
}

std::vector<double> apply_semigroup_radial(const RadialProfile& profile, double diffusivity,
                                           double t, const std::vector<double>& radii,
                                           double rel_tol) {
    return apply_semigroup_radial(profile.as_density(), profile.dim, diffusivity, t, radii, rel_tol);
}

// ---------------------------------------------------------------------------
// Uniformly local norms

double uloc_norm(const GridField& field, double r, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("uloc_norm: rho must be > 0");
    if (rho > field.halfwidth()) throw std::invalid_argument("uloc_norm: rho must be <= box halfwidth");
    if (std::isinf(r)) return field.sup();
    if (!(r >= 1.0)) throw std::invalid_argument("uloc_norm: r must be >= 1");

    const int m = field.m();
    const double delta = field.cell_width();
    const double cellvol = field.cell_volume();
    const auto& v = field.values();

    auto wrapped = [m](int i) { return ((i % m) + m) % m; };

    if (field.dim() == 1) {
        const int w = static_cast<int>(std::floor(rho / delta));
        std::vector<double> pw(m);
        for (int i = 0; i < m; ++i) pw[i] = std::pow(v[i], r);
        double best = 0.0;
        double window = 0.0;
        for (int j = -w; j <= w; ++j) window += pw[wrapped(j)];
        for (int i = 0; i < m; ++i) {
            best = std::fmax(best, window);
            window -= pw[wrapped(i - w)];
            window += pw[wrapped(i + 1 + w)];
        }
        return std::pow(best * cellvol, 1.0 / r);
    }

    // N = 2, 3: per-row circular prefix sums, disc/ball row extents.
    const int w = static_cast<int>(std::floor(rho / delta));
    std::vector<int> row_half(2 * w + 1);
    for (int dy = -w; dy <= w; ++dy) {
        const double rem = rho * rho - static_cast<double>(dy) * dy * delta * delta;
        row_half[dy + w] = rem >= 0.0 ? static_cast<int>(std::floor(std::sqrt(rem) / delta)) : -1;
    }

    if (field.dim() == 2) {
        std::vector<double> pw(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) pw[i] = std::pow(v[i], r);
        // prefix along x (last axis) per row
        std::vector<double> pre(static_cast<std::size_t>(m) * (m + 1));
        for (int y = 0; y < m; ++y) {
            pre[static_cast<std::size_t>(y) * (m + 1)] = 0.0;
            for (int x = 0; x < m; ++x)
                pre[static_cast<std::size_t>(y) * (m + 1) + x + 1] =
                    pre[static_cast<std::size_t>(y) * (m + 1) + x] + pw[static_cast<std::size_t>(y) * m + x];
        }
        auto row_window = [&](int y, int x_lo, int x_hi) {  // inclusive, may wrap
            y = wrapped(y);
            double s = 0.0;
            if (x_hi - x_lo + 1 >= m) return pre[static_cast<std::size_t>(y) * (m + 1) + m];
            int lo = wrapped(x_lo), hi = wrapped(x_hi);
            if (lo <= hi) {
                s = pre[static_cast<std::size_t>(y) * (m + 1) + hi + 1] -
                    pre[static_cast<std::size_t>(y) * (m + 1) + lo];
            } else {
                s = pre[static_cast<std::size_t>(y) * (m + 1) + m] -
                    pre[static_cast<std::size_t>(y) * (m + 1) + lo] +
                    pre[static_cast<std::size_t>(y) * (m + 1) + hi + 1];
            }
            return s;
        };
        double best = 0.0;
        for (int cy = 0; cy < m; ++cy)
            for (int cx = 0; cx < m; ++cx) {
                double s = 0.0;
                for (int dy = -w; dy <= w; ++dy) {
                    const int half = row_half[dy + w];
                    if (half < 0) continue;
                    s += row_window(cy + dy, cx - half, cx + half);
                }
                best = std::fmax(best, s);
            }
        return std::pow(best * cellvol, 1.0 / r);
    }

    // N = 3: direct stencil (desk-scale M).
    std::vector<double> pw(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) pw[i] = std::pow(v[i], r);
    double best = 0.0;
    for (int cz = 0; cz < m; ++cz)
        for (int cy = 0; cy < m; ++cy)
            for (int cx = 0; cx < m; ++cx) {
                double s = 0.0;
                for (int dz = -w; dz <= w; ++dz)
                    for (int dy = -w; dy <= w; ++dy) {
                        const double rem2 = rho * rho -
                                            (static_cast<double>(dz) * dz + static_cast<double>(dy) * dy) *
                                                delta * delta;
                        if (rem2 < 0.0) continue;
                        const int half = static_cast<int>(std::floor(std::sqrt(rem2) / delta));
                        const std::size_t base =
                            (static_cast<std::size_t>(wrapped(cz + dz)) * m + wrapped(cy + dy)) * m;
                        for (int dx = -half; dx <= half; ++dx) s += pw[base + wrapped(cx + dx)];
                    }
                best = std::fmax(best, s);
            }
    return std::pow(best * cellvol, 1.0 / r);
}

// ---------------------------------------------------------------------------
// Profile sampling

GridField sample_to_grid(const RadialProfile& profile, double box_halfwidth, int points_per_axis) {
    MassFlag fin = local_finiteness(profile);
    if (!fin.finite)
        throw std::domain_error("sample_to_grid: profile has non-integrable singularity");
    GridField field(profile.dim, points_per_axis, box_halfwidth);
    const int dim = profile.dim;
    const int m = points_per_axis;
    const double delta = field.cell_width();
    const double near_radius = 8.0 * delta;
    const RadialDensity density = profile.as_density();

    // Equal-volume-sector radius for the 2^N origin-adjacent cells.
    const double vball_unit = sphere_area(dim) / dim;  // volume of B(0,1)
    const double r_eq = delta * std::pow(std::pow(2.0, dim) / vball_unit, 1.0 / dim);
    double origin_cell_value = 0.0;
    {
        MassFlag core = radial_shell_mass(density, dim, 0.0, r_eq);
        origin_cell_value = core.mass / std::pow(2.0, dim) / field.cell_volume();
    }
    if (profile.atom > 0.0)
        origin_cell_value += profile.atom / std::pow(2.0, dim) / field.cell_volume();

    for (std::size_t flat = 0; flat < field.size(); ++flat) {
        std::size_t rem = flat;
        double r2c = 0.0, rmin2 = 0.0, rmax2 = 0.0;
        bool origin_cell = true;
        for (int d = dim - 1; d >= 0; --d) {
            const int i = static_cast<int>(rem % m);
            rem /= m;
            const double xc = field.coord(i);
            const double lo = std::fabs(xc) - 0.5 * delta;
            const double hi = std::fabs(xc) + 0.5 * delta;
            r2c += xc * xc;
            const double lo_clamped = std::fmax(0.0, lo);
            rmin2 += lo_clamped * lo_clamped;
            rmax2 += hi * hi;
            if (lo > 1e-12 * delta) origin_cell = false;
        }
        const double rc = std::sqrt(r2c);
        if (origin_cell) {
            field[flat] = origin_cell_value;
        } else if (rc <= near_radius) {
            const double rin = std::sqrt(rmin2), rout = std::sqrt(rmax2);
            MassFlag shell = radial_shell_mass(density, dim, rin, rout);
            const double shellvol =
                sphere_area(dim) / dim * (std::pow(rout, dim) - std::pow(rin, dim));
            field[flat] = shellvol > 0.0 ? shell.mass / shellvol : 0.0;
        } else {
            field[flat] = profile.density(rc);
        }
    }
    return field;
}

// ---------------------------------------------------------------------------
// Field IO

void write_field_binary(const GridField& field, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_field_binary: cannot open " + path);
    const std::uint64_t n = static_cast<std::uint64_t>(field.dim());
    const std::uint64_t m = static_cast<std::uint64_t>(field.m());
    const double L = field.halfwidth();
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(reinterpret_cast<const char*>(&m), 8);
    os.write(reinterpret_cast<const char*>(&L), 8);
    os.write(reinterpret_cast<const char*>(field.values().data()),
             static_cast<std::streamsize>(field.size() * sizeof(double)));
}

GridField read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_field_binary: cannot open " + path);
    std::uint64_t n = 0, m = 0;
    double L = 0.0;
    is.read(reinterpret_cast<char*>(&n), 8);
    is.read(reinterpret_cast<char*>(&m), 8);
    is.read(reinterpret_cast<char*>(&L), 8);
    GridField field(static_cast<int>(n), static_cast<int>(m), L);
    is.read(reinterpret_cast<char*>(field.values().data()),
            static_cast<std::streamsize>(field.size() * sizeof(double)));
    if (!is) throw std::runtime_error("read_field_binary: truncated file " + path);
    return field;
}

void write_field_csv(const GridField& field, const std::string& path) {
    if (field.dim() != 1) throw std::invalid_argument("write_field_csv: CSV export is N = 1 only");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_field_csv: cannot open " + path);
    os << "x,value\n";
    os.precision(17);
    for (int i = 0; i < field.m(); ++i) os << field.coord(i) << ',' << field[i] << '\n';
}

}  // namespace paraslab
