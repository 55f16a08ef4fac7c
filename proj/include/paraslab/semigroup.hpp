#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "paraslab/profiles.hpp"

namespace paraslab {

// Nonnegative scalar field on the periodic box [-L, L)^N with M cells per
// axis, cell centers at -L + (i + 1/2) * (2L/M). Row-major storage, the
// last axis fastest.
class GridField {
public:
    GridField(int dim, int points_per_axis, double box_halfwidth, double fill = 0.0);

    int dim() const { return dim_; }
    int m() const { return m_; }
    double halfwidth() const { return halfwidth_; }
    double cell_width() const { return 2.0 * halfwidth_ / m_; }
    double cell_volume() const;
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double coord(int cell_index) const {
        return -halfwidth_ + (cell_index + 0.5) * cell_width();
    }
    // Euclidean norm of the cell center for a flat index.
    double radius_of(std::size_t flat) const;

    double mass() const;
    double sup() const;
    // Largest |x| over cells with value > 1e-14 * sup; 0 for zero fields.
    double support_radius() const;

    bool same_geometry(const GridField& other) const {
        return dim_ == other.dim_ && m_ == other.m_ && halfwidth_ == other.halfwidth_;
    }

    // Drops negatives within rel_tol * sup to zero; throws on larger ones.
    void clamp_nonnegative(double rel_tol = 1e-14);

private:
    int dim_;
    int m_;
    double halfwidth_;
    std::vector<double> values_;
};

// Strictly increasing quadrature nodes in (0, t_end], geometrically graded
// toward both endpoints; weights are the subinterval lengths (sum t_end).
struct TimeGrid {
    double t_end = 0.0;
    double ratio = 1.15;
    std::vector<double> nodes;
    std::vector<double> weights;

    static TimeGrid graded(double t_end, int count, double ratio = 1.15);
};

// Fundamental solution (4 pi D t)^{-N/2} exp(-|x|^2 / (4 D t)).
double heat_kernel(int dim, double x_norm, double t, double diffusivity = 1.0);

// Fourier multiplier workspace for one grid geometry. FFTW-backed; safe to
// share across threads for execution (plans are created under a lock).
class Spectral {
public:
    Spectral(int dim, int points_per_axis, double box_halfwidth);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    std::size_t size() const { return k2_.size(); }
    const std::vector<double>& k2() const { return k2_; }  // |k|^2 per mode

    std::vector<std::complex<double>> forward(const GridField& field) const;
    // Inverse transform (normalized); clamps tiny negatives.
    GridField inverse(const std::vector<std::complex<double>>& modes) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int dim_, m_;
    double halfwidth_;
    std::vector<double> k2_;
};

// S(diffusivity * t) on the periodic box, spectral. Mass is conserved
// exactly; t = 0 is the identity. Soft tail-criterion violations increment
// *tail_warnings when given; hard violations throw.
GridField apply_semigroup_grid(const GridField& field, double diffusivity, double t,
                               int* tail_warnings = nullptr);

// [S(diffusivity * t) mu](x) at |x| = r for each requested radius, via
// radius x angle quadrature; atoms contribute exactly.
std::vector<double> apply_semigroup_radial(const RadialDensity& density, int dim,
                                           double diffusivity, double t,
                                           const std::vector<double>& radii,
                                           double rel_tol = 1e-8);
std::vector<double> apply_semigroup_radial(const RadialProfile& profile, double diffusivity,
                                           double t, const std::vector<double>& radii,
                                           double rel_tol = 1e-8);

// Uniformly local norm |||f|||_{r,rho}: sup over grid-centered balls of
// radius rho of the L^r norm over the ball (cell-center inclusion).
// r may be +infinity.
double uloc_norm(const GridField& field, double r, double rho);

// Samples a radial profile onto the grid: exact radial-shell averages for
// cells near the origin (within 8 cell widths), midpoint samples elsewhere.
// A point mass spreads over the 2^N origin-adjacent cells. Refuses
// non-integrable profiles.
GridField sample_to_grid(const RadialProfile& profile, double box_halfwidth, int points_per_axis);

// Flat binary layout: header N, M (uint64 LE), L (float64 LE), then M^N
// float64 values, row-major. CSV is x,value rows (N = 1 only).
void write_field_binary(const GridField& field, const std::string& path);
GridField read_field_binary(const std::string& path);
void write_field_csv(const GridField& field, const std::string& path);

}  // namespace paraslab
