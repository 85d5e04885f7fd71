// Norms, energies and conserved quantities of the cubic-quartic NLS on
// discrete fields. Derivatives are spectral on the periodic box and
// second-order centered differences (one-sided at boundaries) on the
// radial / cylindrical grids.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "cqnls/fft.hpp"
#include "cqnls/geometry.hpp"

namespace cqnls {

struct EnergyBreakdown {
    double kinetic = 0.0;      // 1/2 ∫ |∇u|^2
    double centrifugal = 0.0;  // (m^2/2) ∫ |u|^2 / r^2
    double quartic = 0.0;      // -1/2 ∫ |u|^4
    double quintic = 0.0;      // (2/5) ∫ |u|^5
    double total = 0.0;
};

struct ConservedScalars {
    double mass = 0.0;
    double px = 0.0, py = 0.0;
    double angular_momentum = 0.0;
    double variance = 0.0;     // ∫ |x|^2 |u|^2
};

// f(z) = -|z|^2 z + |z|^3 z
inline cplx nonlinearity(cplx z) {
    const double a = std::abs(z);
    return (-a * a + a * a * a) * z;
}

// Certified lower bound on E - 1/2||∇u||^2 at fixed mass rho, from the
// pointwise inequality s^4 <= (4/5) s^5 + (25/108) s^2.
inline double energy_lower_bound(double rho) {
    if (rho < 0.0) throw config_error("energy_lower_bound: rho must be nonnegative");
    return -(25.0 / 216.0) * rho;
}

inline double mass(const WaveField& u) {
    return quadrature(u, [](cplx v, const NodeCoord&) { return std::norm(v); });
}

namespace detail {

// centered differences along a strided line, 2nd-order one-sided closure
inline void diff_line(const cplx* f, int n, int stride, double h, cplx* out, int out_stride) {
    const double i2h = 1.0 / (2.0 * h);
    out[0] = (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) * i2h;
    for (int j = 1; j < n - 1; ++j)
        out[std::size_t(j) * out_stride] = (f[std::size_t(j + 1) * stride] - f[std::size_t(j - 1) * stride]) * i2h;
    out[std::size_t(n - 1) * out_stride] =
        (3.0 * f[std::size_t(n - 1) * stride] - 4.0 * f[std::size_t(n - 2) * stride] + f[std::size_t(n - 3) * stride]) * i2h;
}

// |∇u|^2 per node for radial / cylindrical grids
inline std::vector<double> grad_sq_nodes(const WaveField& u) {
    const Grid& g = u.grid;
    std::vector<double> gsq(u.size(), 0.0);
    if (g.kind() == GridKind::Radial2D) {
        std::vector<cplx> d(u.size());
        diff_line(u.values.data(), g.nr(), 1, g.hr(), d.data(), 1);
        for (std::size_t i = 0; i < u.size(); ++i) gsq[i] = std::norm(d[i]);
    } else {
        const int nr = g.nr(), nz = g.nz();
        std::vector<cplx> d(std::max(nr, nz));
        for (int j = 0; j < nr; ++j) {  // z sweeps, contiguous
            diff_line(u.values.data() + std::size_t(j) * nz, nz, 1, g.hz(), d.data(), 1);
            for (int k = 0; k < nz; ++k) gsq[std::size_t(j) * nz + k] += std::norm(d[k]);
        }
        for (int k = 0; k < nz; ++k) {  // r sweeps, stride nz
            diff_line(u.values.data() + k, nr, nz, g.hr(), d.data(), 1);
            for (int j = 0; j < nr; ++j) gsq[std::size_t(j) * nz + k] += std::norm(d[j]);
        }
    }
    return gsq;
}

inline double weighted_sum(const Grid& g, const std::vector<double>& node_values) {
    auto& terms = scratch_buffer(node_values.size());
    for (std::size_t i = 0; i < node_values.size(); ++i) terms[i] = g.weight(i) * node_values[i];
    return pairwise_sum(terms.data(), node_values.size());
}

} // namespace detail

// ||∇u||^2. Spectral (exact on lattice modes) on the periodic box via
// Parseval: (w/N) Σ |k|^2 |û_k|^2; finite differences elsewhere. The m^2/r^2
// angular term is *not* included here (see centrifugal()).
inline double grad_norm_sq(const WaveField& u) {
    const Grid& g = u.grid;
    if (g.kind() == GridKind::Cartesian2D) {
        const int nx = g.nx(), ny = g.ny();
        std::vector<cplx> hat = u.values;
        FftEngine::instance().forward2d(nx, ny, hat.data());
        // Parseval: ∫|∇u|^2 ≈ (w/N) Σ |k|^2 |û_k|^2 with w = hx hy, N = nx ny
        const double norm = g.hx() * g.hy() / (double(nx) * ny);
        auto& terms = detail::scratch_buffer(hat.size());
        for (int iy = 0; iy < ny; ++iy) {
            const double ky = wavenumber(iy, ny, g.Ly());
            for (int ix = 0; ix < nx; ++ix) {
                const double kx = wavenumber(ix, nx, g.Lx());
                terms[std::size_t(ix) + std::size_t(nx) * iy] =
                    (kx * kx + ky * ky) * std::norm(hat[std::size_t(ix) + std::size_t(nx) * iy]);
            }
        }
        return norm * detail::pairwise_sum(terms.data(), hat.size());
    }
    return detail::weighted_sum(g, detail::grad_sq_nodes(u));
}

// (m^2/2) ∫ |u|^2 / r^2 — finite at every node thanks to the half-cell rule.
inline double centrifugal(const WaveField& u, int m) {
    if (u.grid.kind() == GridKind::Cartesian2D)
        throw error("centrifugal: the Cartesian embedding carries the angular term analytically");
    if (m == 0) return 0.0;
    const double c = 0.5 * double(m) * double(m);
    return c * quadrature(u, [](cplx v, const NodeCoord& p) { return std::norm(v) / (p.r * p.r); });
}

inline EnergyBreakdown energy(const WaveField& u, int m, bool include_potential) {
    if (include_potential && m != 0 && u.grid.kind() == GridKind::Cartesian2D)
        throw error("energy: include_potential with m != 0 needs a radial or cylindrical grid");
    EnergyBreakdown e;
    e.kinetic = 0.5 * grad_norm_sq(u);
    e.centrifugal = (include_potential && m != 0) ? centrifugal(u, m) : 0.0;
    e.quartic = -0.5 * quadrature(u, [](cplx v, const NodeCoord&) {
        const double a = std::norm(v);
        return a * a;
    });
    e.quintic = 0.4 * quadrature(u, [](cplx v, const NodeCoord&) {
        const double a = std::abs(v);
        const double a2 = a * a;
        return a2 * a2 * a;
    });
    e.total = e.kinetic + e.centrifugal + e.quartic + e.quintic;
    return e;
}

// P(u) = ∫ Im(conj(u) ∇u); identically zero on radial grids by symmetry,
// so those are rejected and callers substitute 0.
inline std::pair<double, double> momentum(const WaveField& u) {
    if (u.grid.kind() != GridKind::Cartesian2D)
        throw error("momentum: vanishes by symmetry on radial grids; caller should use 0");
    WaveField dx, dy;
    spectral_gradient(u, dx, dy);
    const std::size_t n = u.size();
    auto& terms = detail::scratch_buffer(n);
    const double w = u.grid.hx() * u.grid.hy();
    for (std::size_t i = 0; i < n; ++i)
        terms[i] = w * (std::conj(u.values[i]) * dx.values[i]).imag();
    const double px = detail::pairwise_sum(terms.data(), n);
    for (std::size_t i = 0; i < n; ++i)
        terms[i] = w * (std::conj(u.values[i]) * dy.values[i]).imag();
    const double py = detail::pairwise_sum(terms.data(), n);
    return {px, py};
}

// <u, L_z u> with L_z u = i (x1 ∂_2 u - x2 ∂_1 u), spectral derivatives.
// L_z is exactly Hermitian on the discrete torus, so a large imaginary
// residue signals aliasing; note L_z e^{im θ} = -m e^{im θ} under this
// literal sign convention.
inline double angular_momentum(const WaveField& u) {
    if (u.grid.kind() != GridKind::Cartesian2D)
        throw error("angular_momentum: needs the Cartesian embedding");
    WaveField dx, dy;
    spectral_gradient(u, dx, dy);
    const Grid& g = u.grid;
    const int nx = g.nx();
    const std::size_t n = u.size();
    auto& terms = detail::scratch_buffer(n);
    const double w = g.hx() * g.hy();
    std::vector<double> imag_terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int ix = int(i % nx), iy = int(i / nx);
        const cplx lz = cplx(0.0, 1.0) * (g.x(ix) * dy.values[i] - g.y(iy) * dx.values[i]);
        const cplx t = std::conj(u.values[i]) * lz;
        terms[i] = w * t.real();
        imag_terms[i] = w * t.imag();
    }
    const double re = detail::pairwise_sum(terms.data(), n);
    const double im = detail::pairwise_sum(imag_terms.data(), n);
    const double scale = std::max({std::abs(re), mass(u), 1e-30});
    if (std::abs(im) / scale > 1e-8)
        throw numeric_error("angular_momentum: Hermiticity residue above 1e-8 (aliasing?)");
    return re;
}

// ∫ |x|^2 |u|^2  (r^2 + z^2 on the cylinder)
inline double variance(const WaveField& u) {
    switch (u.grid.kind()) {
        case GridKind::Cartesian2D:
            return quadrature(u, [](cplx v, const NodeCoord& p) {
                return (p.x * p.x + p.y * p.y) * std::norm(v);
            });
        case GridKind::Radial2D:
            return quadrature(u, [](cplx v, const NodeCoord& p) { return p.r * p.r * std::norm(v); });
        case GridKind::Cylindrical3D:
            return quadrature(u, [](cplx v, const NodeCoord& p) {
                return (p.r * p.r + p.z * p.z) * std::norm(v);
            });
    }
    return 0.0;
}

// ||u||^2_{H^1_m} = ||∇u||^2 + m^2 ||u/r||^2 + ||u||^2
inline double h1m_norm_sq(const WaveField& u, int m) {
    const double cf = (m != 0 && u.grid.kind() != GridKind::Cartesian2D) ? 2.0 * centrifugal(u, m) : 0.0;
    return grad_norm_sq(u) + cf + mass(u);
}

// complex H^1_m inner product <f, g> = ∫ ∇f·conj(∇g) + (m^2/r^2 + 1) f conj(g)
inline cplx h1m_inner(const WaveField& f, const WaveField& g, int m) {
    require_same_grid(f, g, "h1m_inner");
    const Grid& grid = f.grid;
    const std::size_t n = f.size();
    std::vector<cplx> df_x(n), df_y(n), dg_x(n), dg_y(n);
    if (grid.kind() == GridKind::Cartesian2D) {
        WaveField a, b;
        spectral_gradient(f, a, b);
        df_x = a.values; df_y = b.values;
        spectral_gradient(g, a, b);
        dg_x = a.values; dg_y = b.values;
    } else if (grid.kind() == GridKind::Radial2D) {
        detail::diff_line(f.values.data(), grid.nr(), 1, grid.hr(), df_x.data(), 1);
        detail::diff_line(g.values.data(), grid.nr(), 1, grid.hr(), dg_x.data(), 1);
        std::fill(df_y.begin(), df_y.end(), cplx(0.0));
        std::fill(dg_y.begin(), dg_y.end(), cplx(0.0));
    } else {
        const int nr = grid.nr(), nz = grid.nz();
        for (int j = 0; j < nr; ++j) {
            detail::diff_line(f.values.data() + std::size_t(j) * nz, nz, 1, grid.hz(), df_y.data() + std::size_t(j) * nz, 1);
            detail::diff_line(g.values.data() + std::size_t(j) * nz, nz, 1, grid.hz(), dg_y.data() + std::size_t(j) * nz, 1);
        }
        std::vector<cplx> col(nr);
        for (int k = 0; k < nz; ++k) {
            detail::diff_line(f.values.data() + k, nr, nz, grid.hr(), col.data(), 1);
            for (int j = 0; j < nr; ++j) df_x[std::size_t(j) * nz + k] = col[j];
            detail::diff_line(g.values.data() + k, nr, nz, grid.hr(), col.data(), 1);
            for (int j = 0; j < nr; ++j) dg_x[std::size_t(j) * nz + k] = col[j];
        }
    }
    auto& re = detail::scratch_buffer(n);
    std::vector<double> im(n);
    const double m2 = double(m) * double(m);
    for (std::size_t i = 0; i < n; ++i) {
        const NodeCoord p = grid.node(i);
        const double pot = (m != 0 && grid.kind() != GridKind::Cartesian2D) ? m2 / (p.r * p.r) : 0.0;
        const cplx t = grid.weight(i) *
                       (df_x[i] * std::conj(dg_x[i]) + df_y[i] * std::conj(dg_y[i]) +
                        (1.0 + pot) * f.values[i] * std::conj(g.values[i]));
        re[i] = t.real();
        im[i] = t.imag();
    }
    const double rsum = detail::pairwise_sum(re.data(), n);
    return cplx(rsum, detail::pairwise_sum(im.data(), n));
}

} // namespace cqnls
