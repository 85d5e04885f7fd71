// Computational geometries: periodic 2D box, 2D radial disc, 3D cylinder.
// Nodes, quadrature weights and discrete field arithmetic live here.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqnls {

using cplx = std::complex<double>;

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// configuration / usage problems (CLI exit code 1)
struct config_error : error {
    using error::error;
};

// solver breakdowns: non-convergence, singular systems, NaN (CLI exit code 2)
struct numeric_error : error {
    using error::error;
};

enum class GridKind { Cartesian2D, Radial2D, Cylindrical3D };

struct CartesianSpec { int nx; int ny; double Lx; double Ly; };
struct RadialSpec { int nr; double r_max; };
struct CylindricalSpec { int nr; int nz; double r_max; double z_max; };

struct NodeCoord {
    double x = 0.0;   // first Cartesian coordinate (equals r on radial grids)
    double y = 0.0;   // second Cartesian coordinate
    double z = 0.0;   // axial coordinate (cylindrical only)
    double r = 0.0;   // cylindrical radius sqrt(x1^2 + x2^2)
};

// Immutable geometry descriptor. Radial nodes sit at r_j = (j+1/2)h so the
// inverse-square potential is finite at every node; the z grid is
// cell-centered on [-z_max, z_max] with homogeneous Dirichlet walls.
class Grid {
public:
    Grid() = default;

    static Grid cartesian(int nx, int ny, double Lx, double Ly) {
        require(nx >= 8 && ny >= 8, "Cartesian2D needs nx, ny >= 8");
        require(Lx > 0.0 && Ly > 0.0, "Cartesian2D needs positive box lengths");
        Grid g;
        g.kind_ = GridKind::Cartesian2D;
        g.nx_ = nx; g.ny_ = ny; g.Lx_ = Lx; g.Ly_ = Ly;
        return g;
    }

    static Grid radial(int nr, double r_max) {
        require(nr >= 8, "Radial2D needs nr >= 8 to resolve the half-cell rule");
        require(r_max > 0.0, "Radial2D needs positive r_max");
        Grid g;
        g.kind_ = GridKind::Radial2D;
        g.nr_ = nr; g.r_max_ = r_max;
        return g;
    }

    static Grid cylindrical(int nr, int nz, double r_max, double z_max) {
        require(nr >= 8 && nz >= 8, "Cylindrical3D needs nr, nz >= 8");
        require(r_max > 0.0 && z_max > 0.0, "Cylindrical3D needs positive extents");
        Grid g;
        g.kind_ = GridKind::Cylindrical3D;
        g.nr_ = nr; g.nz_ = nz; g.r_max_ = r_max; g.z_max_ = z_max;
        return g;
    }

    GridKind kind() const { return kind_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nr() const { return nr_; }
    int nz() const { return nz_; }
    double Lx() const { return Lx_; }
    double Ly() const { return Ly_; }
    double r_max() const { return r_max_; }
    double z_max() const { return z_max_; }

    double hx() const { return Lx_ / nx_; }
    double hy() const { return Ly_ / ny_; }
    double hr() const { return r_max_ / nr_; }
    double hz() const { return 2.0 * z_max_ / nz_; }

    // box coordinates are centered: x_i = -Lx/2 + i*hx, so vortices sit at
    // the origin and |x| has its usual meaning in variance / angular momentum
    double x(int i) const { return -0.5 * Lx_ + i * hx(); }
    double y(int j) const { return -0.5 * Ly_ + j * hy(); }
    double r(int j) const { return (j + 0.5) * hr(); }
    double z(int k) const { return -z_max_ + (k + 0.5) * hz(); }

    std::size_t size() const {
        switch (kind_) {
            case GridKind::Cartesian2D: return std::size_t(nx_) * ny_;
            case GridKind::Radial2D: return std::size_t(nr_);
            case GridKind::Cylindrical3D: return std::size_t(nr_) * nz_;
        }
        return 0;
    }

    // node ordering: Cartesian idx = ix + nx*iy; cylindrical idx = k + nz*j
    // (z fastest, one contiguous z-line per radius)
    NodeCoord node(std::size_t idx) const {
        NodeCoord p;
        switch (kind_) {
            case GridKind::Cartesian2D: {
                const int ix = int(idx % nx_), iy = int(idx / nx_);
                p.x = x(ix); p.y = y(iy);
                p.r = std::hypot(p.x, p.y);
                break;
            }
            case GridKind::Radial2D: {
                p.r = r(int(idx)); p.x = p.r;
                break;
            }
            case GridKind::Cylindrical3D: {
                const int k = int(idx % nz_), j = int(idx / nz_);
                p.r = r(j); p.x = p.r; p.z = z(k);
                break;
            }
        }
        return p;
    }

    // quadrature weight of node idx: dx dy, 2*pi*r dr, or 2*pi*r dr dz
    double weight(std::size_t idx) const {
        switch (kind_) {
            case GridKind::Cartesian2D: return hx() * hy();
            case GridKind::Radial2D: return 2.0 * M_PI * r(int(idx)) * hr();
            case GridKind::Cylindrical3D: {
                const int j = int(idx / nz_);
                return 2.0 * M_PI * r(j) * hr() * hz();
            }
        }
        return 0.0;
    }

    int dimension() const { return kind_ == GridKind::Cylindrical3D ? 3 : 2; }

    bool operator==(const Grid&) const = default;

private:
    static void require(bool ok, const char* what) {
        if (!ok) throw config_error(std::string("make_grid: ") + what);
    }

    GridKind kind_ = GridKind::Radial2D;
    int nx_ = 0, ny_ = 0, nr_ = 0, nz_ = 0;
    double Lx_ = 0, Ly_ = 0, r_max_ = 0, z_max_ = 0;
};

inline Grid make_grid(const CartesianSpec& s) { return Grid::cartesian(s.nx, s.ny, s.Lx, s.Ly); }
inline Grid make_grid(const RadialSpec& s) { return Grid::radial(s.nr, s.r_max); }
inline Grid make_grid(const CylindricalSpec& s) { return Grid::cylindrical(s.nr, s.nz, s.r_max, s.z_max); }

// Discrete complex field bound to a grid. Value-semantic; every public
// operation leaves all samples finite.
struct WaveField {
    Grid grid;
    int m = 0;                 // vortex index (radial / cylindrical ansatz)
    std::vector<cplx> values;

    WaveField() = default;
    WaveField(const Grid& g, int m_ = 0) : grid(g), m(m_), values(g.size(), cplx(0.0, 0.0)) {}

    std::size_t size() const { return values.size(); }
};

inline void check_finite(const WaveField& f, const char* where) {
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const cplx v = f.values[i];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw numeric_error(std::string(where) + ": non-finite sample at node " + std::to_string(i));
    }
}

namespace detail {

// Fixed-tree pairwise reduction: the range is halved recursively down to
// blocks of <= 8 summed left to right. The tree depends only on n, so the
// result is bit-identical across runs regardless of chunking.
inline double pairwise_sum(const double* a, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

inline std::vector<double>& scratch_buffer(std::size_t n) {
    thread_local std::vector<double> buf;
    buf.resize(n);
    return buf;
}

} // namespace detail

// Sum_j w_j * integrand(u_j, node_j) with the deterministic pairwise tree.
// integrand: (cplx value, const NodeCoord&) -> double
template <class F>
double quadrature(const WaveField& f, F&& integrand) {
    const std::size_t n = f.size();
    auto& terms = detail::scratch_buffer(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = integrand(f.values[i], f.grid.node(i));
        if (!std::isfinite(g))
            throw numeric_error("quadrature: non-finite integrand at node " + std::to_string(i));
        terms[i] = f.grid.weight(i) * g;
    }
    return detail::pairwise_sum(terms.data(), n);
}

// Gaussian seed A r^|m| exp(-r^2/(2 sigma^2)) (times exp(i m theta) on the
// Cartesian grid, and with r^2 -> r^2 + z^2 on the cylinder). Respects the
// r^|m| vanishing forced by the centrifugal term.
inline WaveField seed_field(const Grid& grid, int m, double amplitude, double sigma) {
    if (amplitude <= 0.0) throw config_error("seed_field: amplitude must be positive");
    if (sigma <= 0.0) throw config_error("seed_field: sigma must be positive");
    WaveField f(grid, m);
    const double mu = std::abs(double(m));
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const NodeCoord p = grid.node(i);
        const double rpow = (m == 0) ? 1.0 : std::pow(p.r, mu);
        switch (grid.kind()) {
            case GridKind::Cartesian2D: {
                const double theta = std::atan2(p.y, p.x);
                f.values[i] = amplitude * rpow * std::exp(-p.r * p.r * inv2s2) *
                              std::exp(cplx(0.0, m * theta));
                break;
            }
            case GridKind::Radial2D:
                f.values[i] = amplitude * rpow * std::exp(-p.r * p.r * inv2s2);
                break;
            case GridKind::Cylindrical3D:
                f.values[i] = amplitude * rpow * std::exp(-(p.r * p.r + p.z * p.z) * inv2s2);
                break;
        }
    }
    check_finite(f, "seed_field");
    return f;
}

inline void require_same_grid(const WaveField& a, const WaveField& b, const char* where) {
    if (!(a.grid == b.grid))
        throw error(std::string(where) + ": fields live on different grids");
}

// alpha*x + beta*y, elementwise
inline WaveField axpy(cplx alpha, const WaveField& x, cplx beta, const WaveField& y) {
    require_same_grid(x, y, "axpy");
    WaveField out(x.grid, x.m);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = alpha * x.values[i] + beta * y.values[i];
    check_finite(out, "axpy");
    return out;
}

inline WaveField scale(const WaveField& x, cplx alpha) {
    WaveField out(x.grid, x.m);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = alpha * x.values[i];
    check_finite(out, "scale");
    return out;
}

// Rescale so the discrete mass Sum w |u|^2 equals rho.
inline WaveField normalize_mass(const WaveField& x, double rho) {
    if (rho <= 0.0) throw config_error("normalize_mass: rho must be positive");
    const double m0 = quadrature(x, [](cplx v, const NodeCoord&) { return std::norm(v); });
    if (m0 <= 0.0) throw numeric_error("normalize_mass: zero field has no mass to rescale");
    return scale(x, std::sqrt(rho / m0));
}

// Linear resampling onto another grid of the same kind (clamped at the
// axis, zero beyond the source domain). Used to warm-start fine solves
// from coarse ones.
inline WaveField interpolate_onto(const WaveField& src, const Grid& dst) {
    if (src.grid.kind() != dst.kind())
        throw error("interpolate_onto: grid kinds differ");
    WaveField out(dst, src.m);
    const Grid& g = src.grid;
    auto sample_radial = [&](double r) -> cplx {
        const double t = r / g.hr() - 0.5;
        if (t >= g.nr() - 1) return 0.0;
        const int j0 = std::max(0, int(std::floor(t)));
        const double s = std::clamp(t - j0, 0.0, 1.0);
        return src.values[j0] * (1.0 - s) + src.values[j0 + 1] * s;
    };
    switch (g.kind()) {
        case GridKind::Radial2D:
            for (int j = 0; j < dst.nr(); ++j) out.values[j] = sample_radial(dst.r(j));
            break;
        case GridKind::Cylindrical3D:
            for (int j = 0; j < dst.nr(); ++j) {
                const double t = dst.r(j) / g.hr() - 0.5;
                if (t >= g.nr() - 1) continue;
                const int j0 = std::max(0, int(std::floor(t)));
                const double sr = std::clamp(t - j0, 0.0, 1.0);
                for (int k = 0; k < dst.nz(); ++k) {
                    const double u = (dst.z(k) + g.z_max()) / g.hz() - 0.5;
                    if (u <= 0.0 || u >= g.nz() - 1) continue;
                    const int k0 = int(std::floor(u));
                    const double sz = u - k0;
                    auto at = [&](int jj, int kk) { return src.values[std::size_t(jj) * g.nz() + kk]; };
                    out.values[std::size_t(j) * dst.nz() + k] =
                        (1.0 - sr) * ((1.0 - sz) * at(j0, k0) + sz * at(j0, k0 + 1)) +
                        sr * ((1.0 - sz) * at(j0 + 1, k0) + sz * at(j0 + 1, k0 + 1));
                }
            }
            break;
        case GridKind::Cartesian2D:
            throw error("interpolate_onto: Cartesian resampling not supported");
    }
    check_finite(out, "interpolate_onto");
    return out;
}

// Mass fraction carried by the outermost cell layer; the paper gives no
// decay rate for minimizers, so domain adequacy is checked a posteriori
// against this diagnostic (should stay below ~1e-8).
inline double boundary_mass_fraction(const WaveField& f) {
    double total = 0.0, edge = 0.0;
    const Grid& g = f.grid;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = g.weight(i) * std::norm(f.values[i]);
        total += t;
        bool on_edge = false;
        switch (g.kind()) {
            case GridKind::Cartesian2D: {
                const int ix = int(i % g.nx()), iy = int(i / g.nx());
                on_edge = ix == 0 || iy == 0 || ix == g.nx() - 1 || iy == g.ny() - 1;
                break;
            }
            case GridKind::Radial2D:
                on_edge = int(i) == g.nr() - 1;
                break;
            case GridKind::Cylindrical3D: {
                const int k = int(i % g.nz()), j = int(i / g.nz());
                on_edge = j == g.nr() - 1 || k == 0 || k == g.nz() - 1;
                break;
            }
        }
        if (on_edge) edge += t;
    }
    return total > 0.0 ? edge / total : 0.0;
}

} // namespace cqnls
