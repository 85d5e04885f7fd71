// Discrete spatial operators on the radial / cylindrical grids.
//
// The radial Laplacian is the conservative (flux-form) discretization on the
// half-offset nodes r_j = (j+1/2)h:
//
//   (Δ_r u)_j = [ r_{j+1/2}(u_{j+1}-u_j) - r_{j-1/2}(u_j-u_{j-1}) ] / (r_j h^2)
//
// with r_{-1/2} = 0 (no flux through the axis) and homogeneous Dirichlet
// truncation u_n = 0 at r_max. It is self-adjoint w.r.t. the quadrature
// weights w_j ∝ r_j, which makes Crank-Nicolson exactly unitary on the
// discrete inner product and the gradient flow energy-diminishing.
//
// The z direction is cell-centered on [-z_max, z_max] with Dirichlet walls
// (ghost = -edge closure); DST-II diagonalizes it exactly, so cylindrical
// implicit solves reduce to one tridiagonal system per z mode.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "cqnls/fft.hpp"
#include "cqnls/geometry.hpp"

namespace cqnls {

// Prefactored Thomas algorithm for `nsys` independent tridiagonal systems of
// size n, system index fastest (layout [row*nsys + sys]). No pivoting: all
// systems here are strictly diagonally dominant.
template <class T>
class TridiagBatch {
public:
    TridiagBatch() = default;

    // sub/diag/sup: callables (row, sys) -> T; sub(0,·) and sup(n-1,·) unused
    template <class FS, class FD, class FU>
    static TridiagBatch factor(int n, int nsys, FS&& sub, FD&& diag, FU&& sup) {
        TridiagBatch f;
        f.n_ = n;
        f.nsys_ = nsys;
        f.sub_.resize(std::size_t(n) * nsys);
        f.cprime_.resize(std::size_t(n) * nsys);
        f.invd_.resize(std::size_t(n) * nsys);
        std::vector<T> prev(nsys, T(0));
        for (int i = 0; i < n; ++i) {
            for (int s = 0; s < nsys; ++s) {
                const std::size_t idx = std::size_t(i) * nsys + s;
                const T a = (i > 0) ? sub(i, s) : T(0);
                const T denom = diag(i, s) - a * prev[s];
                if (std::abs(denom) < 1e-300)
                    throw numeric_error("tridiag: singular or ill-conditioned system");
                f.sub_[idx] = a;
                f.invd_[idx] = T(1) / denom;
                const T c = (i < n - 1) ? sup(i, s) * f.invd_[idx] : T(0);
                f.cprime_[idx] = c;
                prev[s] = c;
            }
        }
        return f;
    }

    // rhs laid out [row*nsys + sys]; overwritten with the solution
    template <class U>
    void solve(U* rhs) const {
        for (int s = 0; s < nsys_; ++s) rhs[s] = rhs[s] * invd_[s];
        for (int i = 1; i < n_; ++i) {
            const std::size_t row = std::size_t(i) * nsys_;
            for (int s = 0; s < nsys_; ++s)
                rhs[row + s] = (rhs[row + s] - sub_[row + s] * rhs[row - nsys_ + s]) * invd_[row + s];
        }
        for (int i = n_ - 2; i >= 0; --i) {
            const std::size_t row = std::size_t(i) * nsys_;
            for (int s = 0; s < nsys_; ++s)
                rhs[row + s] -= cprime_[row + s] * rhs[row + nsys_ + s];
        }
    }

    int rows() const { return n_; }

private:
    int n_ = 0, nsys_ = 0;
    std::vector<T> sub_, cprime_, invd_;
};

namespace detail {

// flux-form radial coefficients: (Δ_r u)_j = sub_j u_{j-1} - (2/h^2) u_j + sup_j u_{j+1}
struct RadialCoeffs {
    int n = 0;
    double h = 0.0;
    std::vector<double> sub, sup;   // sub[0] = 0, sup[n-1] = 0 (Dirichlet)

    static RadialCoeffs build(int nr, double hr) {
        RadialCoeffs c;
        c.n = nr;
        c.h = hr;
        c.sub.resize(nr);
        c.sup.resize(nr);
        for (int j = 0; j < nr; ++j) {
            const double rj = (j + 0.5) * hr;
            c.sub[j] = (j > 0) ? (j * hr) / (rj * hr * hr) : 0.0;
            c.sup[j] = (j < nr - 1) ? ((j + 1) * hr) / (rj * hr * hr) : 0.0;
        }
        return c;
    }

    double diag() const { return -2.0 / (h * h); }
};

// DST-II eigenvalue of the cell-centered Dirichlet second difference:
// Δ_z v_p = -mu_p v_p, v_p(k) = sin((p+1) pi (k+1/2) / nz)
inline double dirichlet_mode_eigenvalue(int p, int nz, double hz) {
    const double s = std::sin(0.5 * M_PI * (p + 1) / nz);
    return 4.0 * s * s / (hz * hz);
}

template <class T>
void apply_laplacian_radial(const RadialCoeffs& c, const T* in, T* out) {
    const double d = c.diag();
    for (int j = 0; j < c.n; ++j) {
        T v = in[j] * d;
        if (j > 0) v += in[j - 1] * c.sub[j];
        if (j < c.n - 1) v += in[j + 1] * c.sup[j];
        out[j] = v;
    }
}

// cell-centered Dirichlet second difference along contiguous z-lines
template <class T>
void apply_laplacian_z(int nr, int nz, double hz, const T* in, T* out) {
    const double ih2 = 1.0 / (hz * hz);
    for (int j = 0; j < nr; ++j) {
        const T* u = in + std::size_t(j) * nz;
        T* v = out + std::size_t(j) * nz;
        for (int k = 0; k < nz; ++k) {
            T acc = u[k] * (-2.0 * ih2);
            // ghost = -edge keeps the wall value at zero
            acc += (k > 0 ? u[k - 1] : -u[0]) * ih2;
            acc += (k < nz - 1 ? u[k + 1] : -u[nz - 1]) * ih2;
            v[k] = acc;
        }
    }
}

} // namespace detail

// A = -1/2 Δ_h + m^2/(2 r^2) on radial / cylindrical grids.
class SpatialOperator {
public:
    SpatialOperator(const Grid& g, int m) : grid_(g), m_(m) {
        if (g.kind() == GridKind::Cartesian2D)
            throw error("SpatialOperator: radial or cylindrical grids only");
        radial_ = detail::RadialCoeffs::build(g.nr(), g.hr());
        potential_.resize(g.nr());
        for (int j = 0; j < g.nr(); ++j) {
            const double r = g.r(j);
            potential_[j] = 0.5 * double(m) * double(m) / (r * r);
        }
    }

    template <class T>
    void apply(const std::vector<T>& in, std::vector<T>& out) const {
        out.resize(in.size());
        if (grid_.kind() == GridKind::Radial2D) {
            detail::apply_laplacian_radial(radial_, in.data(), out.data());
            for (int j = 0; j < grid_.nr(); ++j)
                out[j] = in[j] * potential_[j] - out[j] * 0.5;
        } else {
            const int nr = grid_.nr(), nz = grid_.nz();
            std::vector<T> lz(in.size());
            detail::apply_laplacian_z(nr, nz, grid_.hz(), in.data(), lz.data());
            // radial part acts across lines: stride-nz gather per radius
            std::vector<T> line_in(nr), line_out(nr);
            for (int k = 0; k < nz; ++k) {
                for (int j = 0; j < nr; ++j) line_in[j] = in[std::size_t(j) * nz + k];
                detail::apply_laplacian_radial(radial_, line_in.data(), line_out.data());
                for (int j = 0; j < nr; ++j) {
                    const std::size_t idx = std::size_t(j) * nz + k;
                    out[idx] = in[idx] * potential_[j] - 0.5 * (line_out[j] + lz[idx]);
                }
            }
        }
    }

    // <A u, u>_w (real for self-adjoint A); this is the operator-consistent
    // discretization of 1/2||∇u||^2 + (m^2/2)∫|u|^2/r^2 used to monitor
    // energy descent of the flow
    double quadratic_form(const std::vector<cplx>& u) const {
        std::vector<cplx> au;
        apply(u, au);
        const std::size_t n = u.size();
        auto& terms = detail_scratch(n);
        for (std::size_t i = 0; i < n; ++i)
            terms[i] = grid_.weight(i) * (au[i] * std::conj(u[i])).real();
        return detail::pairwise_sum(terms.data(), n);
    }

    const Grid& grid() const { return grid_; }
    int m() const { return m_; }
    const detail::RadialCoeffs& radial_coeffs() const { return radial_; }
    double potential(int j) const { return potential_[j]; }

private:
    static std::vector<double>& detail_scratch(std::size_t n) { return detail::scratch_buffer(n); }

    Grid grid_;
    int m_;
    detail::RadialCoeffs radial_;
    std::vector<double> potential_;
};

// Prefactored solver for (I + tau A) x = rhs with A as above; the backbone
// of the semi-implicit normalized gradient flow. Real matrix, so complex
// right-hand sides are solved componentwise.
class GradientFlowSolver {
public:
    GradientFlowSolver(const Grid& g, int m, double tau) : op_(g, m), tau_(tau) {
        const auto& rc = op_.radial_coeffs();
        const int nr = g.nr();
        if (g.kind() == GridKind::Radial2D) {
            factor_ = TridiagBatch<double>::factor(
                nr, 1,
                [&](int j, int) { return -0.5 * tau * rc.sub[j]; },
                [&](int j, int) { return 1.0 + tau * (1.0 / (rc.h * rc.h) + op_.potential(j)); },
                [&](int j, int) { return -0.5 * tau * rc.sup[j]; });
        } else {
            const int nz = g.nz();
            mu_.resize(nz);
            for (int p = 0; p < nz; ++p) mu_[p] = detail::dirichlet_mode_eigenvalue(p, nz, g.hz());
            factor_ = TridiagBatch<double>::factor(
                nr, nz,
                [&](int j, int) { return -0.5 * tau * rc.sub[j]; },
                [&](int j, int p) {
                    return 1.0 + tau * (1.0 / (rc.h * rc.h) + op_.potential(j) + 0.5 * mu_[p]);
                },
                [&](int j, int) { return -0.5 * tau * rc.sup[j]; });
        }
    }

    // rhs -> (I + tau A)^{-1} rhs, in place
    void solve(std::vector<double>& rhs) {
        if (op_.grid().kind() == GridKind::Radial2D) {
            factor_.solve(rhs.data());
        } else {
            const int nz = op_.grid().nz(), nr = op_.grid().nr();
            FftEngine::instance().dst2(nz, nr, rhs.data());
            factor_.solve(rhs.data());
            FftEngine::instance().dst3(nz, nr, rhs.data());
            const double s = 1.0 / (2.0 * nz);
            for (auto& v : rhs) v *= s;
        }
    }

    void solve(std::vector<cplx>& rhs) {
        const std::size_t n = rhs.size();
        re_.resize(n);
        im_.resize(n);
        for (std::size_t i = 0; i < n; ++i) { re_[i] = rhs[i].real(); im_[i] = rhs[i].imag(); }
        solve(re_);
        solve(im_);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = cplx(re_[i], im_[i]);
    }

    const SpatialOperator& op() const { return op_; }
    double tau() const { return tau_; }

private:
    SpatialOperator op_;
    double tau_;
    TridiagBatch<double> factor_;
    std::vector<double> mu_, re_, im_;
};

// Exact Cayley step of the kinetic flow i ∂_t u = -1/2 Δ u over dt:
//   u <- (I - i dt/4 Δ)^{-1} (I + i dt/4 Δ) u
// Unitary on the discrete weighted inner product; the m^2/(2r^2) potential
// is handled in the pointwise phase substep, not here.
class CrankNicolsonKinetic {
public:
    CrankNicolsonKinetic(const Grid& g, double dt)
        : grid_(g), dt_(dt), radial_(detail::RadialCoeffs::build(g.nr(), g.hr())) {
        if (g.kind() == GridKind::Cartesian2D)
            throw error("CrankNicolsonKinetic: radial or cylindrical grids only");
        const cplx a(0.0, 0.25 * dt);
        const int nr = g.nr();
        if (g.kind() == GridKind::Radial2D) {
            factor_ = TridiagBatch<cplx>::factor(
                nr, 1,
                [&](int j, int) { return -a * radial_.sub[j]; },
                [&](int j, int) { return cplx(1.0, 0.0) - a * radial_.diag(); },
                [&](int j, int) { return -a * radial_.sup[j]; });
        } else {
            const int nz = g.nz();
            mu_.resize(nz);
            for (int p = 0; p < nz; ++p) mu_[p] = detail::dirichlet_mode_eigenvalue(p, nz, g.hz());
            factor_ = TridiagBatch<cplx>::factor(
                nr, nz,
                [&](int j, int) { return -a * radial_.sub[j]; },
                [&](int j, int p) { return cplx(1.0, 0.0) - a * (radial_.diag() - mu_[p]); },
                [&](int j, int) { return -a * radial_.sup[j]; });
        }
    }

    void step(std::vector<cplx>& u) {
        const std::size_t n = u.size();
        // rhs = (I + i dt/4 Δ) u, assembled in real space
        rhs_.resize(n);
        if (grid_.kind() == GridKind::Radial2D) {
            detail::apply_laplacian_radial(radial_, u.data(), rhs_.data());
            const cplx a(0.0, 0.25 * dt_);
            for (std::size_t i = 0; i < n; ++i) rhs_[i] = u[i] + a * rhs_[i];
            factor_.solve(rhs_.data());
        } else {
            const int nr = grid_.nr(), nz = grid_.nz();
            std::vector<cplx> lap(n);
            laplacian_cyl(u, lap);
            const cplx a(0.0, 0.25 * dt_);
            for (std::size_t i = 0; i < n; ++i) rhs_[i] = u[i] + a * lap[i];
            dst_complex(rhs_, true);
            factor_.solve(rhs_.data());
            dst_complex(rhs_, false);
            const double s = 1.0 / (2.0 * nz);
            for (auto& v : rhs_) v *= s;
            (void)nr;
        }
        u = rhs_;
    }

    // full Δ = Δ_r + Δ_z on the cylinder
    void laplacian_cyl(const std::vector<cplx>& in, std::vector<cplx>& out) const {
        const int nr = grid_.nr(), nz = grid_.nz();
        detail::apply_laplacian_z(nr, nz, grid_.hz(), in.data(), out.data());
        std::vector<cplx> li(nr), lo(nr);
        for (int k = 0; k < nz; ++k) {
            for (int j = 0; j < nr; ++j) li[j] = in[std::size_t(j) * nz + k];
            detail::apply_laplacian_radial(radial_, li.data(), lo.data());
            for (int j = 0; j < nr; ++j) out[std::size_t(j) * nz + k] += lo[j];
        }
    }

private:
    void dst_complex(std::vector<cplx>& v, bool forward) {
        const int nr = grid_.nr(), nz = grid_.nz();
        const std::size_t n = v.size();
        re_.resize(n);
        im_.resize(n);
        for (std::size_t i = 0; i < n; ++i) { re_[i] = v[i].real(); im_[i] = v[i].imag(); }
        if (forward) {
            FftEngine::instance().dst2(nz, nr, re_.data());
            FftEngine::instance().dst2(nz, nr, im_.data());
        } else {
            FftEngine::instance().dst3(nz, nr, re_.data());
            FftEngine::instance().dst3(nz, nr, im_.data());
        }
        for (std::size_t i = 0; i < n; ++i) v[i] = cplx(re_[i], im_[i]);
    }

    Grid grid_;
    double dt_;
    detail::RadialCoeffs radial_;
    TridiagBatch<cplx> factor_;
    std::vector<double> mu_, re_, im_;
    std::vector<cplx> rhs_;
};

} // namespace cqnls
