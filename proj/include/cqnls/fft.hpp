// Thin RAII wrappers around FFTW: 2D complex transforms for the periodic
// box and batched DST-II/III for the cell-centered Dirichlet z-direction.
// Plans are created with FFTW_ESTIMATE so repeated runs pick identical
// plans and replays stay bit-identical.
#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "cqnls/geometry.hpp"

namespace cqnls {

class FftEngine {
public:
    static FftEngine& instance() {
        static FftEngine engine;
        return engine;
    }

    // in-place unnormalized 2D transforms; layout idx = ix + nx*iy
    void forward2d(int nx, int ny, cplx* data) { exec2d(nx, ny, data, FFTW_FORWARD); }
    void backward2d(int nx, int ny, cplx* data) { exec2d(nx, ny, data, FFTW_BACKWARD); }

    // batched in-place DST on `howmany` contiguous real lines of length n.
    // DST-II diagonalizes the cell-centered Dirichlet second difference
    // (ghost = -edge closure); DST-III composed after DST-II gives 2n * id.
    void dst2(int n, int howmany, double* data) { execdst(n, howmany, data, FFTW_RODFT10); }
    void dst3(int n, int howmany, double* data) { execdst(n, howmany, data, FFTW_RODFT01); }

    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

private:
    FftEngine() = default;
    ~FftEngine() {
        for (auto& [key, plan] : plans2d_) fftw_destroy_plan(plan);
        for (auto& [key, plan] : plansdst_) fftw_destroy_plan(plan);
    }

    void exec2d(int nx, int ny, cplx* data, int sign) {
        auto key = std::make_tuple(nx, ny, sign);
        auto it = plans2d_.find(key);
        if (it == plans2d_.end()) {
            // transforms are planned once per shape on a scratch buffer;
            // FFTW_UNALIGNED lets the plan run on any caller array
            std::vector<cplx> scratch(std::size_t(nx) * ny);
            fftw_plan p = fftw_plan_dft_2d(ny, nx,
                                           reinterpret_cast<fftw_complex*>(scratch.data()),
                                           reinterpret_cast<fftw_complex*>(scratch.data()),
                                           sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
            if (!p) throw numeric_error("fft: planning failed");
            it = plans2d_.emplace(key, p).first;
        }
        fftw_execute_dft(it->second, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }

    void execdst(int n, int howmany, double* data, fftw_r2r_kind kind) {
        auto key = std::make_tuple(n, howmany, int(kind));
        auto it = plansdst_.find(key);
        if (it == plansdst_.end()) {
            std::vector<double> scratch(std::size_t(n) * howmany);
            fftw_plan p = fftw_plan_many_r2r(1, &n, howmany,
                                             scratch.data(), nullptr, 1, n,
                                             scratch.data(), nullptr, 1, n,
                                             &kind, FFTW_ESTIMATE | FFTW_UNALIGNED);
            if (!p) throw numeric_error("fft: DST planning failed");
            it = plansdst_.emplace(key, p).first;
        }
        fftw_execute_r2r(it->second, data, data);
    }

    std::map<std::tuple<int, int, int>, fftw_plan> plans2d_;
    std::map<std::tuple<int, int, int>, fftw_plan> plansdst_;
};

// Fourier wavenumber of index i on an n-point periodic grid of length L.
inline double wavenumber(int i, int n, double L) {
    const int k = (i <= n / 2) ? i : i - n;
    return 2.0 * M_PI * k / L;
}

// Spectral partial derivatives on the periodic box. The Nyquist mode has no
// well-defined sign of k, so its derivative is set to zero (keeps gradients
// of real fields real).
inline void spectral_gradient(const WaveField& u, WaveField& dx, WaveField& dy) {
    const Grid& g = u.grid;
    if (g.kind() != GridKind::Cartesian2D)
        throw error("spectral_gradient: needs a Cartesian2D field");
    const int nx = g.nx(), ny = g.ny();
    const double norm = 1.0 / (double(nx) * ny);
    dx = u; dy = u;
    FftEngine::instance().forward2d(nx, ny, dx.values.data());
    dy.values = dx.values;
    for (int iy = 0; iy < ny; ++iy) {
        const double ky = (2 * iy == ny) ? 0.0 : wavenumber(iy, ny, g.Ly());
        for (int ix = 0; ix < nx; ++ix) {
            const double kx = (2 * ix == nx) ? 0.0 : wavenumber(ix, nx, g.Lx());
            const std::size_t idx = std::size_t(ix) + std::size_t(nx) * iy;
            const cplx v = dx.values[idx];
            dx.values[idx] = cplx(0.0, kx) * v * norm;
            dy.values[idx] = cplx(0.0, ky) * v * norm;
        }
    }
    FftEngine::instance().backward2d(nx, ny, dx.values.data());
    FftEngine::instance().backward2d(nx, ny, dy.values.data());
}

} // namespace cqnls
