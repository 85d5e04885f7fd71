// Mass-constrained minimization of the vortex energy E_m by a semi-implicit
// normalized gradient flow, the auxiliary cubic ground state Q_m by
// shooting, and the existence thresholds rho_*.
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cqnls/functionals.hpp"
#include "cqnls/geometry.hpp"
#include "cqnls/numeric.hpp"
#include "cqnls/operators.hpp"

namespace cqnls {

struct FlowOptions {
    double dtau = 0.05;        // fictitious time step (halved on energy increase)
    double tol = 1e-10;        // stop when sup|Δψ|/dτ falls below
    long max_iter = 200000;
    double dtau_min = 1e-12;
    double seed_amplitude = 1.0;
    double seed_sigma = 0.0;   // 0 -> auto from rho and domain
    int trace_stride = 200;
};

struct IterationSample {
    long iter;
    double energy;   // operator-consistent discrete E_m
    double update;   // sup|Δψ|/dτ
};

struct GroundStateResult {
    WaveField psi;                    // converged profile, real and nonnegative
    double omega = 0.0;               // Lagrange multiplier from the first Pohozaev identity
    double rho = 0.0;
    double e_value = 0.0;             // E_m(psi) via the public functionals
    long iterations = 0;
    double final_update = 0.0;
    double residual = 0.0;            // sup-norm of the discrete Euler-Lagrange residual
    double boundary_mass = 0.0;       // domain adequacy diagnostic
    bool converged = false;
    bool subcritical_warning = false; // e_value >= 0: existence not guaranteed
    std::vector<IterationSample> trace;
};

// non-convergence carries the partial result (iteration trace included)
struct convergence_error : numeric_error {
    convergence_error(const std::string& msg, GroundStateResult partial_result)
        : numeric_error(msg), partial(std::move(partial_result)) {}
    GroundStateResult partial;
};

namespace detail {

inline double weighted_sum_real(const Grid& g, const std::vector<double>& vals) {
    std::vector<double> terms(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) terms[i] = g.weight(i) * vals[i];
    return pairwise_sum(terms.data(), terms.size());
}

inline double mass_real(const Grid& g, const std::vector<double>& psi) {
    std::vector<double> sq(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) sq[i] = psi[i] * psi[i];
    return weighted_sum_real(g, sq);
}

} // namespace detail

// One owner per solve: holds the prefactored implicit operator and the
// energy monitor. The discrete energy used for the descent guard is the
// operator-consistent one, <A psi, psi>_w - 1/2 Σ w psi^4 + 2/5 Σ w |psi|^5,
// i.e. exactly the Lyapunov functional of the semi-implicit update.
class GroundStateFlow {
public:
    GroundStateFlow(const Grid& g, int m, double rho, const FlowOptions& opts)
        : grid_(g), m_(m), rho_(rho), opts_(opts), op_(g, m) {
        rebuild(opts.dtau);
    }

    double energy_discrete(const std::vector<double>& psi) const {
        std::vector<double> apsi;
        op_.apply(psi, apsi);
        std::vector<double> dens(psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const double s = std::abs(psi[i]);
            dens[i] = apsi[i] * psi[i] - 0.5 * s * s * s * s + 0.4 * s * s * s * s * s;
        }
        return detail::weighted_sum_real(grid_, dens);
    }

    // one accepted semi-implicit step with mass renormalization; returns
    // sup|Δψ|/dτ. Halves dτ whenever the monitored energy increases.
    //
    // The right-hand side carries the current multiplier estimate,
    //   (I + dτ A) ψ* = ψ + dτ (|ψ|^2ψ - |ψ|^3ψ - ω_n ψ),
    //   ω_n = <|ψ|^2ψ - |ψ|^3ψ - Aψ, ψ>_w / M,
    // which makes the discrete Euler-Lagrange solution an exact fixed point
    // (a plain renormalized step would leave an O(dτ) bias in the residual).
    double step(std::vector<double>& psi) {
        op_.apply(psi, apsi_);
        nl_.resize(psi.size());
        std::vector<double> proj(psi.size()), edens(psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const double v = psi[i], s = std::abs(v);
            nl_[i] = s * s * v - s * s * s * v;
            proj[i] = (nl_[i] - apsi_[i]) * v;
            edens[i] = apsi_[i] * v - 0.5 * s * s * s * s + 0.4 * s * s * s * s * s;
        }
        const double omega_n = detail::weighted_sum_real(grid_, proj) / rho_;
        const double e_here = detail::weighted_sum_real(grid_, edens);
        if (!have_energy_) {
            energy_prev_ = e_here;
            have_energy_ = true;
        }
        // descent slack: the 1e-12 trigger plus the roundoff floor of the
        // discrete kinetic energy (eps * rho / h^2 scale); without the floor
        // the guard misfires on evaluation noise once the flow has converged
        const double hmin = grid_.kind() == GridKind::Cylindrical3D ? std::min(grid_.hr(), grid_.hz()) : grid_.hr();
        const double slack = 1e-12 * std::max(1.0, std::abs(energy_prev_)) + 1e-15 * rho_ / (hmin * hmin);
        while (true) {
            work_.resize(psi.size());
            for (std::size_t i = 0; i < psi.size(); ++i)
                work_[i] = psi[i] + dtau_ * (nl_[i] - omega_n * psi[i]);
            solver_->solve(work_);
            const double mnew = detail::mass_real(grid_, work_);
            if (!(mnew > 0.0) || !std::isfinite(mnew))
                throw numeric_error("gradient flow: lost the iterate (zero or non-finite mass)");
            const double c = std::sqrt(rho_ / mnew);
            for (auto& v : work_) v *= c;
            const double e = energy_discrete(work_);
            if (e <= energy_prev_ + slack) {
                double sup = 0.0;
                for (std::size_t i = 0; i < psi.size(); ++i)
                    sup = std::max(sup, std::abs(work_[i] - psi[i]));
                psi.swap(work_);
                energy_prev_ = e;
                // recover toward the configured dtau after a quiet stretch
                if (dtau_ < opts_.dtau && ++accepted_streak_ >= 200) {
                    accepted_streak_ = 0;
                    rebuild(std::min(2.0 * dtau_, opts_.dtau));
                }
                return sup / dtau_;
            }
            accepted_streak_ = 0;
            if (dtau_ * 0.5 < opts_.dtau_min)
                throw numeric_error("gradient flow: dtau underflow while enforcing energy descent");
            rebuild(dtau_ * 0.5);
        }
    }

    double dtau() const { return dtau_; }
    double energy_last() const { return energy_prev_; }
    const SpatialOperator& op() const { return op_; }

private:
    void rebuild(double tau) {
        dtau_ = tau;
        solver_ = std::make_unique<GradientFlowSolver>(grid_, m_, tau);
    }

    Grid grid_;
    int m_;
    double rho_;
    FlowOptions opts_;
    SpatialOperator op_;
    std::unique_ptr<GradientFlowSolver> solver_;
    double dtau_ = 0.0;
    double energy_prev_ = 0.0;
    bool have_energy_ = false;
    long accepted_streak_ = 0;
    std::vector<double> work_, apsi_, nl_;
};

// omega from the first Pohozaev identity rearranged:
//   omega = (||psi||_{L4}^4 - ||psi||_{L5}^5 - 1/2 ||psi||_{Hdot1m}^2) / ||psi||^2
inline double extract_omega(const WaveField& psi, int m) {
    const double M = mass(psi);
    if (M <= 0.0) throw numeric_error("extract_omega: field has zero mass");
    const double l4 = quadrature(psi, [](cplx v, const NodeCoord&) {
        const double a = std::norm(v);
        return a * a;
    });
    const double l5 = quadrature(psi, [](cplx v, const NodeCoord&) {
        const double a = std::abs(v);
        return a * a * a * a * a;
    });
    const double hdot = grad_norm_sq(psi) + 2.0 * centrifugal(psi, m);
    return (l4 - l5 - 0.5 * hdot) / M;
}

// independent route: project the discrete Euler-Lagrange operator on psi,
//   omega_R = -<A psi + f(psi), psi>_w / M.
// Agrees with extract_omega up to the solver residual plus the O(h^2) gap
// between the flux-form and centered-difference kinetic terms.
inline double omega_rayleigh(const WaveField& psi, int m) {
    const double M = mass(psi);
    if (M <= 0.0) throw numeric_error("omega_rayleigh: field has zero mass");
    SpatialOperator A(psi.grid, m);
    std::vector<cplx> apsi;
    A.apply(psi.values, apsi);
    std::vector<double> terms(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const cplx s = apsi[i] + nonlinearity(psi.values[i]);
        terms[i] = psi.grid.weight(i) * (s * std::conj(psi.values[i])).real();
    }
    return -detail::pairwise_sum(terms.data(), terms.size()) / M;
}

// sup-norm of A psi + f(psi) + omega psi (zero for an exact discrete solution)
inline double el_residual_supnorm(const WaveField& psi, int m, double omega) {
    SpatialOperator A(psi.grid, m);
    std::vector<cplx> apsi;
    A.apply(psi.values, apsi);
    double sup = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i)
        sup = std::max(sup, std::abs(apsi[i] + nonlinearity(psi.values[i]) + omega * psi.values[i]));
    return sup;
}

// Single flow step on a (possibly complex) field; same multiplier-augmented
// update as the solver loop.
inline WaveField gradient_flow_step(const WaveField& psi, int m, double rho, double dtau) {
    if (dtau <= 0.0) throw config_error("gradient_flow_step: dtau must be positive");
    const double omega_n = omega_rayleigh(psi, m);
    GradientFlowSolver solver(psi.grid, m, dtau);
    WaveField out(psi.grid, m);
    out.values = psi.values;
    for (auto& v : out.values)
        v += dtau * (std::norm(v) * v - std::abs(v) * std::norm(v) * v - omega_n * v);
    solver.solve(out.values);
    out = normalize_mass(out, rho);
    check_finite(out, "gradient_flow_step");
    return out;
}

inline double auto_seed_sigma(const Grid& g, double rho) {
    const double droplet = std::max(1.0, std::sqrt(rho / M_PI));
    const double cap = 0.25 * (g.kind() == GridKind::Cylindrical3D ? std::min(g.r_max(), g.z_max()) : g.r_max());
    return std::min(droplet, cap);
}

inline GroundStateResult solve_ground_state(const Grid& grid, int m, double rho,
                                            const FlowOptions& opts = {},
                                            const WaveField* warm_start = nullptr) {
    if (rho <= 0.0) throw config_error("solve_ground_state: rho must be positive");
    if (grid.kind() == GridKind::Cartesian2D)
        throw config_error("solve_ground_state: radial or cylindrical grids only");

    std::vector<double> psi(grid.size());
    if (warm_start) {
        if (warm_start->grid != grid) throw config_error("solve_ground_state: warm start grid mismatch");
        WaveField w = normalize_mass(*warm_start, rho);
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::abs(w.values[i]);
        const double mm = detail::mass_real(grid, psi);
        const double c = std::sqrt(rho / mm);
        for (auto& v : psi) v *= c;
    } else {
        const double sigma = opts.seed_sigma > 0.0 ? opts.seed_sigma : auto_seed_sigma(grid, rho);
        WaveField seed = normalize_mass(seed_field(grid, m, opts.seed_amplitude, sigma), rho);
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = seed.values[i].real();
    }

    GroundStateFlow flow(grid, m, rho, opts);
    GroundStateResult res;
    res.rho = rho;
    double update = std::numeric_limits<double>::infinity();
    long iter = 0;
    for (iter = 1; iter <= opts.max_iter; ++iter) {
        update = flow.step(psi);
        if (iter % opts.trace_stride == 0)
            res.trace.push_back({iter, flow.energy_last(), update});
        if (update < opts.tol) break;
    }
    res.iterations = std::min(iter, opts.max_iter);
    res.final_update = update;
    res.trace.push_back({res.iterations, flow.energy_last(), update});
    res.converged = update < opts.tol;

    // minimizers can be chosen nonnegative (E_m(psi) = E_m(|psi|)); fix the phase
    WaveField out(grid, m);
    for (std::size_t i = 0; i < psi.size(); ++i) out.values[i] = cplx(std::abs(psi[i]), 0.0);
    res.psi = out;
    res.omega = extract_omega(out, m);
    res.e_value = energy(out, m, true).total;
    res.residual = el_residual_supnorm(out, m, omega_rayleigh(out, m));
    res.boundary_mass = boundary_mass_fraction(out);
    res.subcritical_warning = res.e_value >= 0.0;

    if (!res.converged)
        throw convergence_error("solve_ground_state: no convergence after " +
                                    std::to_string(opts.max_iter) + " iterations (last update " +
                                    std::to_string(update) + ")",
                                std::move(res));
    return res;
}

// ----------------------------------------------------------------------------
// Q_m: positive ground state of -1/2 ΔQ + (1 + m^2/(2 r^2)) Q - Q^3 = 0 in 2D,
// solved by shooting on the near-axis amplitude Q ~ a r^|m|.
// ----------------------------------------------------------------------------

struct QmShootOptions {
    double h = 5e-4;              // RK4 mesh spacing
    double r_end = 16.0;
    double a_min = 0.05, a_max = 64.0;
    double tail_threshold = 1e-9; // tail truncation level for the mass integral
    int max_bisect = 200;
};

struct QmResult {
    WaveField field;      // sampled on the caller grid (zero beyond the tail cut)
    double mass = 0.0;    // ||Q_m||^2 from the fine shooting mesh
    double amplitude = 0.0;
    double residual_sup = 0.0;
    double r_cut = 0.0;
};

namespace detail {

struct ShootTrajectory {
    enum class Outcome { Crossed, TurnedUp, CleanTail };
    Outcome outcome;
    std::vector<double> q;   // samples on r_i = r0 + i h
    double r0, h;
};

// The substitution Q = r^mu P strips the r^mu vanishing at the axis:
//   P'' + (2 mu + 1) P'/r = 2 P + (m^2 - mu^2)/r^2 ... = 2 P - 2 r^{2 mu} P^3
// (the centrifugal term cancels exactly for mu = |m|), so the integration is
// uniformly accurate near r = 0. RK4 from the series start P ~ a (1 + b r^2).
inline ShootTrajectory shoot_qm(int m, double a, const QmShootOptions& o, bool store) {
    const double mu = std::abs(double(m));
    const double b = (mu == 0.0) ? (1.0 - a * a) / 2.0 : 1.0 / (2.0 * mu + 2.0);
    const double r0 = o.h;
    double p = a * (1.0 + b * r0 * r0);
    double dp = 2.0 * a * b * r0;
    auto rhs = [&](double r, double P, double dP, double& f1, double& f2) {
        f1 = dP;
        f2 = -(2.0 * mu + 1.0) * dP / r + 2.0 * P - 2.0 * std::pow(r, 2.0 * mu) * P * P * P;
    };
    ShootTrajectory traj;
    traj.r0 = r0;
    traj.h = o.h;
    auto qval = [&](double r, double P) { return (mu == 0.0) ? P : std::pow(r, mu) * P; };
    if (store) traj.q.push_back(qval(r0, p));
    double peak = qval(r0, p);
    bool descended = false;
    const long nsteps = long((o.r_end - r0) / o.h);
    double r = r0;
    for (long i = 0; i < nsteps; ++i) {
        double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
        rhs(r, p, dp, k1q, k1p);
        rhs(r + 0.5 * o.h, p + 0.5 * o.h * k1q, dp + 0.5 * o.h * k1p, k2q, k2p);
        rhs(r + 0.5 * o.h, p + 0.5 * o.h * k2q, dp + 0.5 * o.h * k2p, k3q, k3p);
        rhs(r + o.h, p + o.h * k3q, dp + o.h * k3p, k4q, k4p);
        p += o.h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        dp += o.h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += o.h;
        const double q = qval(r, p);
        const double dq = (mu == 0.0) ? dp : std::pow(r, mu) * (dp + mu * p / r);
        if (store) traj.q.push_back(q);
        if (q < 0.0) {
            traj.outcome = ShootTrajectory::Outcome::Crossed;
            return traj;
        }
        peak = std::max(peak, q);
        if (q < 0.9 * peak) descended = true;
        // turn-up is only meaningful above the roundoff floor of dq
        if ((descended && dq > 0.0 && q > 1e-8) || q > std::max(10.0, 5.0 * peak)) {
            traj.outcome = ShootTrajectory::Outcome::TurnedUp;
            return traj;
        }
        if (descended && q < 1e-12) {
            traj.outcome = ShootTrajectory::Outcome::CleanTail;
            return traj;
        }
    }
    // reached r_end while still positive and decaying
    traj.outcome = ShootTrajectory::Outcome::CleanTail;
    return traj;
}

} // namespace detail

inline QmResult solve_qm(int m, const Grid& grid, const QmShootOptions& opts = {}) {
    if (grid.kind() != GridKind::Radial2D)
        throw config_error("solve_qm: Q_m lives on a 2D radial grid");
    using Outcome = detail::ShootTrajectory::Outcome;

    // bracket scan: small a turns up, large a crosses zero
    double lo = 0.0, hi = 0.0;
    double prev = 0.0;
    bool prev_turned = false;
    for (double a = opts.a_min; a <= opts.a_max; a *= 1.5) {
        const auto t = detail::shoot_qm(m, a, opts, false);
        if (t.outcome == Outcome::Crossed) {
            if (prev_turned) {
                lo = prev;
                hi = a;
            }
            break;
        }
        prev = a;
        prev_turned = true;
    }
    if (hi == 0.0)
        throw numeric_error("solve_qm: no shooting bracket found in [" + std::to_string(opts.a_min) +
                            ", " + std::to_string(opts.a_max) + "]");

    for (int it = 0; it < opts.max_bisect && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto t = detail::shoot_qm(m, mid, opts, false);
        if (t.outcome == Outcome::Crossed)
            hi = mid;  // oscillatory / excited branch: bisect toward smaller a
        else if (t.outcome == Outcome::TurnedUp)
            lo = mid;
        else {
            lo = hi = mid;
            break;
        }
    }
    const double a_star = 0.5 * (lo + hi);

    const auto traj = detail::shoot_qm(m, a_star, opts, true);
    const auto& q = traj.q;

    // tail cut: first sample below threshold after the peak, else the minimum
    std::size_t ipeak = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (q[i] > q[ipeak]) ipeak = i;
    std::size_t icut = q.size() - 1;
    bool below_threshold = false;
    for (std::size_t i = ipeak; i < q.size(); ++i)
        if (q[i] < opts.tail_threshold) { icut = i; below_threshold = true; break; }
    if (!below_threshold) {
        // contaminated tail (turn-up before reaching the threshold): cut at the minimum
        for (std::size_t i = ipeak; i < q.size(); ++i)
            if (q[i] < q[icut]) icut = i;
    }

    QmResult res;
    res.amplitude = a_star;
    res.r_cut = traj.r0 + icut * opts.h;

    // mass 2π ∫ Q^2 r dr by composite Simpson on the fine mesh
    {
        double s = 0.0;
        auto f = [&](std::size_t i) {
            const double r = traj.r0 + i * opts.h;
            return q[i] * q[i] * r;
        };
        std::size_t i = 0;
        for (; i + 2 <= icut; i += 2) s += opts.h / 3.0 * (f(i) + 4.0 * f(i + 1) + f(i + 2));
        if (i + 1 <= icut) s += 0.5 * opts.h * (f(i) + f(i + 1));
        // the [0, r0] sliver: Q^2 r ~ a^2 r^{2mu+1}
        const double mu = std::abs(double(m));
        s += a_star * a_star * std::pow(traj.r0, 2.0 * mu + 2.0) / (2.0 * mu + 2.0);
        res.mass = 2.0 * M_PI * s;
    }

    // residual via 4th-order finite differences; evaluated on a strided
    // submesh H ~ 2e-3 where the eps/H^2 roundoff of the second difference
    // and the H^4 truncation are both far below the certificate level
    {
        double sup = 0.0;
        const double mu = std::abs(double(m));
        const std::size_t K = std::max<std::size_t>(1, std::size_t(std::lround(2e-3 / opts.h)));
        const double H = K * opts.h;
        for (std::size_t i = 2 * K; i + 2 * K <= icut; i += K) {
            const double r = traj.r0 + i * opts.h;
            const double d2 =
                (-q[i - 2 * K] + 16.0 * q[i - K] - 30.0 * q[i] + 16.0 * q[i + K] - q[i + 2 * K]) / (12.0 * H * H);
            const double d1 = (q[i - 2 * K] - 8.0 * q[i - K] + 8.0 * q[i + K] - q[i + 2 * K]) / (12.0 * H);
            const double resid = -0.5 * (d2 + d1 / r) + (1.0 + mu * mu / (2.0 * r * r)) * q[i] - q[i] * q[i] * q[i];
            sup = std::max(sup, std::abs(resid));
        }
        res.residual_sup = sup;
    }

    // sample onto the caller grid by cubic Lagrange interpolation
    res.field = WaveField(grid, m);
    for (int j = 0; j < grid.nr(); ++j) {
        const double r = grid.r(j);
        if (r >= res.r_cut) {
            res.field.values[j] = 0.0;
            continue;
        }
        const double t = (r - traj.r0) / opts.h;
        long i1 = long(std::floor(t));
        i1 = std::clamp(i1, 1L, long(icut) - 2L);
        const double s = t - i1;
        const double qm1 = q[i1 - 1], q0 = q[i1], q1 = q[i1 + 1], q2 = q[i1 + 2];
        const double v = qm1 * (-s * (s - 1.0) * (s - 2.0) / 6.0) + q0 * ((s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0) +
                         q1 * (-(s + 1.0) * s * (s - 2.0) / 2.0) + q2 * ((s + 1.0) * s * (s - 1.0) / 6.0);
        res.field.values[j] = v;
    }
    check_finite(res.field, "solve_qm");
    return res;
}

// ----------------------------------------------------------------------------
// existence thresholds
// ----------------------------------------------------------------------------

enum class ThresholdMethod { QmMass2D, EnergySignBisect3D };

// Minimum of E_m over the mass-preserving dilation family of psi,
//   d=2:  phi_l = l psi(l x),     E(l) = (l^2/2)(Hd - L4) + (2/5) l^3 L5
//   d=3:  phi_l = l^{3/2} psi(l x), E(l) = (l^2/2) Hd - (l^3/2) L4 + (2/5) l^{9/2} L5
// evaluated in closed form from three integrals of psi. Every family member
// is an admissible trial function, so a negative value certifies e(rho) < 0
// even when the optimal width exceeds the computational box (near-threshold
// minimizers spread like 1/(rho - rho*)).
inline double dilation_energy_min(const WaveField& psi, int m) {
    const double l4 = quadrature(psi, [](cplx v, const NodeCoord&) {
        const double a = std::norm(v);
        return a * a;
    });
    const double l5 = quadrature(psi, [](cplx v, const NodeCoord&) {
        const double a = std::abs(v);
        return a * a * a * a * a;
    });
    const double hd = grad_norm_sq(psi) + 2.0 * centrifugal(psi, m);
    if (psi.grid.kind() == GridKind::Radial2D) {
        const double a = hd - l4, b = 0.4 * l5;
        return (a < 0.0) ? a * a * a / (54.0 * b * b) : 0.0;
    }
    auto e_of = [&](double l) {
        return 0.5 * l * l * hd - 0.5 * l * l * l * l4 + 0.4 * std::pow(l, 4.5) * l5;
    };
    auto [lmin, emax] = golden_section_max([&](double l) { return -e_of(l); }, 1e-6, 8.0, 1e-10);
    (void)lmin;
    return std::min(0.0, -emax);
}

struct ScanPoint {
    double rho;
    double e;        // box energy of the computed minimizer
    double e_best;   // min(e, dilation-family bound); the scan's sign signal
    bool converged;
};

struct ThresholdResult {
    double rho_star = 0.0;
    ThresholdMethod method = ThresholdMethod::QmMass2D;
    std::optional<double> qm_mass;
    std::optional<std::pair<double, double>> bracket;
    std::vector<ScanPoint> scan_log;
};

struct ThresholdScanOptions {
    FlowOptions flow;
    double rel_width = 0.01;
    double rho_init = 4.0;
    int max_expand = 40;
    int max_bisect = 60;
};

// sign-of-e(rho) bisection with warm-started solves; used directly for d=3
// and as a cross-check of the Q_m route in 2D
inline ThresholdResult energy_sign_scan(const Grid& grid, int m, const ThresholdScanOptions& opts = {}) {
    ThresholdResult res;
    res.method = ThresholdMethod::EnergySignBisect3D;
    WaveField warm;
    bool have_warm = false;

    auto evaluate = [&](double rho) -> double {
        double e;
        bool conv = true;
        try {
            auto gs = solve_ground_state(grid, m, rho, opts.flow, have_warm ? &warm : nullptr);
            warm = gs.psi;
            have_warm = true;
            e = gs.e_value;
        } catch (const convergence_error& err) {
            e = err.partial.e_value;  // sign is still informative near threshold
            conv = false;
            warm = err.partial.psi;
            have_warm = true;
        }
        const double e_best = std::min(e, dilation_energy_min(warm, m));
        res.scan_log.push_back({rho, e, e_best, conv});
        return e_best;
    };

    double rho = opts.rho_init;
    double e = evaluate(rho);
    double lo = 0.0, hi = 0.0;
    if (e < 0.0) {
        hi = rho;
        for (int i = 0; i < opts.max_expand; ++i) {
            rho *= 0.5;
            if (evaluate(rho) >= 0.0) { lo = rho; break; }
            hi = rho;
        }
    } else {
        lo = rho;
        for (int i = 0; i < opts.max_expand; ++i) {
            rho *= 2.0;
            if (evaluate(rho) < 0.0) { hi = rho; break; }
            lo = rho;
        }
    }
    if (lo == 0.0 || hi == 0.0)
        throw numeric_error("energy_sign_scan: bracket expansion failed; see scan log");

    for (int i = 0; i < opts.max_bisect && (hi - lo) > opts.rel_width * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (evaluate(mid) < 0.0)
            hi = mid;
        else
            lo = mid;
    }
    res.bracket = std::make_pair(lo, hi);
    res.rho_star = 0.5 * (lo + hi);
    return res;
}

struct ThresholdOptions {
    QmShootOptions shoot;
    ThresholdScanOptions scan;
    std::optional<Grid> scan_grid;   // required for d=3
};

inline ThresholdResult critical_mass(int m, int d, const ThresholdOptions& opts = {}) {
    if (d == 2) {
        Grid sample = Grid::radial(64, opts.shoot.r_end);
        const QmResult qm = solve_qm(m, sample, opts.shoot);
        ThresholdResult res;
        res.method = ThresholdMethod::QmMass2D;
        res.qm_mass = qm.mass;
        res.rho_star = qm.mass;
        return res;
    }
    if (d == 3) {
        if (!opts.scan_grid || opts.scan_grid->kind() != GridKind::Cylindrical3D)
            throw config_error("critical_mass: d=3 needs a cylindrical scan grid");
        return energy_sign_scan(*opts.scan_grid, m, opts.scan);
    }
    throw config_error("critical_mass: d must be 2 or 3");
}

// ----------------------------------------------------------------------------
// e(rho) curve with warm starts
// ----------------------------------------------------------------------------

struct CurvePoint {
    double rho = 0.0;
    double e = 0.0;
    double omega = 0.0;
    long iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::string message;
};

inline std::vector<CurvePoint> energy_curve(const Grid& grid, int m, const std::vector<double>& rho_list,
                                            const FlowOptions& opts = {}) {
    for (std::size_t i = 0; i + 1 < rho_list.size(); ++i)
        if (!(rho_list[i] < rho_list[i + 1]))
            throw config_error("energy_curve: rho_list must be ascending");
    if (!rho_list.empty() && rho_list.front() <= 0.0)
        throw config_error("energy_curve: rho_list must be positive");

    std::vector<CurvePoint> curve;
    WaveField warm;
    bool have_warm = false;
    for (double rho : rho_list) {
        CurvePoint p;
        p.rho = rho;
        try {
            auto gs = solve_ground_state(grid, m, rho, opts, have_warm ? &warm : nullptr);
            warm = gs.psi;
            have_warm = true;
            p.e = gs.e_value;
            p.omega = gs.omega;
            p.iterations = gs.iterations;
            p.residual = gs.residual;
            p.converged = true;
        } catch (const convergence_error& err) {
            p.e = err.partial.e_value;
            p.omega = err.partial.omega;
            p.iterations = err.partial.iterations;
            p.residual = err.partial.residual;
            p.converged = false;
            p.message = err.what();
            warm = err.partial.psi;
            have_warm = true;
        }
        curve.push_back(std::move(p));
    }
    return curve;
}

} // namespace cqnls
