// Test-only oracles, independent of the library's quadrature/derivative
// paths: adaptive Simpson integration, the free-Schroedinger Gaussian in
// closed form, a Townes-profile shooter, and a fully specified RNG.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

// adaptive Simpson on [a, b] to absolute tolerance
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

// free evolution i u_t = -1/2 Δu of the isotropic Gaussian A exp(-|x|^2/(2 s^2))
// in d dimensions: u(t,x) = A (s^2/(s^2+it))^{d/2} exp(-|x|^2/(2(s^2+it))).
inline std::complex<double> free_gaussian(double t, double rsq, double amplitude, double s, int d) {
    const std::complex<double> denom(s * s, t);
    const std::complex<double> pref = std::pow(std::complex<double>(s * s, 0.0) / denom, 0.5 * d);
    return amplitude * pref * std::exp(-rsq / (2.0 * denom));
}

// variance ∫|x|^2 |u|^2 of the free Gaussian above (d dimensions):
// |u|^2 has width w^2(t) = (s^4 + t^2)/s^2 and conserved mass, so
// V(t) = V(0) * w^2(t)/s^2.
inline double free_gaussian_variance_factor(double t, double s) {
    return (s * s * s * s + t * t) / (s * s * s * s);
}

// Townes profile: R'' + R'/r = R - R^3, R'(0) = 0, R > 0 decaying.
// Independent of the library shooter (different equation and stepper: RK2
// midpoint with fine mesh). Returns ||R||_{L^2(R^2)}^2 = 2π ∫ R^2 r dr.
inline double townes_mass(double h = 1e-4, double r_end = 14.0) {
    auto classify = [&](double b, double* mass_out) {
        // series start: R ≈ b + (b - b^3) r^2 / 4  (ΔR = 2 R''(0) in 2D radial)
        const double r0 = h;
        double R = b + 0.25 * (b - b * b * b) * r0 * r0;
        double dR = 0.5 * (b - b * b * b) * r0;
        double r = r0;
        double peak = R, mass = 0.0;
        bool descended = false;
        auto acc = [&](double rr, double RR) { mass += RR * RR * rr * h; };
        acc(r, R);
        const long n = long((r_end - r0) / h);
        for (long i = 0; i < n; ++i) {
            // midpoint RK2
            const double f1 = dR, g1 = -dR / r + R - R * R * R;
            const double Rm = R + 0.5 * h * f1, dRm = dR + 0.5 * h * g1, rm = r + 0.5 * h;
            const double f2 = dRm, g2 = -dRm / rm + Rm - Rm * Rm * Rm;
            R += h * f2;
            dR += h * g2;
            r += h;
            if (R < 0.0) return -1;             // crossed: b too large
            peak = std::max(peak, R);
            if (R < 0.9 * peak) descended = true;
            if (descended && dR > 0.0 && R > 1e-8) return +1;  // turned up: b too small
            acc(r, R);
            if (descended && R < 1e-10) break;
        }
        if (mass_out) *mass_out = 2.0 * M_PI * mass;
        return 0;
    };
    double lo = 1.0, hi = 4.0;
    for (int i = 0; i < 160 && (hi - lo) > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const int c = classify(mid, nullptr);
        if (c < 0)
            hi = mid;
        else if (c > 0)
            lo = mid;
        else {
            lo = hi = mid;
            break;
        }
    }
    double mass = 0.0;
    classify(0.5 * (lo + hi), &mass);
    return mass;
}

// deterministic uniforms: raw mt19937_64 draws mapped by fixed arithmetic
// (std::uniform_real_distribution is implementation-defined)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) {
        const double u = (eng_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }
    std::complex<double> complex_unit() {
        const double phase = uniform(0.0, 2.0 * M_PI);
        return {std::cos(phase), std::sin(phase)};
    }

private:
    std::mt19937_64 eng_;
};

} // namespace oracles
