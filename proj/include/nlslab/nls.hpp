#pragma once

// NLS modulation equation A_T = i nu1 A_XX + i nu2 |A|^2 A: coefficients
// assembled from the quadratic Fourier kernel of the diagonal system, and a
// Strang split-step envelope solver.
//
// Carrier convention: the right-moving wave e^{i(k0 x - omega0 t)} has
// v = +qhat(k0) rho and therefore lives in the U_{-1} component.

#include "dispersion.hpp"
#include "spectral.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace nlslab {

// Quadratic kernel of N_j for inputs U_ja(l), U_jb(m), l + m = k:
//   (N_j)^(k) = sum_{ja,jb} int K_j^{ja,jb}(k; k-m, m) U_ja^(k-m) U_jb^(m) dm + cubic.
inline cplx quadratic_kernel(int j, int ja, int jb, double k, double l, double m)
{
    const double qk = qhat(k), ql = qhat(l), qm = qhat(m);
    const cplx ik(0.0, k);
    const double smooth = japanese_inv2(k) * japanese_inv2(l) * japanese_inv2(m);
    return ik * (0.5 * qm * jb + j / (4.0 * qk) * ql * qm * ja * jb - j / (4.0 * qk) * (1.0 + smooth));
}

// lim_{k->0} K_j^{ja,jb}(k; k+k0, -k0) / (ik).
inline double quadratic_kernel_slope_at_zero(int j, int ja, int jb, double k0)
{
    const double q0 = qhat(k0);
    const double s2 = std::sqrt(2.0);
    const double b = japanese_inv2(k0);
    return 0.5 * q0 * jb + j / (4.0 * s2) * q0 * q0 * ja * jb - j / (4.0 * s2) * (1.0 + b * b);
}

// Cubic E^1 coefficient of N_{-1} at k0 for a carrier A e^{i k0 x} in rho:
// (ijk/(2q)) times the |A|^2 A coefficient of (rho^3/3 + phi_3).
inline cplx cubic_carrier_coefficient(double k0)
{
    const double b1 = japanese_inv2(k0);
    const double b2 = japanese_inv2(2.0 * k0);
    const double series = 1.0;                                 // rho^3/3 -> |A|^2 A
    const double poisson = 0.5 * std::pow(b1, 4) * (b2 + 1.0); // phi_3 -> |A|^2 A
    return cplx(0.0, -k0 / (2.0 * qhat(k0))) * (series + poisson);
}

struct NlsOptions {
    bool include_cubic = true;
    bool include_mean_flow = true;
    bool include_second_harmonic = true;
};

struct NlsCoefficients {
    double k0 = 0, omega0 = 0, cg = 0, nu1 = 0, nu2 = 0;
    // Second harmonic: (-2 omega0 + omega(2k0)) A21 = gamma21 A^2 (U_{-1} slot),
    //                  (-2 omega0 - omega(2k0)) A22 = gamma22 A^2 (U_{+1} slot).
    double gamma21 = 0, gamma22 = 0, ratio21 = 0, ratio22 = 0;
    // Mean flow: (c_g - omega'(0)) A01 = gamma31 |A|^2 (U_{-1} slot),
    //            (c_g + omega'(0)) A02 = gamma32 |A|^2 (U_{+1} slot).
    double gamma31 = 0, gamma32 = 0, ratio01 = 0, ratio02 = 0;
    double nu2_imag = 0;  // imaginary residue of the assembly
    double nu2_no_mean = 0; // nu2 without the mean-flow interaction (periodic Stokes wave)

    // Coefficient of A^2 e^{2i(k0x-omega0 t)} in U_j.
    double r2(int j) const { return j == -1 ? ratio21 : ratio22; }
    // Coefficient of |A|^2 in U_j.
    double r0(int j) const { return j == -1 ? ratio01 : ratio02; }
};

struct SecondHarmonic {
    double gamma21, gamma22, ratio21, ratio22;
};

inline SecondHarmonic second_harmonic_coeffs(double k0)
{
    if (k0 == 0.0) throw std::invalid_argument("second_harmonic_coeffs: k0 = 0");
    const double w0 = omega(k0), w2 = omega(2.0 * k0);
    const double d1 = -2.0 * w0 + w2, d2 = -2.0 * w0 - w2;
    if (d1 == 0.0 || d2 == 0.0) throw std::domain_error("second_harmonic_coeffs: resonant denominator");
    const double g1 = (quadratic_kernel(-1, -1, -1, 2 * k0, k0, k0) / cplx(0, 1)).real();
    const double g2 = (quadratic_kernel(1, -1, -1, 2 * k0, k0, k0) / cplx(0, 1)).real();
    return {g1, g2, g1 / d1, g2 / d2};
}

struct MeanFlow {
    double gamma31, gamma32, ratio01, ratio02;
};

inline MeanFlow mean_flow_coeffs(double k0)
{
    if (k0 == 0.0) throw std::invalid_argument("mean_flow_coeffs: k0 = 0");
    const double cg = omega_prime(k0), w0p = omega_prime(0.0);
    // Two orderings of (k0, -k0) contribute equally.
    const double g1 = -2.0 * quadratic_kernel_slope_at_zero(-1, -1, -1, k0);
    const double g2 = -2.0 * quadratic_kernel_slope_at_zero(1, -1, -1, k0);
    const double d1 = cg - w0p, d2 = cg + w0p;
    if (d1 == 0.0 || d2 == 0.0) throw std::domain_error("mean_flow_coeffs: resonant denominator");
    return {g1, g2, g1 / d1, g2 / d2};
}

// Numerical small-k limit of the symmetrised mean-flow forcing for output j,
// Richardson-extrapolated from k = h and k = h/10.
inline double mean_flow_forcing_numeric(int j, double k0, double h = 1e-4)
{
    auto f = [&](double k) {
        const cplx s = quadratic_kernel(j, -1, -1, k, k0 + k, -k0) + quadratic_kernel(j, -1, -1, k, -k0, k0 + k);
        return (s / cplx(0.0, k)).real();
    };
    const double a = f(h), b = f(h / 10.0);
    return -(10.0 * b - a) / 9.0;
}

inline NlsCoefficients nls_coefficients(double k0, const NlsOptions& opt = {})
{
    if (k0 == 0.0) throw std::invalid_argument("nls_coefficients: k0 = 0");
    NlsCoefficients c;
    c.k0 = k0;
    c.omega0 = omega(k0);
    c.cg = omega_prime(k0);
    c.nu1 = 0.5 * omega_double_prime(k0);
    const auto sh = second_harmonic_coeffs(k0);
    c.gamma21 = sh.gamma21;
    c.gamma22 = sh.gamma22;
    c.ratio21 = sh.ratio21;
    c.ratio22 = sh.ratio22;
    const auto mf = mean_flow_coeffs(k0);
    c.gamma31 = mf.gamma31;
    c.gamma32 = mf.gamma32;
    c.ratio01 = mf.ratio01;
    c.ratio02 = mf.ratio02;

    // E^1 forcing of U_{-1}: interactions (mean x carrier) and (second harmonic x conj carrier).
    cplx mean{}, harm{};
    for (int ja : {-1, 1}) {
        mean += (quadratic_kernel(-1, ja, -1, k0, 0.0, k0) + quadratic_kernel(-1, -1, ja, k0, k0, 0.0)) * c.r0(ja);
        harm += (quadratic_kernel(-1, ja, -1, k0, 2 * k0, -k0) + quadratic_kernel(-1, -1, ja, k0, -k0, 2 * k0)) *
                c.r2(ja);
    }
    const cplx cubic = cubic_carrier_coefficient(k0);
    cplx sum{};
    if (opt.include_mean_flow) sum += mean;
    if (opt.include_second_harmonic) sum += harm;
    if (opt.include_cubic) sum += cubic;
    const cplx nu2 = sum / cplx(0.0, 1.0);
    c.nu2 = nu2.real();
    c.nu2_imag = nu2.imag();
    c.nu2_no_mean = ((harm + cubic) / cplx(0.0, 1.0)).real();
    if (std::abs(c.nu2_imag) > 1e-10 * std::max(1.0, std::abs(c.nu2)))
        throw std::logic_error("nls_coefficients: nu2 not real");
    return c;
}

// ---------------------------------------------------------------------------
// Envelope solver.

struct Envelope {
    PeriodicGrid grid; // slow grid in X
    double T = 0.0;
    CVec a;            // samples A(X_i)
};

// Strang splitting: half nonlinear rotation, exact linear step
// A^ -> e^{-i nu1 K^2 dT} A^, half nonlinear rotation.  dT may be negative.
inline Envelope split_step(const Envelope& in, double nu1, double nu2, double dT, std::size_t steps)
{
    if (!std::isfinite(dT) || dT == 0.0) throw std::invalid_argument("split_step: dT must be finite and nonzero");
    if (in.a.size() != in.grid.size()) throw std::invalid_argument("split_step: size mismatch");
    const PeriodicGrid& g = in.grid;
    CVec lin(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double K = g.k(i);
        lin[i] = std::polar(1.0, -nu1 * K * K * dT);
    }
    Envelope out = in;
    CVec& a = out.a;
    auto half = [&]() {
        for (auto& z : a) z *= std::polar(1.0, 0.5 * nu2 * std::norm(z) * dT);
    };
    for (std::size_t s = 0; s < steps; ++s) {
        half();
        CVec h = forward(g, a);
        for (std::size_t i = 0; i < h.size(); ++i) h[i] *= lin[i];
        a = inverse(g, h);
        half();
        for (const auto& z : a)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw std::runtime_error("split_step: non-finite");
    }
    out.T = in.T + dT * static_cast<double>(steps);
    return out;
}

// Advances to T_target with steps no longer than max_dT (forward or backward).
inline Envelope evolve_envelope(const Envelope& in, double nu1, double nu2, double T_target, double max_dT)
{
    const double span = T_target - in.T;
    if (span == 0.0) return in;
    const auto n = static_cast<std::size_t>(std::ceil(std::abs(span) / max_dT - 1e-12));
    Envelope out = split_step(in, nu1, nu2, span / static_cast<double>(n), n);
    out.T = T_target;
    return out;
}

inline double envelope_l2(const Envelope& e) { return l2_norm(e.grid, e.a); }

// Bright soliton a sech(bX) e^{icT}, b^2 = nu2 a^2/(2 nu1), c = nu2 a^2 / 2
// (requires nu1 nu2 > 0).
inline Envelope soliton(const PeriodicGrid& g, double nu1, double nu2, double amp, double T = 0.0, double X0 = 0.0)
{
    if (!(nu1 * nu2 > 0.0)) throw std::invalid_argument("soliton: needs nu1 nu2 > 0");
    const double b = std::sqrt(nu2 * amp * amp / (2.0 * nu1));
    const double c = 0.5 * nu2 * amp * amp;
    Envelope e{g, T, CVec(g.size())};
    const double L = g.length();
    for (std::size_t i = 0; i < g.size(); ++i) {
        double X = g.x(i) - X0;
        X -= L * std::round(X / L);
        e.a[i] = std::polar(amp / std::cosh(b * X), c * T);
    }
    return e;
}

} // namespace nlslab
