#pragma once

// Normal-form machinery for the error equations: weight theta, projections
// P0/P1, the quadratic pieces alpha^n, bilinear kernels b^{0,1,n}, b^{1,0,n},
// b^{1,1,n}, the G and S operators, and the energy functional.
//
// Kernels are written in terms of (k, p, m) with p = k - m the carrier
// wavenumber.  `sigma` is the sign of v relative to q rho on the carrier:
// -1 for a carrier on the (1, -q) eigenvector, +1 for the physical right-mover.

#include "dispersion.hpp"
#include "spectral.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlslab {

// ---------------------------------------------------------------------------
// Weight and projections.

struct WeightTheta {
    double eps = 0.05;
    double delta = 0.1;

    double operator()(double k) const
    {
        const double a = std::abs(k);
        return a > delta ? 1.0 : eps + (1.0 - eps) * a / delta;
    }
    double zero(double k) const { return (*this)(k)-eps; } // theta_0
};

inline bool in_p0(double k, double delta) { return std::abs(k) <= delta; }

inline CVec apply_symbol(const PeriodicGrid& g, const CVec& s, const std::function<cplx(double)>& m)
{
    CVec out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = m(g.k(i)) * s[i];
    return out;
}

inline CVec p0(const PeriodicGrid& g, const CVec& s, double delta)
{
    return apply_symbol(g, s, [&](double k) { return in_p0(k, delta) ? 1.0 : 0.0; });
}
inline CVec p1(const PeriodicGrid& g, const CVec& s, double delta)
{
    return apply_symbol(g, s, [&](double k) { return in_p0(k, delta) ? 0.0 : 1.0; });
}
inline CVec theta_mul(const PeriodicGrid& g, const CVec& s, const WeightTheta& th)
{
    return apply_symbol(g, s, [&](double k) { return th(k); });
}
inline CVec theta_inv_mul(const PeriodicGrid& g, const CVec& s, const WeightTheta& th)
{
    return apply_symbol(g, s, [&](double k) { return 1.0 / th(k); });
}
inline CVec theta0_mul(const PeriodicGrid& g, const CVec& s, const WeightTheta& th)
{
    return apply_symbol(g, s, [&](double k) { return th.zero(k); });
}

// ---------------------------------------------------------------------------
// Quadratic pieces alpha^n_{j1,j2}(k, p, m) of the linearisation around the carrier.

inline double alpha_kernel(int n, int j1, int j2, double k, double p, double m, int sigma = -1)
{
    switch (n) {
    case 1: return j2 * qhat(m);
    case 2: return -sigma * qhat(p);
    case 3: return -sigma * j1 * j2 * qhat(p) * qhat(m) / qhat(k);
    case 4: return -j1 / qhat(k);
    case 5: return -j1 / qhat(k) * japanese_inv2(k) * japanese_inv2(p) * japanese_inv2(m);
    default: throw std::invalid_argument("alpha_kernel: n must be 1..5");
    }
}

// ---------------------------------------------------------------------------
// Bilinear kernels.

enum class KernelFamily { B01, B10, B11, B115 };

inline std::string family_name(KernelFamily f)
{
    switch (f) {
    case KernelFamily::B01: return "b01";
    case KernelFamily::B10: return "b10";
    case KernelFamily::B11: return "b11";
    case KernelFamily::B115: return "b115";
    }
    return "?";
}

inline KernelFamily parse_family(const std::string& s)
{
    if (s == "b01") return KernelFamily::B01;
    if (s == "b10") return KernelFamily::B10;
    if (s == "b11") return KernelFamily::B11;
    if (s == "b115") return KernelFamily::B115;
    throw std::invalid_argument("unknown kernel family: " + s);
}

struct KernelSpec {
    KernelFamily family = KernelFamily::B11;
    int n = 1;
    int j1 = 1, j2 = 1;
    double k0 = 1.0;
    WeightTheta theta;
    int sigma = -1;
    bool strict = false;
};

class KernelSupportError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline bool on_carrier(double p, double k0, double delta) { return std::abs(std::abs(p) - std::abs(k0)) <= delta; }

// Declared support of each family (carrier slot included).
inline bool in_support(const KernelSpec& s, double k, double p, double m)
{
    const double d = s.theta.delta;
    if (!on_carrier(p, s.k0, d)) return false;
    switch (s.family) {
    case KernelFamily::B01: return in_p0(k, d) && !in_p0(m, d);
    case KernelFamily::B10: return !in_p0(k, d) && in_p0(m, d);
    case KernelFamily::B11:
    case KernelFamily::B115: return !in_p0(k, d) && !in_p0(m, d);
    }
    return false;
}

// Kernel value; zero outside the declared support unless strict mode is on.
inline double kernel_value(const KernelSpec& s, double k, double p, double m)
{
    if (!in_support(s, k, p, m)) {
        if (s.strict) throw KernelSupportError("kernel evaluated outside its support");
        return 0.0;
    }
    const int n = s.family == KernelFamily::B115 ? 5 : s.n;
    const double a = alpha_kernel(n, s.j1, s.j2, k, p, m, s.sigma);
    const double D = resonance_denominator(s.j1, s.j2, k, m);
    const WeightTheta& th = s.theta;
    switch (s.family) {
    case KernelFamily::B01: {
        const double w = th(m) / (2.0 * th(k));
        if (k == 0.0) {
            // Removable singularity: -k/D -> -1/D'(0) when D(0) = 0.
            if (std::abs(D) > 1e-14) return 0.0;
            const double dD = -s.j1 * omega_prime(0.0) + s.j2 * omega_prime(-p);
            return -a / dD * w;
        }
        return -k * a / D * w;
    }
    case KernelFamily::B10: {
        const double w0 = th.zero(m);
        if (w0 == 0.0) return 0.0;
        return -0.5 * k * a / D * w0 / th(k);
    }
    case KernelFamily::B11:
    case KernelFamily::B115: return -0.5 * k * a / D * th(m) / th(k);
    }
    return 0.0;
}

// Carrier-slot form b^{0,1,n,l}(k): p = l k0, m = k - l k0.
inline double b01_simplified(int n, int j1, int j2, int l, double k, double k0, const WeightTheta& th, int sigma = -1)
{
    KernelSpec s{KernelFamily::B01, n, j1, j2, k0, th, sigma, false};
    return kernel_value(s, k, l * k0, k - l * k0);
}

// ---------------------------------------------------------------------------
// Bilinear application by band quadrature over the carrier support:
//   B^(K) = sum_{P in supp phi^} b(K, P, K-P) phi^(P) R^(K-P) dk.

template <class KernelFn>
inline CVec apply_bilinear_fn(const PeriodicGrid& g, KernelFn&& b, const CVec& phi, const CVec& R)
{
    if (phi.size() != g.size() || R.size() != g.size()) throw std::invalid_argument("apply_bilinear: grid mismatch");
    std::vector<long> support;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (phi[i] != cplx{} && !g.is_nyquist(i)) support.push_back(g.mode(i));
    const double dk = g.dk();
    CVec out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.is_nyquist(i)) continue;
        const long K = g.mode(i);
        cplx acc{};
        for (long P : support) {
            const long M = K - P;
            if (!g.contains_mode(M) || M == -static_cast<long>(g.size() / 2)) continue;
            const cplx r = R[g.slot(M)];
            if (r == cplx{}) continue;
            const double v = b(dk * K, dk * P, dk * M);
            if (v != 0.0) acc += v * phi[g.slot(P)] * r;
        }
        out[i] = acc * dk;
    }
    return out;
}

inline CVec apply_bilinear(const PeriodicGrid& g, const KernelSpec& s, const CVec& phi, const CVec& R)
{
    return apply_bilinear_fn(g, [&](double k, double p, double m) { return kernel_value(s, k, p, m); }, phi, R);
}

inline Field apply_bilinear(const KernelSpec& s, const Field& phi, const Field& R)
{
    require_same_grid(phi.grid(), R.grid());
    return Field::from_spectrum(phi.grid(), apply_bilinear(phi.grid(), s, phi.spectrum(), R.spectrum()));
}

// Sum over n = 1..5 of one family (B115 is the n = 5 member of B11).
inline CVec apply_bilinear_sum(const PeriodicGrid& g, KernelFamily fam, int j1, int j2, double k0,
                               const WeightTheta& th, int sigma, const CVec& phi, const CVec& R)
{
    std::array<KernelSpec, 5> specs;
    for (int n = 1; n <= 5; ++n) specs[n - 1] = KernelSpec{fam, n, j1, j2, k0, th, sigma, false};
    return apply_bilinear_fn(
        g,
        [&](double k, double p, double m) {
            double v = 0.0;
            for (const auto& s : specs) v += kernel_value(s, k, p, m);
            return v;
        },
        phi, R);
}

// ---------------------------------------------------------------------------
// Independent physical-space evaluation of alpha^n(phi, g): products by
// padded convolution, multipliers applied on the lattice.

inline CVec alpha_apply(const PeriodicGrid& g, int n, int j1, int j2, const CVec& phi, const CVec& f, int sigma = -1)
{
    auto q = [](double k) { return cplx(qhat(k)); };
    auto qi = [](double k) { return cplx(1.0 / qhat(k)); };
    auto jb = [](double k) { return cplx(japanese_inv2(k)); };
    switch (n) {
    case 1: {
        CVec r = convolve(g, phi, apply_symbol(g, f, q));
        for (auto& v : r) v *= static_cast<double>(j2);
        return r;
    }
    case 2: {
        CVec r = convolve(g, apply_symbol(g, phi, q), f);
        for (auto& v : r) v *= static_cast<double>(-sigma);
        return r;
    }
    case 3: {
        CVec r = apply_symbol(g, convolve(g, apply_symbol(g, phi, q), apply_symbol(g, f, q)), qi);
        for (auto& v : r) v *= static_cast<double>(-sigma * j1 * j2);
        return r;
    }
    case 4: {
        CVec r = apply_symbol(g, convolve(g, phi, f), qi);
        for (auto& v : r) v *= static_cast<double>(-j1);
        return r;
    }
    case 5: {
        CVec r = apply_symbol(g, convolve(g, apply_symbol(g, phi, jb), apply_symbol(g, f, jb)),
                              [&](double k) { return cplx(japanese_inv2(k) / qhat(k)); });
        for (auto& v : r) v *= static_cast<double>(-j1);
        return r;
    }
    default: throw std::invalid_argument("alpha_apply: n must be 1..5");
    }
}

struct CancellationReport {
    double defect = 0.0;    // ||LHS + alpha term||_L2
    double reference = 0.0; // ||alpha term||_L2
    double relative() const { return reference > 0 ? defect / reference : defect; }
};

// Defining relation of each family:
//   -j1 Omega B(phi,f) - B(Omega phi, f) + j2 B(phi, Omega f) + (P d_x / 2 theta) alpha(phi w f) = 0
// with P = P0 (b01) or P1 (b10, b11) and w = theta (b01, b11) or theta_0 (b10).
inline CancellationReport cancellation_defect(const PeriodicGrid& g, const KernelSpec& s, const CVec& phi,
                                              const CVec& f)
{
    auto Om = [](double k) { return cplx(0.0, omega(k)); };
    const CVec B = apply_bilinear(g, s, phi, f);
    const CVec B1 = apply_bilinear(g, s, apply_symbol(g, phi, Om), f);
    const CVec B2 = apply_bilinear(g, s, phi, apply_symbol(g, f, Om));
    const CVec OB = apply_symbol(g, B, Om);
    const WeightTheta& th = s.theta;
    const CVec wf = s.family == KernelFamily::B10 ? theta0_mul(g, f, th) : theta_mul(g, f, th);
    const int n = s.family == KernelFamily::B115 ? 5 : s.n;
    const CVec al = alpha_apply(g, n, s.j1, s.j2, phi, wf, s.sigma);
    const bool low = s.family == KernelFamily::B01;
    const CVec term = apply_symbol(g, al, [&](double k) {
        const bool keep = (low ? in_p0(k, th.delta) : !in_p0(k, th.delta)) && k != -kPi / g.dx();
        return keep ? cplx(0.0, k) / (2.0 * th(k)) : cplx{};
    });
    CVec d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        d[i] = -static_cast<double>(s.j1) * OB[i] - B1[i] + static_cast<double>(s.j2) * B2[i] + term[i];
    return {spectral_l2_norm(g, d), spectral_l2_norm(g, term)};
}

// ---------------------------------------------------------------------------
// Kernel bounds and asymptotics.

// min over |k| <= delta of |-j1 omega(k) - 2 omega(k0) + j3 omega(k - 2k0)|.
struct DTransformReport {
    double at_zero = 0.0;
    double min_value = 0.0;
    bool positive = false;
};

inline DTransformReport d_transform_check(double k0, int j1, int j3, double delta, int samples = 2001)
{
    if (k0 == 0.0) throw std::invalid_argument("d_transform_check: k0 = 0");
    auto f = [&](double k) { return std::abs(-j1 * omega(k) - 2.0 * omega(k0) + j3 * omega(k - 2.0 * k0)); };
    DTransformReport r;
    r.at_zero = f(0.0);
    r.min_value = INFINITY;
    for (int i = 0; i < samples; ++i) {
        const double k = -delta + 2.0 * delta * i / (samples - 1);
        r.min_value = std::min(r.min_value, f(k));
    }
    r.positive = r.min_value > 0.0;
    return r;
}

// Large-|k| expansions of b^{1,1,n} along p fixed, m = k - p, as printed in
// the reference closed forms (chi = 1 on the carrier).
inline double b11_printed_asymptotic(int n, int j1, int j2, double k, double p)
{
    const double m = k - p;
    const int j = j1;
    if (j1 == j2) {
        const double den = 2.0 * (j * p + omega(p));
        switch (n) {
        case 1: return j * k * qhat(m) / den;
        case 2: return k * qhat(p) / den;
        case 3: return k * qhat(p) * qhat(m) / den;
        case 4: return -j * k / den;
        }
    } else {
        switch (n) {
        case 1: return -qhat(m) / 2.0;
        case 2: return j * qhat(p) / 2.0;
        case 3: return -j * qhat(p) * qhat(m) / 2.0;
        case 4: return -0.5;
        }
    }
    throw std::invalid_argument("b11_printed_asymptotic: n must be 1..4");
}

// Exact |k| -> infinity limits for the opposite-sign pairs (omega(k) + omega(m) ~ 2k).
inline double b11_opposite_limit(int n, int j, double p, double m)
{
    switch (n) {
    case 1: return -qhat(m) / 4.0;
    case 2: return j * qhat(p) / 4.0;
    case 3: return -j * qhat(p) * qhat(m) / 4.0;
    case 4: return -0.25;
    }
    throw std::invalid_argument("b11_opposite_limit: n must be 1..4");
}

// ---------------------------------------------------------------------------
// G and S operators.

inline cplx g_symbol(int j1, int j2, double k, double delta)
{
    if (in_p0(k, delta)) return 0.0;
    if (j1 == j2) return 1.0 / (cplx(0.0, -2.0) * (j1 * k + omega(k)));
    return 0.5;
}

// Printed s^n_{j2,j1}(k, p, m), multiplying (d_x h)^(p) f^(m).
inline cplx s_kernel_printed(int n, int j2, int j1, double k, double p, double m)
{
    const double D = -j2 * omega(k) - omega(p) + j1 * omega(m);
    const double mp = -static_cast<double>(j1 * j2); // '-' for equal signs, '+' otherwise
    const cplx i2D = cplx(0.0, 2.0) * D;
    switch (n) {
    case 1: return mp * j1 * (k * qhat(m) - m * qhat(k)) / (p * i2D);
    case 2: return -qhat(p) / i2D;
    case 3: return mp * (k * qhat(m) - m * qhat(k)) * qhat(p) / (p * i2D);
    case 4: return static_cast<double>(j1) / i2D;
    }
    throw std::invalid_argument("s_kernel_printed: n must be 1..4");
}

// Adjoint-identity coefficient: -j1/j2 for n = 1, 4 and -1 for n = 2, 3.
inline double adjoint_sign(int n, int j1, int j2) { return (n == 1 || n == 4) ? -static_cast<double>(j1) / j2 : -1.0; }

// Exact remainder kernel: s(k,p,m) (ip) = b_{j1j2}(-m, p, -k) - adjoint_sign * b_{j2j1}(k, p, m).
inline cplx s_kernel_exact(const KernelSpec& b, double k, double p, double m)
{
    KernelSpec sw = b;
    std::swap(sw.j1, sw.j2);
    const double v = kernel_value(b, -m, p, -k) - adjoint_sign(b.n, b.j1, b.j2) * kernel_value(sw, k, p, m);
    return v / cplx(0.0, p);
}

struct AdjointReport {
    double lhs = 0.0, rhs = 0.0, defect = 0.0, scale = 0.0;
    double relative() const { return scale > 0 ? defect / scale : defect; }
};

inline double real_inner(const PeriodicGrid& g, const CVec& a, const CVec& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (std::conj(a[i]) * b[i]).real();
    return 2.0 * kPi * s * g.dk();
}

// int f B_{j1j2}(h,g) = adjoint_sign int B_{j2j1}(h,f) g + int S_{j2j1}(d_x h, f) g.
inline AdjointReport verify_adjoint_identity(const PeriodicGrid& grid, const KernelSpec& b, const CVec& h,
                                             const CVec& f, const CVec& gg, bool exact_s)
{
    KernelSpec sw = b;
    std::swap(sw.j1, sw.j2);
    const CVec Bhg = apply_bilinear(grid, b, h, gg);
    const CVec Bhf = apply_bilinear(grid, sw, h, f);
    const CVec dh = apply_symbol(grid, h, [](double k) { return cplx(0.0, k); });
    // S has complex kernels, so it is evaluated with its own loop.
    CVec Sv(grid.size());
    {
        std::vector<long> support;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (dh[i] != cplx{}) support.push_back(grid.mode(i));
        const double dk = grid.dk();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid.is_nyquist(i)) continue;
            const long K = grid.mode(i);
            cplx acc{};
            for (long P : support) {
                const long M = K - P;
                if (!grid.contains_mode(M) || M == -static_cast<long>(grid.size() / 2)) continue;
                const double k = dk * K, p = dk * P, m = dk * M;
                if (!in_support(b, k, p, m) && !in_support(b, -m, p, -k)) continue;
                const cplx sv = exact_s ? s_kernel_exact(b, k, p, m) : s_kernel_printed(b.n, b.j2, b.j1, k, p, m);
                acc += sv * dh[grid.slot(P)] * f[grid.slot(M)];
            }
            Sv[i] = acc * dk;
        }
    }
    AdjointReport r;
    r.lhs = real_inner(grid, f, Bhg);
    const double t1 = adjoint_sign(b.n, b.j1, b.j2) * real_inner(grid, gg, Bhf);
    const double t2 = real_inner(grid, gg, Sv);
    r.rhs = t1 + t2;
    r.defect = std::abs(r.lhs - r.rhs);
    r.scale = std::max({std::abs(r.lhs), std::abs(t1), std::abs(t2)});
    return r;
}

// ---------------------------------------------------------------------------
// Integration-by-parts identities for real fields a_j, f_j (given as spectra).

struct IdentityReport {
    double lhs = 0.0, rhs = 0.0;
    double relative() const { return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}); }
};

inline RVec real_samples(const PeriodicGrid& g, const CVec& s) { return inverse_real(g, s); }

inline RVec ddx(const PeriodicGrid& g, const CVec& s)
{
    return inverse_real(g, apply_symbol(g, s, [&](double k) { return cplx(0.0, k); }));
}

// int a f f' = -1/2 int a' f^2
inline IdentityReport lemma_part1(const PeriodicGrid& g, const CVec& a, const CVec& f)
{
    const RVec A = real_samples(g, a), F = real_samples(g, f), dF = ddx(g, f), dA = ddx(g, a);
    double l = 0, r = 0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        l += A[i] * F[i] * dF[i];
        r += -0.5 * dA[i] * F[i] * F[i];
    }
    return {l * g.dx(), r * g.dx()};
}

// sum_j int a_j f_j f_{-j}' = 1/2 int (a_- - a_+)(f_+ + f_-)(f_+ - f_-)'
//   + 1/4 int (a_- - a_+)'(f_+^2 - f_-^2) - 1/2 int (a_+ + a_-)' f_+ f_-.
inline IdentityReport lemma_part2(const PeriodicGrid& g, const CVec& ap, const CVec& am, const CVec& fp,
                                  const CVec& fm)
{
    const RVec Ap = real_samples(g, ap), Am = real_samples(g, am), Fp = real_samples(g, fp), Fm = real_samples(g, fm);
    const RVec dAp = ddx(g, ap), dAm = ddx(g, am), dFp = ddx(g, fp), dFm = ddx(g, fm);
    double l = 0, r = 0;
    for (std::size_t i = 0; i < Ap.size(); ++i) {
        l += Ap[i] * Fp[i] * dFm[i] + Am[i] * Fm[i] * dFp[i];
        r += 0.5 * (Am[i] - Ap[i]) * (Fp[i] + Fm[i]) * (dFp[i] - dFm[i]) +
             0.25 * (dAm[i] - dAp[i]) * (Fp[i] * Fp[i] - Fm[i] * Fm[i]) - 0.5 * (dAp[i] + dAm[i]) * Fp[i] * Fm[i];
    }
    return {l * g.dx(), r * g.dx()};
}

// sum_j j int a_j f_j f_{-j}' = 1/2 int (a_+ + a_-)(f_+ + f_-)(f_- - f_+)'
//   - 1/4 int (a_+ + a_-)'(f_+^2 - f_-^2) - 1/2 int (a_+ - a_-)' f_+ f_-.
inline IdentityReport lemma_part3(const PeriodicGrid& g, const CVec& ap, const CVec& am, const CVec& fp,
                                  const CVec& fm)
{
    const RVec Ap = real_samples(g, ap), Am = real_samples(g, am), Fp = real_samples(g, fp), Fm = real_samples(g, fm);
    const RVec dAp = ddx(g, ap), dAm = ddx(g, am), dFp = ddx(g, fp), dFm = ddx(g, fm);
    double l = 0, r = 0;
    for (std::size_t i = 0; i < Ap.size(); ++i) {
        l += Ap[i] * Fp[i] * dFm[i] - Am[i] * Fm[i] * dFp[i];
        r += 0.5 * (Ap[i] + Am[i]) * (Fp[i] + Fm[i]) * (dFm[i] - dFp[i]) -
             0.25 * (dAp[i] + dAm[i]) * (Fp[i] * Fp[i] - Fm[i] * Fm[i]) - 0.5 * (dAp[i] - dAm[i]) * Fp[i] * Fm[i];
    }
    return {l * g.dx(), r * g.dx()};
}

// Leading terms only, as stated: the remainders are lower order, not zero.
inline double lemma_part2_leading(const PeriodicGrid& g, const CVec& ap, const CVec& am, const CVec& fp,
                                  const CVec& fm)
{
    const RVec Ap = real_samples(g, ap), Am = real_samples(g, am), Fp = real_samples(g, fp), Fm = real_samples(g, fm);
    const RVec dFp = ddx(g, fp), dFm = ddx(g, fm);
    double r = 0;
    for (std::size_t i = 0; i < Ap.size(); ++i) r += 0.5 * (Am[i] - Ap[i]) * (Fp[i] + Fm[i]) * (dFp[i] - dFm[i]);
    return r * g.dx();
}

// max over the P1 lattice of |(G_{-1,-1} +- G_{1,1})(k) - (1/(-ik) + ik) q^{0 or 1}|.
inline std::pair<double, double> g_sum_identity_defects(const PeriodicGrid& g, double delta)
{
    double d4 = 0.0, d5 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double k = g.k(i);
        if (in_p0(k, delta)) continue;
        const cplx base = 1.0 / cplx(0.0, -k) + cplx(0.0, k);
        const cplx sum = g_symbol(-1, -1, k, delta) + g_symbol(1, 1, k, delta);
        const cplx dif = g_symbol(-1, -1, k, delta) - g_symbol(1, 1, k, delta);
        d4 = std::max(d4, std::abs(sum - base * qhat(k)) / std::abs(base * qhat(k)));
        d5 = std::max(d5, std::abs(dif - base) / std::abs(base));
    }
    return {d4, d5};
}

// ---------------------------------------------------------------------------
// Energy functional.

struct EnergyInputs {
    std::array<CVec, 2> R0; // script-R^0_{+1}, script-R^0_{-1} (spectra)
    std::array<CVec, 2> R1; // R^1_{+1}, R^1_{-1}
    CVec phi_c;             // carrier, band-limited near +-k0
    CVec phi_p1, phi_p2;    // optional corrections (empty = 0)
};

struct EnergyOptions {
    int s = 2;
    double eps = 0.05;
    double delta = 0.1;
    double k0 = 1.0;
    int sigma = -1;
    bool plus_variant = false; // (phi1 + phi2 + 2 q phi2) instead of (... - 2 q phi2)
};

struct EnergyReport {
    std::vector<double> E;       // E_l, l = 0..s
    std::vector<double> cross;   // eps-weighted cross terms inside E_l
    std::vector<double> h;       // h_l, l = 0..s (h_0 unused)
    double total = 0.0;          // script-E_s
    double modified = 0.0;       // script-E_s + eps^2/4 sum_{l>=1} h_l
    double reference = 0.0;      // 1/2 sum_l sum_j (||d^l R0_j||^2 + ||d^l R1_j||^2)
    double ratio() const { return reference > 0 ? total / reference : 1.0; }
};

inline EnergyReport energy(const PeriodicGrid& g, const EnergyInputs& in, const EnergyOptions& opt)
{
    if (opt.s < 1) throw std::invalid_argument("energy: s must be >= 1");
    const WeightTheta th{opt.eps, opt.delta};
    const int js[2] = {1, -1};
    auto dl = [&](const CVec& s, int l) {
        return apply_symbol(g, s, [&](double k) { return std::pow(cplx(0.0, k), l); });
    };

    // Cross-term operands: sum over n of B^{1,0} and B^{1,1}.
    std::array<CVec, 2> cross_src{CVec(g.size()), CVec(g.size())};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const CVec c10 =
                apply_bilinear_sum(g, KernelFamily::B10, js[a], js[b], opt.k0, th, opt.sigma, in.phi_c, in.R0[b]);
            const CVec c11 =
                apply_bilinear_sum(g, KernelFamily::B11, js[a], js[b], opt.k0, th, opt.sigma, in.phi_c, in.R1[b]);
            for (std::size_t i = 0; i < g.size(); ++i) cross_src[a][i] += c10[i] + c11[i];
        }

    // phi_1, phi_2 and the h_l density.
    std::array<CVec, 2> F{CVec(g.size()), CVec(g.size())};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const CVec c =
                apply_bilinear_sum(g, KernelFamily::B01, js[a], js[b], opt.k0, th, opt.sigma, in.phi_c, in.R1[b]);
            for (std::size_t i = 0; i < g.size(); ++i) F[a][i] += c[i];
        }
    const double e = opt.eps, e32 = std::pow(opt.eps, 1.5);
    CVec phi1(g.size()), phi2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = th(g.k(i));
        const cplx s0 = in.R0[0][i] + in.R0[1][i] - e * (F[0][i] + F[1][i]);
        const cplx d0 = in.R0[0][i] - in.R0[1][i] - e * (F[0][i] - F[1][i]);
        const cplx p1v = in.phi_p1.empty() ? cplx{} : in.phi_p1[i];
        const cplx p2v = in.phi_p2.empty() ? cplx{} : in.phi_p2[i];
        phi1[i] = in.phi_c[i] + e * p1v + e32 * (t * s0 + 0.5 * (in.R1[0][i] + in.R1[1][i]));
        phi2[i] = in.phi_c[i] + e * p2v + e32 * (t * d0 + 0.5 * (in.R1[0][i] - in.R1[1][i]));
    }
    const RVec P1 = inverse_real(g, phi1), P2 = inverse_real(g, phi2);
    const RVec qP2 = inverse_real(g, apply_symbol(g, phi2, [](double k) { return cplx(qhat(k)); }));
    const RVec Pc = inverse_real(g, in.phi_c);
    const RVec curv = inverse_real(g, apply_symbol(g, in.phi_c, [](double k) {
                                       const double q = qhat(k);
                                       return cplx(q * q * (-1.0 - k * k));
                                   }));
    const double sgn = opt.plus_variant ? 2.0 : -2.0;

    EnergyReport r;
    r.E.assign(opt.s + 1, 0.0);
    r.cross.assign(opt.s + 1, 0.0);
    r.h.assign(opt.s + 1, 0.0);
    CVec Rs(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) Rs[i] = in.R1[0][i] + in.R1[1][i];
    for (int l = 0; l <= opt.s; ++l) {
        double quad = 0.0, cr = 0.0;
        for (int a = 0; a < 2; ++a) {
            const CVec d0 = dl(in.R0[a], l), d1 = dl(in.R1[a], l);
            quad += 0.5 * (real_inner(g, d0, d0) + real_inner(g, d1, d1));
            cr += e * real_inner(g, d1, dl(cross_src[a], l));
        }
        r.E[l] = quad + cr;
        r.cross[l] = cr;
        r.reference += quad;
        if (l >= 1) {
            const RVec dR = inverse_real(g, dl(Rs, l));
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double w = (2.0 * l + 1.0) * curv[i] * 2.0 * P1[i] + Pc[i] * (P1[i] + P2[i] + sgn * qP2[i]);
                acc += w * dR[i] * dR[i];
            }
            r.h[l] = acc * g.dx();
        }
    }
    for (int l = 0; l <= opt.s; ++l) r.total += r.E[l];
    r.modified = r.total;
    for (int l = 1; l <= opt.s; ++l) r.modified += 0.25 * e * e * r.h[l];
    return r;
}

} // namespace nlslab
