#pragma once

// Ion-acoustic dispersion relation omega(k) = k qhat(k) with
// qhat(k) = sqrt((2+k^2)/(1+k^2)), its derivatives, and resonance analysis.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nlslab {

inline double qhat(double k)
{
    const double k2 = k * k;
    return std::sqrt((2.0 + k2) / (1.0 + k2));
}

// dq/dk = -k / (q (1+k^2)^2)
inline double qhat_prime(double k)
{
    const double a = 1.0 + k * k;
    return -k / (qhat(k) * a * a);
}

inline double qhat_double_prime(double k)
{
    const double q = qhat(k);
    const double a = 1.0 + k * k;
    const double qp = qhat_prime(k);
    return -1.0 / (q * a * a) + k * qp / (q * q * a * a) + 4.0 * k * k / (q * a * a * a);
}

inline double omega(double k) { return k * qhat(k); }

inline double omega_prime(double k)
{
    const double a = 1.0 + k * k;
    const double q = qhat(k);
    return q - k * k / (q * a * a);
}

inline double omega_double_prime(double k) { return 2.0 * qhat_prime(k) + k * qhat_double_prime(k); }

// <k>^{-2} = (1+k^2)^{-1}
inline double japanese_inv2(double k) { return 1.0 / (1.0 + k * k); }

struct DispersionPoint {
    double k, q, w, wp, wpp;
};

inline DispersionPoint dispersion_point(double k)
{
    return {k, qhat(k), omega(k), omega_prime(k), omega_double_prime(k)};
}

// -j1 omega(k) - omega(k-m) + j2 omega(m)
inline double resonance_denominator(int j1, int j2, double k, double m)
{
    return -j1 * omega(k) - omega(k - m) + j2 * omega(m);
}

struct NonresonanceReport {
    double k0 = 0.0;
    std::vector<int> harmonics;      // m = 2..mmax
    std::vector<double> gaps;        // min over signs |omega(m k0) -+ m omega(k0)|
    double second_harmonic_same = 0; // |-2 omega0 + omega(2k0)|
    double second_harmonic_opp = 0;  // |-2 omega0 - omega(2k0)|
    double cg_minus = 0;             // |c_g - omega'(0)|
    double cg_plus = 0;              // |c_g + omega'(0)|
    bool all_positive = false;
};

inline NonresonanceReport check_second_harmonic_nonresonance(double k0, int mmax)
{
    if (k0 == 0.0) throw std::invalid_argument("nonresonance check needs k0 != 0");
    if (mmax < 2) throw std::invalid_argument("nonresonance check needs mmax >= 2");
    NonresonanceReport r;
    r.k0 = k0;
    const double w0 = omega(k0);
    bool ok = true;
    for (int m = 2; m <= mmax; ++m) {
        const double wm = omega(m * k0);
        const double g = std::min(std::abs(wm - m * w0), std::abs(wm + m * w0));
        r.harmonics.push_back(m);
        r.gaps.push_back(g);
        ok = ok && g > 0.0;
    }
    r.second_harmonic_same = std::abs(-2.0 * w0 + omega(2.0 * k0));
    r.second_harmonic_opp = std::abs(-2.0 * w0 - omega(2.0 * k0));
    const double cg = omega_prime(k0);
    r.cg_minus = std::abs(cg - omega_prime(0.0));
    r.cg_plus = std::abs(cg + omega_prime(0.0));
    r.all_positive = ok && r.second_harmonic_same > 0 && r.second_harmonic_opp > 0 && r.cg_minus > 0 &&
                     r.cg_plus > 0;
    return r;
}

struct ResonanceRoot {
    double k;
    bool near_zero;
    bool near_k0;
};

// Roots of k -> -j1 omega(k) - omega(k0) + j2 omega(k-k0) on [kmin, kmax]
// (carrier slot fixed at k0): sign-change bracketing plus bisection.
inline std::vector<ResonanceRoot> scan_resonances(int j1, int j2, double k0, double kmin, double kmax,
                                                  double dk_scan = 1e-3, double tol = 1e-10)
{
    auto f = [&](double k) { return resonance_denominator(j1, j2, k, k - k0); };
    std::vector<double> roots;
    const long n = static_cast<long>(std::ceil((kmax - kmin) / dk_scan));
    double a = kmin, fa = f(a);
    for (long i = 1; i <= n; ++i) {
        const double b = std::min(kmax, kmin + static_cast<double>(i) * dk_scan);
        const double fb = f(b);
        if (fa == 0.0) {
            roots.push_back(a);
        } else if (fa * fb < 0.0) {
            double lo = a, hi = b, flo = fa;
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    if (fa == 0.0) roots.push_back(a);
    std::sort(roots.begin(), roots.end());
    std::vector<ResonanceRoot> out;
    for (double r : roots) {
        if (!out.empty() && std::abs(out.back().k - r) < 10 * tol) continue;
        out.push_back({r, std::abs(r) < 1e-6, std::abs(r - k0) < 1e-6});
    }
    return out;
}

// min over 0 < |k| <= width of |denominator| / |k| for the carrier-slot scan;
// positive iff the trivial resonance at k = 0 is simple.
inline double resonance_linear_bound(int j1, int j2, double k0, double width, int samples = 2000)
{
    double c = INFINITY;
    for (int i = 1; i <= samples; ++i) {
        const double k = width * static_cast<double>(i) / samples;
        for (double s : {k, -k}) c = std::min(c, std::abs(resonance_denominator(j1, j2, s, s - k0)) / k);
    }
    return c;
}

} // namespace nlslab
