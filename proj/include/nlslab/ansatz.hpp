#pragma once

// Modulated wave-packet approximations in diagonal variables:
//   U_{-1} = eps (A E + c.c.) + eps^2 [r0_{-1} |A|^2 + r2_{-1} (A^2 E^2 + c.c.)]
//   U_{+1} =                    eps^2 [r0_{+1} |A|^2 + r2_{+1} (A^2 E^2 + c.c.)]
// with E = e^{i(k0 x - omega0 t)}, A = A(eps(x - c_g t), eps^2 t).  Depth 0
// keeps only the eps terms.  Residuals are computed through the simulator's
// own right-hand side.

#include "euler_poisson.hpp"
#include "nls.hpp"
#include "spectral.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace nlslab {

struct AnsatzConfig {
    double eps = 0.1;
    double k0 = 1.0;
    int depth = 1;
    double delta = 0.1;
    bool cutoff = true;

    void validate() const
    {
        if (!(eps > 0.0 && eps <= 0.2)) throw std::invalid_argument("ansatz: eps must lie in (0, 0.2]");
        if (k0 == 0.0) throw std::invalid_argument("ansatz: k0 = 0");
        if (depth != 0 && depth != 1) throw std::invalid_argument("ansatz: depth must be 0 or 1");
        if (!(delta > 0.0 && delta < std::abs(k0) / 8.0))
            throw std::invalid_argument("ansatz: delta must lie in (0, |k0|/8)");
    }
};

struct Approximation {
    PeriodicGrid grid;
    double t = 0.0;
    DiagonalSpectra u;
    RVec rho, v;
    int depth = 0;
    bool cutoff_applied = false;
    double discarded = 0.0; // L2 norm of the (U1, U-1) content removed by the cutoff
};

// Signed lattice index of k0; throws unless k0 is a lattice wavenumber.
inline long carrier_index(const PeriodicGrid& g, double k0)
{
    const double r = k0 / g.dk();
    const long n = std::lround(r);
    if (std::abs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, std::abs(r)))
        throw std::invalid_argument("carrier wavenumber is not on the lattice");
    return n;
}

// Samples of A(eps(x - c_g t)) on the physical grid.  The slow grid must have
// length eps L so that both lattices coincide; each envelope mode is moved to
// the same physical mode and advected exactly.
inline CVec interpolate_envelope(const Envelope& A, const PeriodicGrid& g, double eps, double cg, double t, long n0)
{
    const PeriodicGrid& s = A.grid;
    if (std::abs(s.length() - eps * g.length()) > 1e-12 * g.length())
        throw std::invalid_argument("envelope grid length must equal eps * L");
    if (static_cast<long>(s.size() / 2) + 2 * std::labs(n0) >= static_cast<long>(g.size() / 2))
        throw std::invalid_argument("physical grid too coarse for envelope and second harmonic");
    const CVec ah = forward(s, A.a);
    CVec big(g.size());
    const double dk = g.dk();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.is_nyquist(i)) continue;
        const long n = s.mode(i);
        big[g.slot(n)] = ah[i] / eps * std::polar(1.0, -static_cast<double>(n) * dk * cg * t);
    }
    return inverse(g, big);
}

// Mask of the allowed bands |k - j k0| <= delta for j in the given set.
inline std::vector<char> band_mask(const PeriodicGrid& g, double k0, double delta, const std::vector<int>& bands)
{
    std::vector<char> m(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double k = g.k(i);
        for (int j : bands)
            if (std::abs(k - j * k0) <= delta * (1.0 + 1e-12)) m[i] = 1;
    }
    return m;
}

inline std::vector<int> allowed_bands(int depth)
{
    return depth == 0 ? std::vector<int>{-1, 1} : std::vector<int>{-2, -1, 0, 1, 2};
}

inline Approximation assemble(const PeriodicGrid& g, double t, const CVec& up, const CVec& um, int depth)
{
    Approximation a;
    a.grid = g;
    a.t = t;
    a.depth = depth;
    a.u = {forward(g, up), forward(g, um)};
    for (auto* s : {&a.u.up, &a.u.um}) {
        (*s)[g.nyquist_slot()] = 0.0;
        make_hermitian(g, *s);
    }
    const auto [r, v] = undiagonalize_spectra(g, a.u);
    a.rho = inverse_real(g, r);
    a.v = inverse_real(g, v);
    return a;
}

inline Approximation fourier_cutoff(const Approximation& in, const AnsatzConfig& cfg)
{
    const PeriodicGrid& g = in.grid;
    const auto mask = band_mask(g, cfg.k0, cfg.delta, allowed_bands(in.depth));
    Approximation a = in;
    double removed = 0.0;
    for (auto* s : {&a.u.up, &a.u.um})
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!mask[i]) {
                removed += std::norm((*s)[i]);
                (*s)[i] = 0.0;
            }
    const auto [r, v] = undiagonalize_spectra(g, a.u);
    a.rho = inverse_real(g, r);
    a.v = inverse_real(g, v);
    a.cutoff_applied = true;
    a.discarded = std::sqrt(in.discarded * in.discarded + 2.0 * kPi * removed * g.dk());
    return a;
}

// Builds the approximation from an envelope given at slow time eps^2 t.
inline Approximation build_ansatz(const Envelope& A, double t, const AnsatzConfig& cfg, const PeriodicGrid& g,
                                  const NlsCoefficients& c, int depth)
{
    cfg.validate();
    const long n0 = carrier_index(g, cfg.k0);
    const CVec a = interpolate_envelope(A, g, cfg.eps, c.cg, t, n0);
    const double eps = cfg.eps;
    CVec up(g.size()), um(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx E = std::polar(1.0, cfg.k0 * g.x(i) - c.omega0 * t);
        const cplx aE = a[i] * E;
        um[i] = eps * 2.0 * aE.real();
        if (depth >= 1) {
            const double mod2 = std::norm(a[i]);
            const double harm = 2.0 * (aE * aE).real();
            um[i] += eps * eps * (c.r0(-1) * mod2 + c.r2(-1) * harm);
            up[i] += eps * eps * (c.r0(1) * mod2 + c.r2(1) * harm);
        }
    }
    Approximation out = assemble(g, t, up, um, depth);
    return cfg.cutoff ? fourier_cutoff(out, cfg) : out;
}

inline Approximation build_leading(const Envelope& A, double t, const AnsatzConfig& cfg, const PeriodicGrid& g,
                                   const NlsCoefficients& c)
{
    return build_ansatz(A, t, cfg, g, c, 0);
}

inline Approximation build_extended(const Envelope& A, double t, const AnsatzConfig& cfg, const PeriodicGrid& g,
                                    const NlsCoefficients& c)
{
    return build_ansatz(A, t, cfg, g, c, 1);
}

// Time-dependent approximation: envelope co-evolved by the NLS flow with the
// given coefficients (nu2 may be overridden, e.g. to perturb it).
class AnsatzBuilder {
public:
    AnsatzBuilder(AnsatzConfig cfg, PeriodicGrid g, NlsCoefficients c, Envelope A0, double t0 = 0.0)
        : cfg_(cfg), g_(g), c_(c), nu2_(c.nu2), A0_(std::move(A0)), t0_(t0)
    {
        cfg_.validate();
        A0_.T = cfg_.eps * cfg_.eps * t0;
    }

    void set_nu2(double nu2) { nu2_ = nu2; }
    double nu2() const { return nu2_; }
    const AnsatzConfig& config() const { return cfg_; }
    const PeriodicGrid& grid() const { return g_; }
    const NlsCoefficients& coefficients() const { return c_; }

    Envelope envelope_at(double t, double max_dT = 1e-3) const
    {
        return evolve_envelope(A0_, c_.nu1, nu2_, cfg_.eps * cfg_.eps * t, max_dT);
    }

    Approximation at(double t, int depth) const { return build_ansatz(envelope_at(t), t, cfg_, g_, c_, depth); }
    Approximation at(double t) const { return at(t, cfg_.depth); }

    // Complex carrier-band field psi_1 = A E (no eps factor), band-limited to
    // |k - k0| <= delta when the cutoff is enabled.
    CVec psi1_spectrum(double t) const
    {
        const Envelope A = envelope_at(t);
        const long n0 = carrier_index(g_, cfg_.k0);
        CVec a = interpolate_envelope(A, g_, cfg_.eps, c_.cg, t, n0);
        for (std::size_t i = 0; i < g_.size(); ++i) a[i] *= std::polar(1.0, cfg_.k0 * g_.x(i) - c_.omega0 * t);
        CVec s = forward(g_, a);
        if (cfg_.cutoff) {
            const auto mask = band_mask(g_, cfg_.k0, cfg_.delta, {1});
            for (std::size_t i = 0; i < s.size(); ++i)
                if (!mask[i]) s[i] = 0.0;
        }
        return s;
    }

private:
    AnsatzConfig cfg_;
    PeriodicGrid g_;
    NlsCoefficients c_;
    double nu2_;
    Envelope A0_;
    double t0_;
};

// ---------------------------------------------------------------------------
// Residuals.

template <class F>
inline auto central_derivative4(F&& f, double t, double h)
{
    auto a = f(t - 2 * h), b = f(t - h), c = f(t + h), d = f(t + 2 * h);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * h);
    return a;
}

// Res(U) = -d_t U + Lambda U + N(U) in diagonal variables, with d_t U from a
// fourth-order central difference of the trajectory u(t).
inline DiagonalSpectra residual(const std::function<DiagonalSpectra(double)>& u, const PeriodicGrid& g, double t,
                                double h, const RhsOptions& opt = {})
{
    auto dup = central_derivative4([&](double s) { return u(s).up; }, t, h);
    auto dum = central_derivative4([&](double s) { return u(s).um; }, t, h);
    DiagonalSpectra r = tendency_diagonal(g, u(t), opt);
    for (std::size_t i = 0; i < g.size(); ++i) {
        r.up[i] -= dup[i];
        r.um[i] -= dum[i];
    }
    r.up[g.nyquist_slot()] = 0.0;
    r.um[g.nyquist_slot()] = 0.0;
    return r;
}

inline double default_residual_step(double k0) { return 1e-3 * 2.0 * kPi / omega(k0); }

inline DiagonalSpectra ansatz_residual(const AnsatzBuilder& b, double t, int depth)
{
    auto u = [&](double s) { return b.at(s, depth).u; };
    return residual(u, b.grid(), t, default_residual_step(b.config().k0));
}

// H^s norms over the harmonic bands ||k| - n|k0|| <= |k0|/2, n = 0..nmax.
inline std::vector<double> band_norms(const PeriodicGrid& g, const CVec& spec, double k0, double s, int nmax)
{
    std::vector<double> acc(static_cast<std::size_t>(nmax) + 1, 0.0);
    const double a = std::abs(k0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double k = std::abs(g.k(i));
        const long n = std::lround(k / a);
        if (n > nmax) continue;
        acc[static_cast<std::size_t>(n)] += std::norm(spec[i]) * std::pow(1.0 + k * k, s);
    }
    for (auto& v : acc) v = std::sqrt(2.0 * kPi * v * g.dk());
    return acc;
}

inline double residual_norm(const PeriodicGrid& g, const DiagonalSpectra& r, double s)
{
    const double a = sobolev_norm(g, r.up, s), b = sobolev_norm(g, r.um, s);
    return std::sqrt(a * a + b * b);
}

// ---------------------------------------------------------------------------
// Domain policy for packets and initial envelopes.

// L = max(40/eps, 20 * 2pi/|k0|), rounded up to a whole number of carrier periods.
inline double packet_length(double eps, double k0)
{
    const double lam = 2.0 * kPi / std::abs(k0);
    const double L = std::max(40.0 / eps, 20.0 * lam);
    return std::ceil(L / lam - 1e-9) * lam;
}

// Smallest power of two giving >= 8 points per wavelength of 4 k0.
inline std::size_t packet_points(double L, double k0)
{
    const double need = 8.0 * L * 4.0 * std::abs(k0) / (2.0 * kPi);
    std::size_t n = 16;
    while (static_cast<double>(n) < need) n *= 2;
    return n;
}

// Envelope A(X) = a sech(X) on the slow grid of length eps L.  With
// a = sqrt(2 nu1/nu2) this is the stationary NLS soliton.
inline Envelope sech_envelope(double eps, double L, std::size_t NX, double amp)
{
    PeriodicGrid s(eps * L, NX);
    Envelope e{s, 0.0, CVec(NX)};
    const double LX = s.length();
    for (std::size_t i = 0; i < NX; ++i) {
        double X = s.x(i);
        if (X >= 0.5 * LX) X -= LX;
        e.a[i] = amp / std::cosh(X);
    }
    return e;
}

inline double soliton_amplitude(const NlsCoefficients& c)
{
    if (!(c.nu1 * c.nu2 > 0.0)) throw std::invalid_argument("no bright soliton: nu1 nu2 <= 0");
    return std::sqrt(2.0 * c.nu1 / c.nu2);
}

// ---------------------------------------------------------------------------
// Carrier phase surrogate: int |d_t psi1^ + i omega psi1^| (1+|k|)^s dk.

inline double carrier_phase_norm(const AnsatzBuilder& b, double t, double s)
{
    const PeriodicGrid& g = b.grid();
    const double h = default_residual_step(b.config().k0);
    const CVec d = central_derivative4([&](double tt) { return b.psi1_spectrum(tt); }, t, h);
    const CVec p = b.psi1_spectrum(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double k = g.k(i);
        acc += std::abs(d[i] + cplx(0.0, omega(k)) * p[i]) * std::pow(1.0 + std::abs(k), s);
    }
    return acc * g.dk();
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace nlslab
