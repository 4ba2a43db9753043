#pragma once

// Ion Euler-Poisson system in perturbation variables rho = n - 1, v:
//   d_t rho = -d(v + rho v)
//   d_t v   = -d phi - d(v^2/2) - d ln(1+rho),   phi'' = e^phi - (1+rho).
// Diagonal variables U_{+-1} = (rho -+ q^{-1} v)/2 turn the linear part into
// d_t U_j = j i omega(k) U_j; the integrator is integrating-factor RK4 in U.

#include "dispersion.hpp"
#include "poisson.hpp"
#include "spectral.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nlslab {

struct PlasmaState {
    PeriodicGrid grid;
    double t = 0.0;
    RVec rho;
    RVec v;
};

struct DiagonalSpectra {
    CVec up; // U_{+1}
    CVec um; // U_{-1}
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Diagonalisation with S = [[1, 1], [-q, q]].

inline DiagonalSpectra diagonalize_spectra(const PeriodicGrid& g, const CVec& rho_h, const CVec& v_h)
{
    DiagonalSpectra d{CVec(g.size()), CVec(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double q = qhat(g.k(i));
        d.up[i] = 0.5 * (rho_h[i] - v_h[i] / q);
        d.um[i] = 0.5 * (rho_h[i] + v_h[i] / q);
    }
    return d;
}

inline std::pair<CVec, CVec> undiagonalize_spectra(const PeriodicGrid& g, const DiagonalSpectra& d)
{
    CVec rho(g.size()), v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double q = qhat(g.k(i));
        rho[i] = d.up[i] + d.um[i];
        v[i] = -q * (d.up[i] - d.um[i]);
    }
    return {rho, v};
}

inline std::pair<Field, Field> diagonalize(const Field& rho, const Field& v)
{
    require_same_grid(rho.grid(), v.grid());
    const auto d = diagonalize_spectra(rho.grid(), rho.spectrum(), v.spectrum());
    return {Field::from_spectrum(rho.grid(), d.up), Field::from_spectrum(rho.grid(), d.um)};
}

inline std::pair<Field, Field> undiagonalize(const Field& up, const Field& um)
{
    require_same_grid(up.grid(), um.grid());
    const auto [r, v] = undiagonalize_spectra(up.grid(), {up.spectrum(), um.spectrum()});
    return {Field::from_spectrum(up.grid(), r), Field::from_spectrum(up.grid(), v)};
}

// ---------------------------------------------------------------------------
// Right-hand side.

struct RhsOptions {
    double poisson_tol = 1e-12;
    int poisson_max_iter = 30;
    bool linear_only = false;
};

// Nonlinear parts (N_rho, N_v) of the primitive tendency, as spectra:
//   N_rho = -d(rho v),  N_v = -d[(phi - B rho) + v^2/2 + (ln(1+rho) - rho)].
// Products are evaluated on the 3/2-padded grid.  phi_guess (if non-null) seeds
// the Poisson solve and receives the converged potential.
inline std::pair<CVec, CVec> nonlinear_terms(const PeriodicGrid& g, const CVec& rho_h, const CVec& v_h,
                                             const RhsOptions& opt, RVec* phi_guess = nullptr)
{
    const std::size_t N = g.size();
    const RVec rho = inverse_real(g, rho_h);
    RVec n(N);
    for (std::size_t i = 0; i < N; ++i) {
        n[i] = 1.0 + rho[i];
        if (!(n[i] > 0.0)) throw SimulationError("density lost positivity");
    }
    const bool use_guess = phi_guess && phi_guess->size() == N;
    PoissonSolution ps = solve_phi(g, n, opt.poisson_tol, opt.poisson_max_iter, use_guess ? phi_guess : nullptr);
    CVec phi_h = forward(g, ps.phi);
    if (phi_guess) *phi_guess = std::move(ps.phi);

    const std::size_t M = padded_size(g);
    const CVec rp = padded_samples(g, rho_h, M);
    const CVec vp = padded_samples(g, v_h, M);
    CVec flux_rho(M), flux_v(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double r = rp[i].real(), u = vp[i].real();
        flux_rho[i] = r * u;
        flux_v[i] = 0.5 * u * u + (std::log1p(r) - r);
    }
    const CVec fr = spectrum_from_padded(g, flux_rho);
    const CVec fv = spectrum_from_padded(g, flux_v);
    CVec nr(N), nv(N);
    for (std::size_t i = 0; i < N; ++i) {
        if (g.is_nyquist(i)) continue;
        const double k = g.k(i);
        const cplx ik(0.0, k);
        const cplx phi_nl = phi_h[i] - rho_h[i] / (1.0 + k * k);
        nr[i] = -ik * fr[i];
        nv[i] = -ik * (phi_nl + fv[i]);
    }
    return {nr, nv};
}

// Full primitive tendency (d_t rho, d_t v) as spectra.
inline std::pair<CVec, CVec> rhs_spectra(const PeriodicGrid& g, const CVec& rho_h, const CVec& v_h,
                                         const RhsOptions& opt = {}, RVec* phi_guess = nullptr)
{
    CVec dr(g.size()), dv(g.size());
    if (!opt.linear_only) std::tie(dr, dv) = nonlinear_terms(g, rho_h, v_h, opt, phi_guess);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.is_nyquist(i)) continue;
        const double k = g.k(i);
        const double q = qhat(k);
        const cplx ik(0.0, k);
        dr[i] += -ik * v_h[i];
        dv[i] += -ik * q * q * rho_h[i];
    }
    return {dr, dv};
}

inline std::pair<RVec, RVec> rhs(const PlasmaState& s, const RhsOptions& opt = {})
{
    const auto [dr, dv] = rhs_spectra(s.grid, forward(s.grid, s.rho), forward(s.grid, s.v), opt);
    return {inverse_real(s.grid, dr), inverse_real(s.grid, dv)};
}

// Full tendency in diagonal variables: d_t U_j = j i omega U_j + N_j.
inline DiagonalSpectra tendency_diagonal(const PeriodicGrid& g, const DiagonalSpectra& u, const RhsOptions& opt = {},
                                         RVec* phi_guess = nullptr)
{
    const auto [rho_h, v_h] = undiagonalize_spectra(g, u);
    const auto [dr, dv] = rhs_spectra(g, rho_h, v_h, opt, phi_guess);
    return diagonalize_spectra(g, dr, dv);
}

// ---------------------------------------------------------------------------
// Integrating-factor RK4.

struct StepperOptions {
    RhsOptions rhs;
    double linf_ceiling = 0.9; // abort if max|rho| or max|v| exceeds this
    double max_cfl = 2.0;      // dt <= max_cfl * dx for the nonlinear flow
};

class Stepper {
public:
    Stepper(const PeriodicGrid& g, StepperOptions opt = {}) : g_(g), opt_(opt)
    {
        w_.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) w_[i] = g.is_nyquist(i) ? 0.0 : omega(g.k(i));
    }

    const PeriodicGrid& grid() const { return g_; }
    const StepperOptions& options() const { return opt_; }

    // Nonlinear part N_j in diagonal variables.
    DiagonalSpectra nonlinear(const DiagonalSpectra& u)
    {
        DiagonalSpectra out{CVec(g_.size()), CVec(g_.size())};
        if (opt_.rhs.linear_only) return out;
        const auto [rho_h, v_h] = undiagonalize_spectra(g_, u);
        const auto [nr, nv] = nonlinear_terms(g_, rho_h, v_h, opt_.rhs, &phi_guess_);
        return diagonalize_spectra(g_, nr, nv);
    }

    // One IFRK4 step of size dt on diagonal spectra (in place).
    void step(DiagonalSpectra& u, double dt)
    {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("step: dt must be positive");
        if (!opt_.rhs.linear_only && dt > opt_.max_cfl * g_.dx())
            throw std::invalid_argument("step: dt exceeds the stability bound");
        const std::size_t N = g_.size();
        CVec eph(N), emh(N), epf(N), emf(N);
        for (std::size_t i = 0; i < N; ++i) {
            eph[i] = std::polar(1.0, w_[i] * 0.5 * dt);
            epf[i] = std::polar(1.0, w_[i] * dt);
            emh[i] = std::conj(eph[i]);
            emf[i] = std::conj(epf[i]);
        }
        auto lin = [&](const DiagonalSpectra& a, const CVec& ep, const CVec& em) {
            DiagonalSpectra r{CVec(N), CVec(N)};
            for (std::size_t i = 0; i < N; ++i) {
                r.up[i] = ep[i] * a.up[i];
                r.um[i] = em[i] * a.um[i];
            }
            return r;
        };
        auto axpy = [&](const DiagonalSpectra& a, double s, const DiagonalSpectra& b) {
            DiagonalSpectra r = a;
            for (std::size_t i = 0; i < N; ++i) {
                r.up[i] += s * b.up[i];
                r.um[i] += s * b.um[i];
            }
            return r;
        };
        const DiagonalSpectra k1 = nonlinear(u);
        const DiagonalSpectra uh = lin(u, eph, emh);
        const DiagonalSpectra k2 = nonlinear(lin(axpy(u, 0.5 * dt, k1), eph, emh));
        const DiagonalSpectra k3 = nonlinear(axpy(uh, 0.5 * dt, k2));
        const DiagonalSpectra k4 = nonlinear(axpy(lin(u, epf, emf), dt, lin(k3, eph, emh)));
        const DiagonalSpectra uf = lin(u, epf, emf);
        const DiagonalSpectra k1f = lin(k1, epf, emf);
        const DiagonalSpectra k23 = lin(axpy(k2, 1.0, k3), eph, emh);
        for (std::size_t i = 0; i < N; ++i) {
            u.up[i] = uf.up[i] + dt / 6.0 * (k1f.up[i] + 2.0 * k23.up[i] + k4.up[i]);
            u.um[i] = uf.um[i] + dt / 6.0 * (k1f.um[i] + 2.0 * k23.um[i] + k4.um[i]);
            if (!std::isfinite(u.up[i].real()) || !std::isfinite(u.um[i].real()) || !std::isfinite(u.up[i].imag()) ||
                !std::isfinite(u.um[i].imag()))
                throw SimulationError("step: non-finite state");
        }
        u.up[g_.nyquist_slot()] = 0.0;
        u.um[g_.nyquist_slot()] = 0.0;
    }

    PlasmaState step(const PlasmaState& s, double dt)
    {
        require_same_grid(s.grid, g_);
        DiagonalSpectra u = diagonalize_spectra(g_, forward(g_, s.rho), forward(g_, s.v));
        step(u, dt);
        return to_state(u, s.t + dt);
    }

    PlasmaState to_state(const DiagonalSpectra& u, double t) const
    {
        const auto [r, v] = undiagonalize_spectra(g_, u);
        return {g_, t, inverse_real(g_, r), inverse_real(g_, v)};
    }

private:
    PeriodicGrid g_;
    StepperOptions opt_;
    RVec w_;
    RVec phi_guess_;
};

// ---------------------------------------------------------------------------
// Driver.

using Observer = std::function<void(const PlasmaState&)>;

struct SimulationSummary {
    PlasmaState final_state;
    std::size_t steps = 0;
    std::size_t records = 0;
};

inline double max_abs(const RVec& a)
{
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

// Advances to T with fixed dt (last step shortened), calling the observer at
// step 0, every `cadence` steps and at the final time.
inline SimulationSummary simulate(const PlasmaState& init, double T, double dt, const Observer& observer = {},
                                  std::size_t cadence = 1, StepperOptions opt = {})
{
    if (T < 0.0) throw std::invalid_argument("simulate: negative horizon");
    if (cadence == 0) throw std::invalid_argument("simulate: cadence must be positive");
    SimulationSummary out;
    Stepper stepper(init.grid, opt);
    const PeriodicGrid& g = init.grid;
    DiagonalSpectra u = diagonalize_spectra(g, forward(g, init.rho), forward(g, init.v));
    auto emit = [&](const PlasmaState& s) {
        if (observer) observer(s);
        ++out.records;
    };
    emit(init);
    if (T == 0.0) {
        out.final_state = init;
        return out;
    }
    const std::size_t nsteps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    double t = init.t;
    for (std::size_t n = 1; n <= nsteps; ++n) {
        const double h = n < nsteps ? dt : (init.t + T) - t;
        if (h > 0.0) stepper.step(u, h);
        t = n < nsteps ? init.t + static_cast<double>(n) * dt : init.t + T;
        const bool record = (n % cadence == 0) || n == nsteps;
        const bool check = record || n % 16 == 0;
        if (check) {
            PlasmaState s = stepper.to_state(u, t);
            if (max_abs(s.rho) > opt.linf_ceiling || max_abs(s.v) > opt.linf_ceiling)
                throw SimulationError("simulate: amplitude exceeded the instability ceiling");
            if (record) emit(s);
            if (n == nsteps) out.final_state = std::move(s);
        }
    }
    out.steps = nsteps;
    return out;
}

// ---------------------------------------------------------------------------
// Diagnostics.

inline double mass(const PlasmaState& s) { return integrate(s.grid, s.rho); }

inline double state_sobolev_norm(const PlasmaState& s, double sidx)
{
    const double a = sobolev_norm(s.grid, forward(s.grid, s.rho), sidx);
    const double b = sobolev_norm(s.grid, forward(s.grid, s.v), sidx);
    return std::sqrt(a * a + b * b);
}

// Fraction of int rho^2 lying in the 10% of the cell farthest (periodically)
// from the given centre.
inline double tail_mass(const PeriodicGrid& g, const RVec& rho, double centre)
{
    const double L = g.length();
    double tot = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double d = std::fmod(g.x(i) - centre, L);
        if (d < 0) d += L;
        d = std::min(d, L - d);
        const double e = rho[i] * rho[i];
        tot += e;
        if (d > 0.45 * L) tail += e;
    }
    return tot > 0.0 ? tail / tot : 0.0;
}

} // namespace nlslab
