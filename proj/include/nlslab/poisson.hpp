#pragma once

// Nonlinear Poisson equation phi'' = e^phi - n: Newton-Krylov solve and the
// small-density expansion phi = B rho - B[(B rho)^2]/2 + M(rho), B = (1-d^2)^{-1}.

#include "spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlslab {

struct PoissonSolution {
    RVec phi;
    int iterations = 0;              // residual evaluations
    double residual = 0.0;           // discrete L2 norm of phi'' - e^phi + n
    std::vector<double> history;     // residual after every evaluation
    int krylov_iterations = 0;       // total inner PCG iterations
};

class PoissonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Spectral second derivative; the Nyquist mode is dropped.
inline RVec second_derivative(const PeriodicGrid& g, const RVec& u)
{
    CVec s = forward(g, u);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double k = g.k(i);
        s[i] *= g.is_nyquist(i) ? 0.0 : -k * k;
    }
    return inverse_real(g, s);
}

inline RVec apply_bessel(const PeriodicGrid& g, const RVec& u)
{
    CVec s = forward(g, u);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double k = g.k(i);
        s[i] /= 1.0 + k * k;
    }
    return inverse_real(g, s);
}

inline double discrete_l2(const PeriodicGrid& g, const RVec& u)
{
    double s = 0.0;
    for (double v : u) s += v * v;
    return std::sqrt(s * g.dx());
}

inline double dot(const RVec& a, const RVec& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Preconditioned CG for (-d^2 + w) x = b with w > 0, preconditioner (1-d^2)^{-1}.
inline RVec pcg_helmholtz(const PeriodicGrid& g, const RVec& w, const RVec& b, double rtol, int& iters)
{
    const std::size_t n = b.size();
    RVec x(n, 0.0), r = b;
    RVec z = apply_bessel(g, r);
    RVec p = z;
    double rz = dot(r, z);
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) return x;
    for (int it = 0; it < 200; ++it) {
        RVec Ap = second_derivative(g, p);
        for (std::size_t i = 0; i < n; ++i) Ap[i] = -Ap[i] + w[i] * p[i];
        const double alpha = rz / dot(p, Ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        ++iters;
        if (std::sqrt(dot(r, r)) <= rtol * bnorm) break;
        z = apply_bessel(g, r);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return x;
}

} // namespace detail

inline RVec poisson_residual(const PeriodicGrid& g, const RVec& phi, const RVec& n)
{
    RVec F = detail::second_derivative(g, phi);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] += n[i] - std::exp(phi[i]);
    return F;
}

// Newton iteration on F(phi) = phi'' - e^phi + n.  Each Jacobian system
// (-d^2 + e^phi) delta = F is solved by CG preconditioned with the spectral
// operator (1-d^2)^{-1}, to a forcing tolerance that shrinks with |F| so that
// the outer iteration converges quadratically.
inline PoissonSolution solve_phi(const PeriodicGrid& g, const RVec& n, double tol = 1e-12, int max_iter = 30,
                                 const RVec* initial_guess = nullptr)
{
    if (n.size() != g.size()) throw std::invalid_argument("solve_phi: size mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_phi: tolerance must be positive");
    for (double v : n)
        if (!(v > 0.0)) throw PoissonError("solve_phi: non-positive density");

    PoissonSolution sol;
    if (initial_guess) {
        sol.phi = *initial_guess;
    } else {
        RVec rho(n.size());
        for (std::size_t i = 0; i < n.size(); ++i) rho[i] = n[i] - 1.0;
        sol.phi = detail::apply_bessel(g, rho);
    }
    int stalls = 0;
    double prev = INFINITY;
    for (;;) {
        RVec F = poisson_residual(g, sol.phi, n);
        const double res = detail::discrete_l2(g, F);
        ++sol.iterations;
        sol.history.push_back(res);
        sol.residual = res;
        if (!std::isfinite(res)) throw PoissonError("solve_phi: non-finite residual");
        if (res <= tol) return sol;
        stalls = res > 0.9 * prev ? stalls + 1 : 0;
        if (stalls >= 3) throw PoissonError("solve_phi: divergence (residual not decreasing)");
        if (sol.iterations > max_iter) throw PoissonError("solve_phi: max_iter exceeded");
        prev = res;
        RVec w(n.size());
        for (std::size_t i = 0; i < n.size(); ++i) w[i] = std::exp(sol.phi[i]);
        const double eta = std::max(1e-15, std::min(1e-2, res));
        RVec delta = detail::pcg_helmholtz(g, w, F, eta, sol.krylov_iterations);
        for (std::size_t i = 0; i < n.size(); ++i) sol.phi[i] += delta[i];
    }
}

inline PoissonSolution solve_phi(const Field& n, double tol = 1e-12, int max_iter = 30)
{
    return solve_phi(n.grid(), n.real(), tol, max_iter);
}

// Order-by-order inversion: order 1 gives B rho, order 2 adds -B[(B rho)^2]/2,
// order 3 adds B(B rho B[(B rho)^2]/2 - (B rho)^3/6) (from iterating
// (1-d^2) phi = rho - phi^2/2 - phi^3/6 - ...).
inline RVec phi_expansion(const PeriodicGrid& g, const RVec& rho, int order)
{
    if (order < 1 || order > 3) throw std::invalid_argument("phi_expansion: unsupported order");
    const RVec b1 = detail::apply_bessel(g, rho);
    if (order == 1) return b1;
    RVec sq(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) sq[i] = b1[i] * b1[i];
    const RVec bsq = detail::apply_bessel(g, sq);
    RVec out(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] = b1[i] - 0.5 * bsq[i];
    if (order == 2) return out;
    RVec c(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) c[i] = 0.5 * b1[i] * bsq[i] - b1[i] * b1[i] * b1[i] / 6.0;
    const RVec bc = detail::apply_bessel(g, c);
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] += bc[i];
    return out;
}

inline Field phi_expansion(const Field& rho, int order)
{
    return Field::from_real(rho.grid(), phi_expansion(rho.grid(), rho.real(), order));
}

// M(rho) = phi(1+rho) - (B rho - B[(B rho)^2]/2), with phi from solve_phi.
inline RVec M_remainder(const PeriodicGrid& g, const RVec& rho, double tol = 1e-13)
{
    RVec n(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) n[i] = 1.0 + rho[i];
    const auto sol = solve_phi(g, n, tol, 50);
    const RVec e2 = phi_expansion(g, rho, 2);
    RVec m(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) m[i] = sol.phi[i] - e2[i];
    return m;
}

} // namespace nlslab
