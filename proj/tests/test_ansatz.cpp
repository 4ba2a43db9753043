#include "nlslab/ansatz.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nlslab;

namespace {

struct Setup {
    double eps;
    PeriodicGrid g;
    NlsCoefficients c;
};

Setup setup(double eps, double periods = 20)
{
    const double L = 2 * kPi * periods;
    return {eps, PeriodicGrid(L, packet_points(L, 1.0)), nls_coefficients(1.0)};
}

Envelope constant_envelope(const Setup& s, cplx a)
{
    return Envelope{PeriodicGrid(s.eps * s.g.length(), 16), 0.0, CVec(16, a)};
}

AnsatzConfig config(double eps, int depth, bool cutoff)
{
    return AnsatzConfig{eps, 1.0, depth, 0.1, cutoff};
}

double max_abs_diff(const RVec& a, const RVec& b)
{
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double band_content(const PeriodicGrid& g, const CVec& s, double centre, double width)
{
    double acc = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.k(i) - centre) <= width) acc += std::norm(s[i]);
    return std::sqrt(acc);
}

} // namespace

TEST(Leading, ZeroAndConstantEnvelope)
{
    const auto s = setup(0.1);
    const auto z = build_leading(constant_envelope(s, 0.0), 0.0, config(0.1, 0, false), s.g, s.c);
    for (std::size_t i = 0; i < s.g.size(); ++i) EXPECT_EQ(z.rho[i], 0.0);
    const auto a = build_leading(constant_envelope(s, 1.0), 0.0, config(0.1, 0, false), s.g, s.c);
    for (std::size_t i = 0; i < s.g.size(); ++i) {
        const double c = std::cos(s.g.x(i));
        EXPECT_NEAR(a.rho[i], 0.2 * c, 1e-13);
        // carrier in U_{-1}: v = +qhat(k0) rho
        EXPECT_NEAR(a.v[i], 0.2 * qhat(1.0) * c, 1e-13);
    }
}

TEST(Leading, LongWaveScaling)
{
    std::vector<double> eps, linf, l2;
    for (double e : {0.1, 0.05}) {
        const auto s = setup(e, 80);
        Envelope A{PeriodicGrid(e * s.g.length(), 256), 0.0, CVec(256)};
        for (std::size_t i = 0; i < 256; ++i) {
            double X = A.grid.x(i);
            if (X >= 0.5 * A.grid.length()) X -= A.grid.length();
            A.a[i] = 1.0 / std::cosh(X);
        }
        const auto a = build_leading(A, 0.0, config(e, 0, false), s.g, s.c);
        double mx = 0;
        for (double v : a.rho) mx = std::max(mx, std::abs(v));
        eps.push_back(e);
        linf.push_back(mx);
        l2.push_back(l2_norm(s.g, CVec(a.rho.begin(), a.rho.end())));
    }
    EXPECT_NEAR(loglog_slope(eps, linf), 1.0, 0.02);
    EXPECT_NEAR(loglog_slope(eps, l2), 0.5, 0.02);
}

TEST(Extended, DepthDifferenceIsSecondOrder)
{
    std::vector<double> eps, diff;
    for (double e : {0.1, 0.05}) {
        const auto s = setup(e);
        const auto A = constant_envelope(s, 0.8);
        const auto a0 = build_ansatz(A, 0.0, config(e, 1, false), s.g, s.c, 0);
        const auto a1 = build_ansatz(A, 0.0, config(e, 1, false), s.g, s.c, 1);
        eps.push_back(e);
        diff.push_back(max_abs_diff(a0.rho, a1.rho));
    }
    EXPECT_NEAR(loglog_slope(eps, diff), 2.0, 1e-6);
}

TEST(Extended, HarmonicHomogeneityAndMeanFlowBand)
{
    const auto s = setup(0.1);
    const auto cfg = config(0.1, 1, false);
    const auto a1 = build_extended(constant_envelope(s, 0.5), 0.0, cfg, s.g, s.c);
    const auto a2 = build_extended(constant_envelope(s, 1.0), 0.0, cfg, s.g, s.c);
    const double h1 = band_content(s.g, a1.u.um, 2.0, 0.05), h2 = band_content(s.g, a2.u.um, 2.0, 0.05);
    EXPECT_NEAR(h2 / h1, 4.0, 1e-10);
    const auto l = build_leading(constant_envelope(s, 1.0), 0.0, cfg, s.g, s.c);
    EXPECT_GT(band_content(s.g, a2.u.up, 0.0, 0.1), 0.0);
    const double total = band_content(s.g, l.u.um, 1.0, 0.1);
    EXPECT_LE(band_content(s.g, l.u.up, 0.0, 0.1) + band_content(s.g, l.u.um, 0.0, 0.1), 1e-13 * total);
}

TEST(Assembly, RealFieldsAndHermitianSpectra)
{
    const auto s = setup(0.1);
    Envelope A{PeriodicGrid(0.1 * s.g.length(), 64), 0.0, CVec(64)};
    for (std::size_t i = 0; i < 64; ++i) A.a[i] = std::polar(1.0 / std::cosh(A.grid.x(i) - 6), 0.4 * A.grid.x(i));
    const auto a = build_extended(A, 3.0, config(0.1, 1, false), s.g, s.c);
    EXPECT_LT(hermitian_defect(s.g, a.u.up), 1e-12);
    EXPECT_LT(hermitian_defect(s.g, a.u.um), 1e-12);
    EXPECT_LT(Field::from_spectrum(s.g, a.u.um).imag_residue(), 1e-12);
}

TEST(Cutoff, BandsIdempotenceAndDisallowedZero)
{
    const auto s = setup(0.1);
    Envelope A{PeriodicGrid(0.1 * s.g.length(), 64), 0.0, CVec(64)};
    for (std::size_t i = 0; i < 64; ++i) A.a[i] = 1.0 / std::cosh(A.grid.x(i) - 6);
    const auto cfg = config(0.1, 1, true);
    const auto a = build_extended(A, 0.0, cfg, s.g, s.c);
    EXPECT_TRUE(a.cutoff_applied);
    const auto mask = band_mask(s.g, 1.0, 0.1, allowed_bands(1));
    for (std::size_t i = 0; i < s.g.size(); ++i)
        if (!mask[i]) EXPECT_EQ(std::abs(a.u.up[i]) + std::abs(a.u.um[i]), 0.0);
    const auto b = fourier_cutoff(a, cfg);
    EXPECT_EQ(b.u.up, a.u.up);
    EXPECT_EQ(b.u.um, a.u.um);
    EXPECT_EQ(b.discarded, a.discarded);
    // a constant envelope is already band limited
    const auto c = build_extended(constant_envelope(s, 1.0), 0.0, cfg, s.g, s.c);
    EXPECT_LE(c.discarded, 1e-12 * std::sqrt(2 * kPi * s.g.dk()) * band_content(s.g, c.u.um, 1.0, 0.1));
}

TEST(Cutoff, DiscardedMassDecaysFast)
{
    // Oracle: the sech transform (1/2)sech(pi K/2) summed over the envelope
    // lattice outside the band, with the eps^(1/2) L2 scaling of eps A(eps x).
    const double periods = 80, delta = 0.1;
    auto oracle = [&](double e) {
        const double dK = 2 * kPi / (e * 2 * kPi * periods);
        double S = 0;
        for (int n = -4000; n <= 4000; ++n) {
            const double K = n * dK;
            if (std::abs(e * K) > delta && std::abs(K) < 200) S += 0.25 / std::pow(std::cosh(kPi * K / 2), 2);
        }
        return std::sqrt(e * dK * S);
    };
    std::vector<double> d;
    for (double e : {0.1, 0.05}) {
        const auto s = setup(e, periods);
        Envelope A{PeriodicGrid(e * s.g.length(), 256), 0.0, CVec(256)};
        for (std::size_t i = 0; i < 256; ++i) {
            double X = A.grid.x(i);
            if (X >= 0.5 * A.grid.length()) X -= A.grid.length();
            A.a[i] = 1.0 / std::cosh(X);
        }
        d.push_back(build_leading(A, 0.0, config(e, 0, true), s.g, s.c).discarded);
    }
    const double expected = oracle(0.1) / oracle(0.05);
    EXPECT_NEAR(d[0] / d[1] / expected, 1.0, 1e-3);
    // faster than eps^2
    EXPECT_GE(d[0] / d[1], 4.0);
}

TEST(Assembly, GaugeConsistency)
{
    const auto s = setup(0.1);
    // band-limited envelope: its spectrum stays clear of k = 0
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    Envelope A{PeriodicGrid(0.1 * s.g.length(), 64), 0.0, CVec(64)};
    CVec ah(64);
    for (long n = -8; n <= 8; ++n) ah[A.grid.slot(n)] = cplx(nd(rng), nd(rng));
    A.a = inverse(A.grid, ah);
    const auto cfg = config(0.1, 0, false);
    const double t = 1.3, dt = 3.7;
    const auto a = build_leading(A, t, cfg, s.g, s.c);
    const auto b = build_leading(A, t + dt, cfg, s.g, s.c);
    const double w = s.c.omega0 - s.c.cg;
    double err = 0, mag = 0;
    for (std::size_t i = 0; i < s.g.size(); ++i) {
        const double k = s.g.k(i);
        const cplx shifted =
            a.u.um[i] * std::polar(1.0, -k * s.c.cg * dt) * std::polar(1.0, -(k > 0 ? 1.0 : -1.0) * w * dt);
        err = std::max(err, std::abs(shifted - b.u.um[i]));
        mag = std::max(mag, std::abs(b.u.um[i]));
    }
    EXPECT_LT(err / mag, 1e-10);
}

TEST(Assembly, RejectsUnderResolvedEnvelope)
{
    const auto s = setup(0.1);
    Envelope A{PeriodicGrid(0.1 * s.g.length(), 8192), 0.0, CVec(8192)};
    EXPECT_THROW(build_leading(A, 0.0, config(0.1, 0, false), s.g, s.c), std::invalid_argument);
    Envelope B{PeriodicGrid(0.2 * s.g.length(), 16), 0.0, CVec(16)};
    EXPECT_THROW(build_leading(B, 0.0, config(0.1, 0, false), s.g, s.c), std::invalid_argument);
    EXPECT_THROW(config(0.3, 0, false).validate(), std::invalid_argument);
    EXPECT_THROW(config(0.1, 2, false).validate(), std::invalid_argument);
}

TEST(Residual, ExactTrajectoryHasDifferencingFloor)
{
    std::mt19937 rng(2);
    std::normal_distribution<double> n;
    const PeriodicGrid g(2 * kPi, 32);
    DiagonalSpectra u0{CVec(32), CVec(32)};
    for (int m = 1; m <= 3; ++m) {
        u0.up[g.slot(m)] = 0.02 * cplx(n(rng), n(rng)) / double(m);
        u0.um[g.slot(m)] = 0.02 * cplx(n(rng), n(rng)) / double(m);
    }
    make_hermitian(g, u0.up);
    make_hermitian(g, u0.um);
    const double h = default_residual_step(1.0);
    Stepper st(g);
    std::vector<DiagonalSpectra> traj{u0};
    for (int i = 0; i < 4; ++i) {
        DiagonalSpectra x = traj.back();
        st.step(x, h);
        traj.push_back(x);
    }
    auto u = [&](double t) { return traj[static_cast<std::size_t>(std::lround(t / h)) + 2]; };
    const auto r = residual(u, g, 0.0, h);
    const auto tend = tendency_diagonal(g, traj[2]);
    EXPECT_LT(residual_norm(g, r, 0.0) / residual_norm(g, tend, 0.0), 1e-8);
}

TEST(Residual, LeadingBandsAndExtendedImprovement)
{
    const double eps = 0.1;
    const auto c = nls_coefficients(1.0);
    const double L = packet_length(eps, 1.0);
    const PeriodicGrid g(L, packet_points(L, 1.0));
    const AnsatzBuilder b(config(eps, 1, false), g, c, sech_envelope(eps, L, 256, soliton_amplitude(c)));
    const auto lead = ansatz_residual(b, 0.0, 0);
    const auto ext = ansatz_residual(b, 0.0, 1);
    auto bands = [&](const DiagonalSpectra& r) {
        const auto a = band_norms(g, r.up, 1.0, 2.0, 3), m = band_norms(g, r.um, 1.0, 2.0, 3);
        std::vector<double> out;
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(std::hypot(a[i], m[i]));
        return out;
    };
    const auto lb = bands(lead);
    EXPECT_GT(std::max(lb[0], lb[2]), lb[1]);
    EXPECT_GT(std::max(lb[0], lb[2]), lb[3]);
    // the corrections remove the eps^2 content of the mean-flow and harmonic bands
    const auto eb = bands(ext);
    EXPECT_LT(eb[0], lb[0]);
    EXPECT_LT(eb[2], lb[2]);
}

TEST(CarrierPhase, ZeroEnvelopeAndSlope)
{
    const auto c = nls_coefficients(1.0);
    const double L = packet_length(0.1, 1.0);
    const PeriodicGrid g(L, packet_points(L, 1.0));
    const AnsatzBuilder z(config(0.1, 1, false), g, c, Envelope{PeriodicGrid(0.1 * L, 64), 0.0, CVec(64)});
    EXPECT_EQ(carrier_phase_norm(z, 0.0, 2.0), 0.0);
    std::vector<double> eps, val;
    for (double e : {0.1, 0.05}) {
        const double Le = packet_length(e, 1.0);
        const PeriodicGrid ge(Le, packet_points(Le, 1.0));
        const AnsatzBuilder b(config(e, 1, false), ge, c, sech_envelope(e, Le, 256, soliton_amplitude(c)));
        eps.push_back(e);
        val.push_back(carrier_phase_norm(b, 0.0, 2.0));
    }
    EXPECT_GE(loglog_slope(eps, val), 1.8);
}

TEST(CarrierPhase, FrozenEnvelopeTaylorRemainder)
{
    // for a single envelope mode at k0 + kappa the surrogate integrand is
    // |omega(k) - omega0 - c_g kappa|, quadratic in kappa
    const auto c = nls_coefficients(1.0);
    std::vector<double> kap, rem;
    for (double kappa : {0.08, 0.04, 0.02}) {
        kap.push_back(kappa);
        rem.push_back(std::abs(omega(1.0 + kappa) - c.omega0 - c.cg * kappa));
    }
    EXPECT_NEAR(loglog_slope(kap, rem), 2.0, 0.1);
}
