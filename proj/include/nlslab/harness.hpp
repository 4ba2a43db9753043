#pragma once

// Experiment orchestration: configuration, the convergence sweep, residual
// and dispersion studies, the energy diagnostic, CSV output and plot scripts.

#include "ansatz.hpp"
#include "dispersion.hpp"
#include "euler_poisson.hpp"
#include "io.hpp"
#include "nls.hpp"
#include "normal_form.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace nlslab {

// ---------------------------------------------------------------------------
// Configuration.

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    double k0 = 1.0;
    std::vector<double> epsilons{0.1, 0.07, 0.05};
    double s = 2.0;
    double T0 = 1.0;
    double L_per_inv_eps = 40.0; // L = max(c/eps_min, 20 wavelengths), shared by the sweep
    std::size_t N = 0;           // 0: smallest power of two resolving 4 k0 with 8 points
    double cfl = 0.5;            // dt = cfl dx
    int depth = 1;
    bool cutoff = false;
    double delta = 0.1;
    std::uint64_t seed = 1;
    std::string outdir = "out";
    std::size_t max_steps = 2000000;

    bool operator==(const ExperimentConfig&) const = default;

    double length(double eps) const
    {
        const double lam = 2.0 * kPi / std::abs(k0);
        const double e = epsilons.empty() ? eps : std::min(eps, *std::min_element(epsilons.begin(), epsilons.end()));
        const double L = std::max(L_per_inv_eps / e, 20.0 * lam);
        return std::ceil(L / lam - 1e-9) * lam;
    }
    std::size_t points(double eps) const { return N ? N : packet_points(length(eps), k0); }
    PeriodicGrid grid(double eps) const { return PeriodicGrid(length(eps), points(eps)); }
    double horizon(double eps) const { return T0 / (eps * eps); }

    void validate() const
    {
        if (k0 == 0.0) throw ConfigError("k0 must be nonzero");
        if (epsilons.empty()) throw ConfigError("epsilons must not be empty");
        for (std::size_t i = 0; i < epsilons.size(); ++i) {
            if (!(epsilons[i] > 0.0 && epsilons[i] <= 0.2)) throw ConfigError("epsilons must lie in (0, 0.2]");
            if (i && !(epsilons[i] < epsilons[i - 1])) throw ConfigError("epsilons must be sorted descending");
        }
        if (s < 0.0) throw ConfigError("s must be >= 0");
        if (T0 < 0.0) throw ConfigError("T0 must be >= 0");
        if (!(cfl > 0.0 && cfl <= 2.0)) throw ConfigError("dt.cfl must lie in (0, 2]");
        if (depth != 0 && depth != 1) throw ConfigError("ansatz.depth must be 0 or 1");
        if (!(delta > 0.0 && delta < std::abs(k0) / 8.0)) throw ConfigError("delta must lie in (0, |k0|/8)");
        for (double e : epsilons) {
            const PeriodicGrid g = grid(e);
            if (static_cast<double>(g.size()) * 2.0 * kPi / g.length() < 8.0 * 4.0 * std::abs(k0) - 1e-9)
                throw ConfigError("grid.N does not resolve 4 k0 with 8 points per wavelength");
            const double steps = horizon(e) / (cfl * g.dx());
            if (steps > static_cast<double>(max_steps)) throw ConfigError("T0/eps^2 exceeds the max_steps guard");
        }
    }
};

inline std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& key, const std::string& v)
{
    std::size_t pos = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("bad value for key '" + key + "': " + v);
    }
    if (pos != v.size()) throw ConfigError("bad value for key '" + key + "': " + v);
    return d;
}

inline bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad value for key '" + key + "': " + v);
}

// Key-value text: one "key = value" per line, '#' starts a comment.
inline ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("malformed line: " + line);
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key == "k0") c.k0 = parse_number(key, val);
        else if (key == "epsilons") {
            c.epsilons.clear();
            std::stringstream ss(val);
            std::string item;
            while (std::getline(ss, item, ',')) c.epsilons.push_back(parse_number(key, trim(item)));
        } else if (key == "s") c.s = parse_number(key, val);
        else if (key == "T0") c.T0 = parse_number(key, val);
        else if (key == "grid.L_per_inv_eps") c.L_per_inv_eps = parse_number(key, val);
        else if (key == "grid.N") c.N = static_cast<std::size_t>(parse_number(key, val));
        else if (key == "dt.cfl") c.cfl = parse_number(key, val);
        else if (key == "ansatz.depth") c.depth = static_cast<int>(parse_number(key, val));
        else if (key == "ansatz.cutoff") c.cutoff = parse_bool(key, val);
        else if (key == "delta") c.delta = parse_number(key, val);
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_number(key, val));
        else if (key == "outdir") c.outdir = val;
        else if (key == "max_steps") c.max_steps = static_cast<std::size_t>(parse_number(key, val));
        else throw ConfigError("unknown key: " + key);
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& p)
{
    std::ifstream f(p);
    if (!f) throw ConfigError("cannot read config " + p.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

inline std::string emit_config(const ExperimentConfig& c)
{
    std::string eps;
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) eps += (i ? ", " : "") + format_double(c.epsilons[i]);
    std::ostringstream o;
    o << "k0 = " << format_double(c.k0) << '\n'
      << "epsilons = " << eps << '\n'
      << "s = " << format_double(c.s) << '\n'
      << "T0 = " << format_double(c.T0) << '\n'
      << "grid.L_per_inv_eps = " << format_double(c.L_per_inv_eps) << '\n'
      << "grid.N = " << c.N << '\n'
      << "dt.cfl = " << format_double(c.cfl) << '\n'
      << "ansatz.depth = " << c.depth << '\n'
      << "ansatz.cutoff = " << (c.cutoff ? "true" : "false") << '\n'
      << "delta = " << format_double(c.delta) << '\n'
      << "seed = " << c.seed << '\n'
      << "outdir = " << c.outdir << '\n'
      << "max_steps = " << c.max_steps << '\n';
    return o.str();
}

// ---------------------------------------------------------------------------
// Sweep scheduling.  Each task owns its state; results are stored by index so
// the output does not depend on the execution order.

inline unsigned sweep_threads()
{
    if (const char* e = std::getenv("NLSLAB_THREADS")) {
        const int n = std::atoi(e);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    return 1;
}

template <class R, class Fn>
std::vector<R> run_sweep(std::size_t n, Fn&& fn, unsigned threads)
{
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errs(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i; (i = next++) < n;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < t; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// Shared setup.

inline AnsatzBuilder make_builder(const ExperimentConfig& cfg, double eps, const NlsCoefficients& c)
{
    const PeriodicGrid g = cfg.grid(eps);
    AnsatzConfig ac{eps, cfg.k0, cfg.depth, cfg.delta, cfg.cutoff};
    return AnsatzBuilder(ac, g, c, sech_envelope(eps, g.length(), 256, soliton_amplitude(c)));
}

inline double pair_norm(const PeriodicGrid& g, const RVec& a, const RVec& b, double s)
{
    return std::hypot(sobolev_norm(g, forward(g, a), s), sobolev_norm(g, forward(g, b), s));
}

// ---------------------------------------------------------------------------
// Convergence study.

struct ConvergenceRecord {
    double eps = 0, L = 0;
    std::size_t N = 0, steps = 0;
    double sup_error = 0, t_sup = 0, sup_error_l2 = 0;
    double magnitude = 0; // sup over samples of ||eps Psi||_{H^s}
    double tail = 0;      // density mass in the outer 10% of the domain at the end
    std::vector<double> times, errors, errors_l2;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRecord> records;
    double slope = NAN; // least squares on (log eps, log sup error), >= 3 points
};

inline ConvergenceRecord run_single(const ExperimentConfig& cfg, double eps)
{
    const NlsCoefficients c = nls_coefficients(cfg.k0);
    const AnsatzBuilder b = make_builder(cfg, eps, c);
    const PeriodicGrid& g = b.grid();
    const Approximation a0 = b.at(0.0);
    const PlasmaState init{g, 0.0, a0.rho, a0.v};
    const double T = cfg.horizon(eps), dt = cfg.cfl * g.dx();
    const auto nsteps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    const std::size_t cadence = std::max<std::size_t>(1, nsteps / 64);

    ConvergenceRecord r;
    r.eps = eps;
    r.L = g.length();
    r.N = g.size();
    auto observe = [&](const PlasmaState& st) {
        const Approximation ap = b.at(st.t);
        RVec dr(g.size()), dv(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            dr[i] = st.rho[i] - ap.rho[i];
            dv[i] = st.v[i] - ap.v[i];
        }
        const double e = pair_norm(g, dr, dv, cfg.s), e0 = pair_norm(g, dr, dv, 0.0);
        r.times.push_back(st.t);
        r.errors.push_back(e);
        r.errors_l2.push_back(e0);
        if (e > r.sup_error) {
            r.sup_error = e;
            r.t_sup = st.t;
        }
        r.sup_error_l2 = std::max(r.sup_error_l2, e0);
        r.magnitude = std::max(r.magnitude, pair_norm(g, ap.rho, ap.v, cfg.s));
    };
    const SimulationSummary sum = simulate(init, T, dt, observe, cadence);
    r.steps = sum.steps;
    r.tail = tail_mass(g, sum.final_state.rho, c.cg * T);
    return r;
}

inline ConvergenceStudy run_convergence(const ExperimentConfig& cfg, unsigned threads = sweep_threads())
{
    cfg.validate();
    ConvergenceStudy st;
    st.records = run_sweep<ConvergenceRecord>(
        cfg.epsilons.size(), [&](std::size_t i) { return run_single(cfg, cfg.epsilons[i]); }, threads);
    if (st.records.size() >= 3) {
        std::vector<double> e, y;
        for (const auto& r : st.records) {
            e.push_back(r.eps);
            y.push_back(r.sup_error);
        }
        st.slope = loglog_slope(e, y);
    }
    return st;
}

inline CsvTable convergence_table(const ConvergenceStudy& st)
{
    CsvTable t({"eps", "L", "N", "steps", "sup_error", "t_sup", "sup_error_l2", "magnitude", "tail_mass"});
    for (const auto& r : st.records)
        t.add({r.eps, r.L, static_cast<double>(r.N), static_cast<double>(r.steps), r.sup_error, r.t_sup,
               r.sup_error_l2, r.magnitude, r.tail});
    return t;
}

inline CsvTable convergence_series_table(const ConvergenceStudy& st)
{
    CsvTable t({"eps", "t", "error", "error_l2"});
    for (const auto& r : st.records)
        for (std::size_t i = 0; i < r.times.size(); ++i) t.add({r.eps, r.times[i], r.errors[i], r.errors_l2[i]});
    return t;
}

// ---------------------------------------------------------------------------
// Residual study.

struct ResidualRow {
    double eps = 0;
    double leading = 0, extended = 0; // ||Res||_{H^s}
    double carrier_phase = 0;
    double e1 = 0, e1_perturbed = 0; // E^1 band of Res in the carrier component, nu2 exact / x1.2
};

struct ResidualStudy {
    std::vector<ResidualRow> rows;
    double slope_leading = NAN, slope_extended = NAN, carrier_slope = NAN;
    double gap() const { return slope_extended - slope_leading; }
};

// E^1 band of the depth-1 residual in the carrier component for envelope
// a sech(X / width), with nu2 scaled by nu2_factor.
inline double e1_band_residual(double eps, double k0, double width, double nu2_factor, const NlsOptions& opt = {},
                               double s = 2.0)
{
    const NlsCoefficients c = nls_coefficients(k0, opt);
    const double L = packet_length(eps, k0) * width;
    const PeriodicGrid g(L, packet_points(L, k0));
    const auto nx = static_cast<std::size_t>(256 * std::max(1.0, std::round(width)));
    const double amp = soliton_amplitude(nls_coefficients(k0));
    Envelope A{PeriodicGrid(eps * L, nx), 0.0, CVec(nx)};
    for (std::size_t i = 0; i < nx; ++i) {
        double X = A.grid.x(i);
        if (X >= 0.5 * A.grid.length()) X -= A.grid.length();
        A.a[i] = amp / std::cosh(X / width);
    }
    AnsatzBuilder b(AnsatzConfig{eps, k0, 1, 0.1 * std::abs(k0), false}, g, c, A);
    b.set_nu2(c.nu2 * nu2_factor);
    const DiagonalSpectra r = ansatz_residual(b, 0.0, 1);
    return band_norms(g, r.um, k0, s, 4)[1];
}

inline ResidualRow residual_row(const ExperimentConfig& cfg, double eps)
{
    const NlsCoefficients c = nls_coefficients(cfg.k0);
    ExperimentConfig local = cfg;
    local.cutoff = false; // the cutoff removes most of the envelope at desk-scale eps
    AnsatzBuilder b = make_builder(local, eps, c);
    const PeriodicGrid& g = b.grid();
    ResidualRow r;
    r.eps = eps;
    r.leading = residual_norm(g, ansatz_residual(b, 0.0, 0), cfg.s);
    const DiagonalSpectra ext = ansatz_residual(b, 0.0, 1);
    r.extended = residual_norm(g, ext, cfg.s);
    r.e1 = band_norms(g, ext.um, cfg.k0, cfg.s, 4)[1];
    b.set_nu2(c.nu2 * 1.2);
    r.e1_perturbed = band_norms(g, ansatz_residual(b, 0.0, 1).um, cfg.k0, cfg.s, 4)[1];
    b.set_nu2(c.nu2);
    r.carrier_phase = carrier_phase_norm(b, 0.0, cfg.s);
    return r;
}

inline ResidualStudy run_residual_study(const ExperimentConfig& cfg, unsigned threads = sweep_threads())
{
    cfg.validate();
    ResidualStudy st;
    st.rows = run_sweep<ResidualRow>(
        cfg.epsilons.size(), [&](std::size_t i) { return residual_row(cfg, cfg.epsilons[i]); }, threads);
    if (st.rows.size() >= 2) {
        std::vector<double> e, a, b, p;
        for (const auto& r : st.rows) {
            e.push_back(r.eps);
            a.push_back(r.leading);
            b.push_back(r.extended);
            p.push_back(r.carrier_phase);
        }
        st.slope_leading = loglog_slope(e, a);
        st.slope_extended = loglog_slope(e, b);
        st.carrier_slope = loglog_slope(e, p);
    }
    return st;
}

inline CsvTable residual_table(const ResidualStudy& st)
{
    CsvTable t({"eps", "leading", "extended", "carrier_phase", "e1", "e1_perturbed"});
    for (const auto& r : st.rows) t.add({r.eps, r.leading, r.extended, r.carrier_phase, r.e1, r.e1_perturbed});
    return t;
}

// ---------------------------------------------------------------------------
// Dispersion validation: frequency of a single small-amplitude mode measured
// from the phase of its Fourier coefficient under the full solver.

struct FrequencyMeasurement {
    double k = 0, measured = 0, exact = 0;
    double rel_error() const { return std::abs(measured - exact) / std::abs(exact); }
};

inline FrequencyMeasurement measure_frequency(double k, double amp = 1e-8, double dt = 0.01, std::size_t steps = 2000)
{
    if (k <= 0.0) throw std::invalid_argument("measure_frequency: k must be positive");
    const PeriodicGrid g(2.0 * kPi / k, 32);
    DiagonalSpectra u{CVec(g.size()), CVec(g.size())};
    u.um[g.slot(1)] = amp / g.dk();
    u.um[g.slot(-1)] = amp / g.dk();
    Stepper st(g);
    double prev = std::arg(u.um[g.slot(1)]), acc = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        st.step(u, dt);
        const double p = std::arg(u.um[g.slot(1)]);
        acc += std::remainder(p - prev, 2.0 * kPi);
        prev = p;
    }
    return {k, -acc / (dt * static_cast<double>(steps)), omega(k)};
}

struct DispersionRow {
    double k = 0, omega = 0, measured = 0, rel_error = 0;
    double omega_prime = 0, fd_prime = 0, omega_second = 0, fd_second = 0;
};

inline std::vector<DispersionRow> run_dispersion_validation(const std::vector<double>& ks)
{
    std::vector<DispersionRow> out;
    for (double k : ks) {
        const auto m = measure_frequency(k);
        const double h = 1e-4;
        DispersionRow r;
        r.k = k;
        r.omega = omega(k);
        r.measured = m.measured;
        r.rel_error = m.rel_error();
        r.omega_prime = omega_prime(k);
        r.fd_prime = (omega(k - 2 * h) - 8 * omega(k - h) + 8 * omega(k + h) - omega(k + 2 * h)) / (12 * h);
        r.omega_second = omega_double_prime(k);
        r.fd_second = (-omega(k - 2 * h) + 16 * omega(k - h) - 30 * omega(k) + 16 * omega(k + h) - omega(k + 2 * h)) /
                      (12 * h * h);
        out.push_back(r);
    }
    return out;
}

inline CsvTable dispersion_table(const std::vector<DispersionRow>& rows)
{
    CsvTable t({"k", "omega", "measured", "rel_error", "omega_prime", "fd_prime", "omega_second", "fd_second"});
    for (const auto& r : rows)
        t.add({r.k, r.omega, r.measured, r.rel_error, r.omega_prime, r.fd_prime, r.omega_second, r.fd_second});
    return t;
}

// ---------------------------------------------------------------------------
// Energy diagnostic along a real run.  The error is rescaled as
// R_j = (U_j - U_j^app)/(eps^{5/2} theta), split by P0/P1, and the low part
// receives the first normal-form correction before the energy is evaluated.
// Index j of the energy is the component with linear flow e^{j i omega t};
// the carrier sits in U_{-1}, so the kernels use sigma = +1.

inline constexpr double kErrorScaleExponent = 2.5;

struct EnergyRow {
    double t = 0, E = 0, Etilde = 0, Etilde_plus = 0, ratio = 0;
};

struct EnergyDiagnostic {
    double eps = 0;
    std::vector<EnergyRow> rows;
    double scale = 0;      // modified energy at the first sample after t = 0
    double max_growth = 0; // max over t >= t_1 of Etilde(t)/scale
    double min_ratio = 0, max_ratio = 0;
};

inline EnergyInputs energy_inputs(const PeriodicGrid& g, const DiagonalSpectra& sim, const DiagonalSpectra& app,
                                  const CVec& psi1, double eps, double k0, double delta, int sigma)
{
    const WeightTheta th{eps, delta};
    const double scale = std::pow(eps, kErrorScaleExponent);
    std::array<CVec, 2> R;
    const CVec* su[2] = {&sim.up, &sim.um};
    const CVec* au[2] = {&app.up, &app.um};
    for (int a = 0; a < 2; ++a) {
        R[a] = CVec(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) R[a][i] = ((*su[a])[i] - (*au[a])[i]) / (scale * th(g.k(i)));
    }
    EnergyInputs in;
    in.phi_c = CVec(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.is_nyquist(i)) continue;
        const double k = g.k(i);
        if (!on_carrier(k, k0, delta)) continue;
        in.phi_c[i] = psi1[i] + std::conj(psi1[g.slot(-g.mode(i))]);
    }
    const int js[2] = {1, -1};
    for (int a = 0; a < 2; ++a) {
        in.R1[a] = p1(g, R[a], delta);
        in.R0[a] = p0(g, R[a], delta);
    }
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const CVec c =
                apply_bilinear_sum(g, KernelFamily::B01, js[a], js[b], k0, th, sigma, in.phi_c, in.R1[b]);
            for (std::size_t i = 0; i < g.size(); ++i) in.R0[a][i] += eps * c[i];
        }
    return in;
}

inline EnergyDiagnostic run_energy_diagnostic(const ExperimentConfig& cfg, double eps, int samples = 64)
{
    cfg.validate();
    const NlsCoefficients c = nls_coefficients(cfg.k0);
    ExperimentConfig local = cfg;
    local.cutoff = false;
    const AnsatzBuilder b = make_builder(local, eps, c);
    const PeriodicGrid& g = b.grid();
    const Approximation a0 = b.at(0.0);
    const double T = cfg.horizon(eps), dt = cfg.cfl * g.dx();
    const auto nsteps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    const std::size_t cadence = std::max<std::size_t>(1, nsteps / static_cast<std::size_t>(samples));
    const int s = std::max(1, static_cast<int>(std::lround(cfg.s)));

    EnergyDiagnostic d;
    d.eps = eps;
    auto observe = [&](const PlasmaState& st) {
        const Approximation ap = b.at(st.t);
        const DiagonalSpectra sim = diagonalize_spectra(g, forward(g, st.rho), forward(g, st.v));
        const EnergyInputs in = energy_inputs(g, sim, ap.u, b.psi1_spectrum(st.t), eps, cfg.k0, cfg.delta, +1);
        EnergyOptions o;
        o.s = s;
        o.eps = eps;
        o.delta = cfg.delta;
        o.k0 = cfg.k0;
        o.sigma = +1;
        const EnergyReport rep = energy(g, in, o);
        o.plus_variant = true;
        const EnergyReport rp = energy(g, in, o);
        d.rows.push_back({st.t, rep.total, rep.modified, rp.modified, rep.ratio()});
    };
    simulate(PlasmaState{g, 0.0, a0.rho, a0.v}, T, dt, observe, cadence);
    d.min_ratio = INFINITY;
    d.max_ratio = 0.0;
    for (const auto& r : d.rows) {
        if (r.t == 0.0) continue;
        if (d.scale == 0.0) d.scale = r.Etilde;
        d.max_growth = std::max(d.max_growth, r.Etilde / d.scale);
        d.min_ratio = std::min(d.min_ratio, r.ratio);
        d.max_ratio = std::max(d.max_ratio, r.ratio);
    }
    return d;
}

inline CsvTable energy_table(const EnergyDiagnostic& d)
{
    CsvTable t({"t", "E_s", "Etilde_s", "Etilde_s_plus", "equivalence_ratio"});
    for (const auto& r : d.rows) t.add({r.t, r.E, r.Etilde, r.Etilde_plus, r.ratio});
    return t;
}

// ---------------------------------------------------------------------------
// Kernel scan along p = k0, m = k - k0.

inline CsvTable kernel_scan(KernelFamily fam, double k0, double eps, double delta, double kmin, double kmax,
                            std::size_t n)
{
    CsvTable t({"k", "n", "j1", "j2", "value"});
    const WeightTheta th{eps, delta};
    for (int nn = 1; nn <= 5; ++nn)
        for (int j1 : {1, -1})
            for (int j2 : {1, -1}) {
                const KernelSpec s{fam, nn, j1, j2, k0, th, -1, false};
                for (std::size_t i = 0; i < n; ++i) {
                    const double k = kmin + (kmax - kmin) * static_cast<double>(i) / static_cast<double>(n - 1);
                    t.add({k, double(nn), double(j1), double(j2), kernel_value(s, k, k0, k - k0)});
                }
            }
    return t;
}

// ---------------------------------------------------------------------------
// Plot script referencing only the CSV files that exist in outdir.

inline std::string plot_script(const std::filesystem::path& outdir)
{
    std::string py = "import pandas as pd\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n";
    auto has = [&](const char* f) { return std::filesystem::exists(outdir / f); };
    if (has("convergence.csv"))
        py += "d = pd.read_csv('convergence.csv')\nplt.figure(); plt.loglog(d.eps, d.sup_error, 'o-', "
              "label='sup error')\nplt.loglog(d.eps, d.sup_error.iloc[-1] * (d.eps / d.eps.iloc[-1])**1.5, '--', "
              "label='eps^1.5')\nplt.xlabel('eps'); plt.legend(); plt.savefig('convergence.png')\n";
    if (has("convergence_series.csv"))
        py += "d = pd.read_csv('convergence_series.csv')\nplt.figure()\nfor e, g in d.groupby('eps'): "
              "plt.plot(g.t * e**2, g.error, label=f'eps={e}')\nplt.xlabel('eps^2 t'); plt.legend(); "
              "plt.savefig('convergence_series.png')\n";
    if (has("residual.csv"))
        py += "d = pd.read_csv('residual.csv')\nplt.figure(); plt.loglog(d.eps, d.leading, 'o-', label='leading')\n"
              "plt.loglog(d.eps, d.extended, 's-', label='extended')\nplt.xlabel('eps'); plt.legend(); "
              "plt.savefig('residual.png')\n";
    if (has("energy.csv"))
        py += "d = pd.read_csv('energy.csv')\nplt.figure(); plt.plot(d.t, d.Etilde_s, label='modified energy')\n"
              "plt.xlabel('t'); plt.legend(); plt.savefig('energy.png')\n";
    if (has("dispersion.csv"))
        py += "d = pd.read_csv('dispersion.csv')\nprint(d.to_string())\n";
    return py;
}

inline void write_plot_script(const std::filesystem::path& outdir)
{
    std::ofstream f(outdir / "plots.py");
    if (!f) throw IoError("cannot write plot script");
    f << plot_script(outdir);
}

} // namespace nlslab
