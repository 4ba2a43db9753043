#include "nlslab/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace nlslab;

namespace {

ExperimentConfig cheap(double T0)
{
    ExperimentConfig c;
    c.T0 = T0;
    return c;
}

std::filesystem::path scratch(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("nlslab_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST(Config, ParseEmitIdentity)
{
    ExperimentConfig c;
    c.k0 = 1.5;
    c.epsilons = {0.12, 0.06};
    c.s = 1;
    c.T0 = 0.5;
    c.N = 8192;
    c.depth = 0;
    c.cutoff = true;
    c.delta = 0.15;
    c.seed = 42;
    c.outdir = "runs/a";
    const std::string text = emit_config(c);
    EXPECT_EQ(parse_config(text), c);
    EXPECT_EQ(emit_config(parse_config(text)), text);
    EXPECT_EQ(parse_config(emit_config(ExperimentConfig{})), ExperimentConfig{});
}

TEST(Config, CommentsAndWhitespace)
{
    const auto c = parse_config("# header\n  k0 = 2   # carrier\n\nepsilons = 0.1,0.05\n");
    EXPECT_EQ(c.k0, 2.0);
    EXPECT_EQ(c.epsilons, (std::vector<double>{0.1, 0.05}));
}

TEST(Config, UnknownKeyNamed)
{
    try {
        parse_config("epsilonn = 0.1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("epsilonn"), std::string::npos);
    }
    EXPECT_THROW(parse_config("k0 = abc\n"), ConfigError);
    EXPECT_THROW(parse_config("k0\n"), ConfigError);
    EXPECT_THROW(parse_config("ansatz.cutoff = maybe\n"), ConfigError);
}

TEST(Config, Invariants)
{
    EXPECT_THROW(parse_config("epsilons = 0.05, 0.1\n"), ConfigError);
    EXPECT_THROW(parse_config("epsilons = 0.3\n"), ConfigError);
    EXPECT_THROW(parse_config("k0 = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("grid.N = 64\n"), ConfigError);
    EXPECT_THROW(parse_config("delta = 0.2\n"), ConfigError);
    EXPECT_THROW(parse_config("T0 = 100\nmax_steps = 1000\n"), ConfigError);
    const ExperimentConfig c;
    for (double e : c.epsilons) {
        const auto g = c.grid(e);
        EXPECT_GE(g.length(), 40.0 / e);
        EXPECT_GE(static_cast<double>(g.size()) * g.dk(), 32.0);
        EXPECT_NEAR(std::remainder(g.length(), 2 * kPi), 0.0, 1e-9);
    }
}

TEST(Csv, GoldenColumnOrder)
{
    EXPECT_EQ(convergence_table({}).str(), "eps,L,N,steps,sup_error,t_sup,sup_error_l2,magnitude,tail_mass\n");
    EXPECT_EQ(convergence_series_table({}).str(), "eps,t,error,error_l2\n");
    EXPECT_EQ(residual_table({}).str(), "eps,leading,extended,carrier_phase,e1,e1_perturbed\n");
    EXPECT_EQ(dispersion_table({}).str(), "k,omega,measured,rel_error,omega_prime,fd_prime,omega_second,fd_second\n");
    EXPECT_EQ(energy_table({}).str(), "t,E_s,Etilde_s,Etilde_s_plus,equivalence_ratio\n");
    EXPECT_EQ(kernel_scan(KernelFamily::B11, 1.0, 0.05, 0.1, 2, 3, 2).columns(),
              (std::vector<std::string>{"k", "n", "j1", "j2", "value"}));
}

TEST(Csv, RoundTripAndWidthCheck)
{
    const auto dir = scratch("csv");
    CsvTable t({"a", "b"});
    t.add({1.0 / 3.0, -2e-300});
    t.add({kPi, 0.0});
    t.write(dir / "t.csv");
    const auto r = read_csv(dir / "t.csv");
    EXPECT_EQ(r.columns(), t.columns());
    EXPECT_EQ(r.rows(), t.rows());
    EXPECT_THROW(t.add({1.0}), IoError);
    EXPECT_THROW(read_csv(dir / "missing.csv"), IoError);
}

TEST(Snapshot, RoundTrip)
{
    std::mt19937 rng(1);
    std::normal_distribution<double> n;
    const PeriodicGrid g(13.0, 64);
    PlasmaState s{g, 2.5, RVec(64), RVec(64)};
    for (std::size_t i = 0; i < 64; ++i) {
        s.rho[i] = n(rng);
        s.v[i] = n(rng);
    }
    const auto dir = scratch("snap");
    write_snapshot(dir / "s", s);
    const PlasmaState r = read_snapshot(dir / "s");
    EXPECT_EQ(r.grid.length(), 13.0);
    EXPECT_EQ(r.grid.size(), 64u);
    EXPECT_EQ(r.t, 2.5);
    EXPECT_EQ(r.rho, s.rho);
    EXPECT_EQ(r.v, s.v);
    EXPECT_EQ(std::filesystem::file_size(dir / "s.bin"), 2 * 64 * sizeof(double));
    EXPECT_EQ(snapshot_table(s).rows().size(), 64u);
    EXPECT_THROW(read_snapshot(dir / "nothing"), IoError);
}

TEST(Sweep, OrderIndependentAndPropagatesErrors)
{
    const auto a = run_sweep<double>(37, [](std::size_t i) { return std::sqrt(double(i)); }, 1);
    const auto b = run_sweep<double>(37, [](std::size_t i) { return std::sqrt(double(i)); }, 8);
    EXPECT_EQ(a, b);
    EXPECT_THROW(run_sweep<int>(
                     4, [](std::size_t i) -> int { return i == 2 ? throw std::runtime_error("x") : int(i); }, 3),
                 std::runtime_error);
}

TEST(Convergence, ZeroHorizonHasZeroError)
{
    const auto r = run_single(cheap(0.0), 0.1);
    EXPECT_EQ(r.steps, 0u);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.sup_error, 0.0);
    EXPECT_GT(r.magnitude, 0.0);
}

TEST(Convergence, SobolevErrorDominatesL2)
{
    const auto r = run_single(cheap(0.02), 0.1);
    EXPECT_GT(r.steps, 0u);
    EXPECT_GT(r.sup_error_l2, 0.0);
    for (std::size_t i = 0; i < r.errors.size(); ++i) EXPECT_GE(r.errors[i], r.errors_l2[i]);
    EXPECT_LT(r.tail, 1e-6);
}

TEST(Convergence, SerialAndConcurrentSweepsByteIdentical)
{
    const ExperimentConfig c = cheap(0.01);
    const auto a = run_convergence(c, 1), b = run_convergence(c, 3);
    EXPECT_EQ(convergence_table(a).str(), convergence_table(b).str());
    EXPECT_EQ(convergence_series_table(a).str(), convergence_series_table(b).str());
    EXPECT_TRUE(std::isfinite(a.slope));
}

TEST(Dispersion, MeasuredFrequencyAtUnitWavenumber)
{
    const auto m = measure_frequency(1.0);
    EXPECT_NEAR(m.measured, std::sqrt(1.5), 1e-6 * std::sqrt(1.5));
    const auto rows = run_dispersion_validation({0.5, 2.0});
    for (const auto& r : rows) {
        EXPECT_LT(r.rel_error, 1e-6);
        EXPECT_NEAR(r.fd_prime, r.omega_prime, 1e-7);
        EXPECT_NEAR(r.fd_second, r.omega_second, 1e-6);
    }
}

TEST(Plots, ScriptReferencesOnlyExistingTables)
{
    const auto dir = scratch("plots");
    EXPECT_EQ(plot_script(dir).find(".csv"), std::string::npos);
    convergence_table({}).write(dir / "convergence.csv");
    write_plot_script(dir);
    const std::string py = plot_script(dir);
    EXPECT_NE(py.find("convergence.csv"), std::string::npos);
    for (const char* f : {"residual.csv", "energy.csv", "dispersion.csv", "convergence_series.csv"})
        EXPECT_EQ(py.find(f), std::string::npos) << f;
    EXPECT_TRUE(std::filesystem::exists(dir / "plots.py"));
}
