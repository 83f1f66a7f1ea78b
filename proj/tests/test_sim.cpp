#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "echo/analytic.hpp"
#include "echo/errors.hpp"
#include "echo/fitmodels.hpp"
#include "echo/simulator.hpp"
#include "echo/units.hpp"

using namespace echo;
using namespace echo::sim;

namespace {

EnsembleSpec base_spec(double t2_s) {
    EnsembleSpec spec;
    spec.line = {0.0, 36e9, LineShape::Lorentzian};
    spec.t1_optical_s = 2.8e-3;
    spec.t2_optical_s = t2_s;
    spec.spin_t1_short_s = 9.4e-3;
    spec.spin_t1_long_s = 0.53;
    spec.stark_k = units::parse_si("5.8 kHz/(V/cm)");
    spec.dipole_kernel = DipoleKernel::Isotropic;
    return spec;
}

SimConfig small_cfg(std::uint64_t seed = 7) {
    SimConfig cfg;
    cfg.n_ions = 4096;
    cfg.seed = seed;
    return cfg;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return v;
}

double peak_time(const EchoTrace& trace) {
    std::size_t imax = 0;
    for (std::size_t i = 1; i < trace.intensity.size(); ++i)
        if (trace.intensity[i] > trace.intensity[imax]) imax = i;
    return trace.times[imax];
}

}  // namespace

TEST_CASE("two-pulse echo appears at 2 tau at the reference timing") {
    // pi/2 at 110 ns, pi at 300 ns -> primary echo at 490 ns
    auto spec = base_spec(1e30);  // effectively no homogeneous dephasing
    const auto seq = PulseSequence::two_pulse_echo(190e-9, 32e-9, 110e-9, 150e-9);
    SimConfig cfg = small_cfg();
    SimStats stats;
    const EchoTrace trace = simulate(spec, seq, cfg, &stats);
    CHECK(std::abs(peak_time(trace) - 490e-9) <= cfg.detection_bin_s);

    REQUIRE(trace.markers.size() >= 1);
    CHECK(trace.markers[0].label == "primary_echo");
    CHECK(trace.markers[0].time_s == doctest::Approx(490e-9));
    // 680 ns secondary marker lies outside this detection span
    for (const auto& m : trace.markers) {
        CHECK(m.time_s >= trace.times.front());
        CHECK(m.time_s <= trace.times.back());
    }
}

TEST_CASE("secondary echo marker at 3 tau inside a wide detection window") {
    auto spec = base_spec(1e30);
    PulseSequence seq = PulseSequence::two_pulse_echo(190e-9, 32e-9, 110e-9, 0.0);
    seq.events.pop_back();  // replace the default window with a wide one
    seq.events.push_back(Detect{380e-9, 420e-9});
    const EchoTrace trace = simulate(spec, seq, small_cfg(), nullptr);
    REQUIRE(trace.markers.size() == 2);
    CHECK(trace.markers[0].label == "primary_echo");
    CHECK(trace.markers[1].label == "secondary_echo");
    CHECK(trace.markers[1].time_s == doctest::Approx(680e-9));
}

TEST_CASE("detect-only sequence emits zero intensity") {
    auto spec = base_spec(9.7e-6);
    PulseSequence seq;
    seq.events.push_back(Detect{0.0, 1e-6});
    const EchoTrace trace = simulate(spec, seq, small_cfg(), nullptr);
    for (double v : trace.intensity) CHECK(v == 0.0);
}

TEST_CASE("no dephasing channel means no decay") {
    auto spec = base_spec(1e30);
    SimConfig cfg = small_cfg(11);
    const auto curve =
        two_pulse_decay(spec, cfg, {0.5e-6, 2e-6, 8e-6, 20e-6});
    // flat within Monte Carlo error
    for (std::size_t i = 1; i < curve.ordinate.size(); ++i) {
        CHECK(curve.ordinate[i] ==
              doctest::Approx(curve.ordinate[0]).epsilon(0.02));
    }
}

TEST_CASE("determinism: identical runs and worker counts are bit-identical") {
    auto spec = base_spec(9.7e-6);
    spec.bath = SuddenJumpBath{300.0, 42.8e3, 0.0, 1e-4};
    const auto seq = PulseSequence::two_pulse_echo(2e-6, 32e-9, 64e-9, 200e-9);
    SimConfig cfg = small_cfg(42);
    cfg.n_ions = 8192;

    cfg.n_threads = 1;
    const EchoTrace a = simulate(spec, seq, cfg, nullptr);
    const EchoTrace b = simulate(spec, seq, cfg, nullptr);
    cfg.n_threads = 4;
    const EchoTrace c = simulate(spec, seq, cfg, nullptr);
    REQUIRE(a.intensity.size() == b.intensity.size());
    REQUIRE(a.intensity.size() == c.intensity.size());
    for (std::size_t i = 0; i < a.intensity.size(); ++i) {
        CHECK(a.intensity[i] == b.intensity[i]);
        CHECK(a.intensity[i] == c.intensity[i]);
    }
}

TEST_CASE("bloch norm is conserved to 1e-9") {
    auto spec = base_spec(9.7e-6);
    spec.bath = SuddenJumpBath{500.0, 40e3, 0.0, 1e-4};
    const auto seq = PulseSequence::two_pulse_echo(3e-6, 32e-9, 64e-9, 200e-9);
    SimStats stats;
    simulate(spec, seq, small_cfg(3), &stats);
    CHECK(stats.max_bloch_norm_drift < 1e-9);
}

TEST_CASE("echo peak stays at 2 tau under every dephasing configuration") {
    CounterRng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const double tau = rng.uniform(0.8e-6, 4e-6);
        auto spec = base_spec(rng.uniform(2e-6, 40e-6));
        if (trial % 2) {
            spec.bath = SuddenJumpBath{rng.uniform(100.0, 2000.0),
                                       rng.uniform(1e3, 80e3), 0.0, 1e-4};
        }
        SimConfig cfg = small_cfg(1000 + trial);
        const auto seq =
            PulseSequence::two_pulse_echo(tau, 32e-9, 64e-9, 250e-9);
        const EchoTrace trace = simulate(spec, seq, cfg, nullptr);
        const double expected = 64e-9 + 2.0 * tau;
        CHECK(std::abs(peak_time(trace) - expected) <=
              cfg.detection_bin_s + 1e-12);
    }
}

TEST_CASE("pure-T2 two-pulse decay refits the configured coherence time") {
    auto spec = base_spec(9.7e-6);
    SimConfig cfg = small_cfg(5);
    cfg.n_ions = 20000;
    const auto curve = two_pulse_decay(spec, cfg, linspace(0.4e-6, 11e-6, 12));
    const FitResult fr = fit::fit_echo_decay(curve);
    REQUIRE(fr.converged);
    CHECK(std::abs(fr.param("t2") - 9.7e-6) / 9.7e-6 < 0.05);
}

TEST_CASE("power scale changes amplitude but not the fitted T2") {
    // no instantaneous spectral diffusion in the model: coherence times are
    // power-independent, echo amplitude is not
    auto spec = base_spec(9.7e-6);
    SimConfig cfg = small_cfg(6);
    cfg.n_ions = 16384;
    const auto grid = linspace(0.4e-6, 9e-6, 10);

    auto run_at_power = [&](double ps) {
        SweepCurve curve;
        curve.abscissa_unit = "s";
        curve.ordinate_unit = "arb";
        for (double tau : grid) {
            PulseSequence seq =
                PulseSequence::two_pulse_echo(tau, 32e-9, 64e-9, 200e-9);
            for (auto& ev : seq.events) {
                if (auto* p = std::get_if<OpticalPulse>(&ev)) p->power_scale = ps;
            }
            SimStats stats;
            const EchoTrace trace = simulate(spec, seq, cfg, &stats);
            double sum = 0.0;
            for (double v : trace.intensity) sum += v;
            curve.abscissa.push_back(tau);
            curve.ordinate.push_back(sum);
        }
        return curve;
    };
    const auto full = run_at_power(1.0);
    const auto low = run_at_power(0.075);  // 6 uW vs 80 uW
    const FitResult f1 = fit::fit_echo_decay(full);
    const FitResult f2 = fit::fit_echo_decay(low);
    REQUIRE(f1.converged);
    REQUIRE(f2.converged);
    CHECK(std::abs(f2.param("t2") - f1.param("t2")) / f1.param("t2") < 0.05);
    CHECK(f2.param("i0") < 0.5 * f1.param("i0"));
}

TEST_CASE("sudden-jump bath broadens the two-pulse decay beyond gamma0") {
    auto spec = base_spec(1.0 / (std::numbers::pi * 6.2e3));  // gamma0 = 6.2 kHz
    SimConfig cfg = small_cfg(8);
    cfg.n_ions = 40000;
    const auto grid = linspace(1e-6, 30e-6, 10);
    const auto clean = two_pulse_decay(spec, cfg, grid);
    spec.bath = SuddenJumpBath{300.0, 42.8e3, 0.0, 1e-4};
    const auto bathy = two_pulse_decay(spec, cfg, grid);
    const FitResult f_clean = fit::fit_echo_decay(clean);
    const FitResult f_bath = fit::fit_echo_decay(bathy);
    REQUIRE(f_clean.converged);
    REQUIRE(f_bath.converged);
    const double g_clean = model::homogeneous_linewidth(f_clean.param("t2"));
    const double g_bath = model::homogeneous_linewidth(f_bath.param("t2"));
    CHECK(g_clean == doctest::Approx(6.2e3).epsilon(0.05));
    // flips are rare over a two-pulse window (R * 2 tau <= 0.02), so the
    // broadening is a ~1% effect; the paired runs share static and noise
    // draws, which makes it resolvable
    CHECK(g_bath - g_clean > 20.0);
    CHECK(g_bath - g_clean < 500.0);
}

TEST_CASE("three-pulse sweep reproduces the saturating linewidth of the bath") {
    const double gamma0 = 6.2e3;
    const double gamma_sd = 42.8e3;
    const double rate = 300.0;
    auto spec = base_spec(1.0 / (std::numbers::pi * gamma0));
    spec.bath = SuddenJumpBath{rate, gamma_sd, 0.0, 1e-4};
    SimConfig cfg = small_cfg(9);
    cfg.n_ions = 30000;

    // short-tau regime, where the effective-linewidth model applies
    const auto tau_grid = linspace(0.3e-6, 2.2e-6, 8);
    const std::vector<double> t_wait = {0.33e-3, 1.5e-3, 3.3e-3, 12e-3, 33e-3};
    const auto points = three_pulse_sweep(spec, cfg, tau_grid, t_wait);
    REQUIRE(points.size() == t_wait.size());
    DephasingParams params{gamma0, gamma_sd, rate, 0.0, 1e-4};
    for (const auto& p : points) {
        const double expected = model::effective_linewidth(params, p.t_wait_s);
        INFO("t_wait ", p.t_wait_s, " gamma_eff ", p.gamma_eff_hz, " expected ",
             expected);
        CHECK(std::abs(p.gamma_eff_hz - expected) / expected < 0.10);
    }
    // asymptote: gamma0 + gamma_sd / 2 within 10%
    const double asym = model::paramagnetic_asymptote(params);
    CHECK(std::abs(points.back().gamma_eff_hz - asym) / asym < 0.10);

    const SweepCurve gcurve = gamma_eff_curve(points);
    CHECK(gcurve.size() == t_wait.size());
    CHECK(gcurve.ordinate_unit == "Hz");
}

TEST_CASE("saturation recovery follows the double-exponential law") {
    auto spec = base_spec(64.1e-6);
    SimConfig cfg = small_cfg(10);
    const auto grid = logspace(2e-4, 6.0, 60);
    const auto curve = saturation_recovery(spec, cfg, grid);
    const FitResult fr = fit::fit_recovery(curve);
    REQUIRE(fr.converged);
    CHECK(std::abs(fr.param("t1_short") - 9.4e-3) / 9.4e-3 < 0.10);
    CHECK(std::abs(fr.param("t1_long") - 0.53) / 0.53 < 0.10);

    // full recovery at long waiting times
    CHECK(curve.ordinate.back() == doctest::Approx(0.5).epsilon(1e-3));

    // nothing shelved at zero power
    RecoveryOptions off;
    off.power_scale = 0.0;
    const auto flat = saturation_recovery(spec, cfg, grid, off);
    for (double v : flat.ordinate) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("stark-gated echo matches the orientation-integral model") {
    auto spec = base_spec(1e30);  // isolate the Stark channel
    spec.dipole_kernel = DipoleKernel::Sin4;
    SimConfig cfg = small_cfg(12);
    cfg.n_ions = 30000;
    const double field = units::parse_si("40 V/cm");
    const auto lengths = linspace(0.0, 3e-6, 8);
    const auto curve = stark_gated_echo(spec, cfg, lengths, field);

    REQUIRE(curve.size() == lengths.size());
    CHECK(curve.ordinate[0] == doctest::Approx(1.0).epsilon(1e-12));
    const auto kernel = model::make_stark_kernel(model::KernelForm::Sin4);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double analytic =
            model::stark_echo_amplitude(curve.abscissa[i], spec.stark_k, kernel);
        CHECK(std::abs(curve.ordinate[i] - analytic) <=
              3.0 * curve.sigma[i] + 1e-6);
    }
    // the 3 us / 40 V/cm point sits near 90% extinction
    CHECK(std::abs(curve.ordinate.back()) < 0.2);
}

TEST_CASE("shf modulation envelope") {
    SweepCurve curve;
    curve.abscissa = {0.0, 2.5e-6, 5e-6, 7.5e-6, 10e-6};
    curve.abscissa_unit = "s";
    curve.ordinate = {1.0, 1.0, 1.0, 1.0, 1.0};
    curve.ordinate_unit = "arb";

    const auto same = apply_shf_modulation(curve, 0.0, 100e3);
    for (std::size_t i = 0; i < curve.size(); ++i)
        CHECK(same.ordinate[i] == curve.ordinate[i]);

    // f = 100 kHz on a 0-10 us grid: exactly one full modulation period
    const auto mod = apply_shf_modulation(curve, 1.0, 100e3);
    CHECK(mod.ordinate[0] == doctest::Approx(1.0));
    CHECK(mod.ordinate[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(mod.ordinate[2] == doctest::Approx(0.0).scale(1.0));  // null at tau = 1/(2f)
    CHECK(mod.ordinate[4] == doctest::Approx(1.0).epsilon(1e-9));

    // depth 1 at tau = 1/(2f): exact zero
    SweepCurve null_curve;
    null_curve.abscissa = {5e-6};
    null_curve.abscissa_unit = "s";
    null_curve.ordinate = {2.0};
    null_curve.ordinate_unit = "arb";
    const auto nulled = apply_shf_modulation(null_curve, 1.0, 100e3);
    CHECK(nulled.ordinate[0] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("spec-declared shf modulation shapes the decay curve") {
    auto spec = base_spec(1e30);
    spec.shf_modulation = ShfModulation{0.8, 100e3};
    SimConfig cfg = small_cfg(13);
    const auto grid = linspace(0.5e-6, 10e-6, 12);
    const auto curve = two_pulse_decay(spec, cfg, grid);
    // the modulated curve dips mid-grid and recovers near the full period
    const double first = curve.ordinate.front();
    const double mid = curve.ordinate[curve.size() / 2];
    CHECK(mid < 0.6 * first);
}

TEST_CASE("memory budget violations are reported with sizes") {
    auto spec = base_spec(9.7e-6);
    const auto seq = PulseSequence::two_pulse_echo(2e-6, 32e-9, 64e-9, 1e-6);
    SimConfig cfg = small_cfg();
    cfg.memory_budget_bytes = 1024;
    CHECK_THROWS_WITH_AS(simulate(spec, seq, cfg, nullptr),
                         doctest::Contains("memory budget"), ValidationError);
}

TEST_CASE("time step must resolve the pulses") {
    auto spec = base_spec(9.7e-6);
    const auto seq = PulseSequence::two_pulse_echo(2e-6, 32e-9, 64e-9, 200e-9);
    SimConfig cfg = small_cfg();
    cfg.time_step_s = 20e-9;  // > 32 ns / 4
    CHECK_THROWS_AS(simulate(spec, seq, cfg, nullptr), ValidationError);
}

TEST_CASE("sim config validation") {
    SimConfig cfg;
    cfg.n_ions = 10;
    CHECK_FALSE(sim::validate(cfg).ok());
    cfg.n_ions = 100;
    cfg.detection_bin_s = 0.0;
    CHECK_FALSE(sim::validate(cfg).ok());
    CHECK(sim::validate(small_cfg()).ok());
}

TEST_CASE("integrated echo amplitude error scales as 1/sqrt(n_ions)") {
    auto spec = base_spec(9.7e-6);
    const auto seq = PulseSequence::two_pulse_echo(3e-6, 32e-9, 64e-9, 150e-9);
    auto amplitude_std = [&](int n_ions) {
        const int m = 64;
        std::vector<double> amps(m);
        double mean = 0.0;
        for (int s = 0; s < m; ++s) {
            SimConfig cfg;
            cfg.n_ions = n_ions;
            cfg.seed = 5000 + s;
            SimStats stats;
            const auto trace = simulate(spec, seq, cfg, &stats);
            double sum = 0.0;
            for (double v : trace.intensity) sum += v;
            // normalized amplitude so sizes are comparable
            amps[s] = std::sqrt(sum) / stats.sum_weights;
            mean += amps[s] / m;
        }
        double var = 0.0;
        for (double a : amps) var += (a - mean) * (a - mean) / (m - 1);
        return std::sqrt(var) / mean;
    };
    const double s3 = amplitude_std(1000);
    const double s4 = amplitude_std(10000);
    const double s5 = amplitude_std(100000);
    const double root10 = std::sqrt(10.0);
    CHECK(std::abs(s3 / s4 - root10) / root10 < 0.20);
    CHECK(std::abs(s4 / s5 - root10) / root10 < 0.20);
}
