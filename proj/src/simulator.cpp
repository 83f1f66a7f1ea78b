#include "echo/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "echo/errors.hpp"
#include "echo/rng.hpp"

namespace echo::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kChunk = 4096;  // ions per reduction chunk (fixed for determinism)

enum class Action { Rotate, Saturate, GateOn, GateOff, Sample };

struct TimePoint {
    double t;
    Action action;
    int index;       // pulse index / gate index / bin index
    double value;    // rotation angle (rad) or gate field (V/m)
};

struct Timeline {
    std::vector<TimePoint> points;
    std::vector<double> bin_centers;
    double bandwidth_hz = 0.0;
    double min_pulse_duration = std::numeric_limits<double>::infinity();
};

Timeline build_timeline(const EnsembleSpec& spec, const PulseSequence& seq,
                        const SimConfig& cfg) {
    Timeline tl;
    const auto pulses = seq.optical_pulses();
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const auto& p = pulses[i];
        tl.min_pulse_duration = std::min(tl.min_pulse_duration, p.duration_s);
        if (p.area == PulseArea::Saturation) {
            tl.points.push_back(
                {p.center(), Action::Saturate, static_cast<int>(i),
                 p.power_scale});
        } else {
            const double nominal =
                p.area == PulseArea::HalfPi ? std::numbers::pi / 2.0
                                            : std::numbers::pi;
            // pulse area scales with the field amplitude, i.e. sqrt(power)
            const double angle = nominal * std::sqrt(p.power_scale);
            tl.points.push_back(
                {p.center(), Action::Rotate, static_cast<int>(i), angle});
        }
    }
    const auto gates = seq.stark_gates();
    for (std::size_t i = 0; i < gates.size(); ++i) {
        tl.points.push_back({gates[i].start_s, Action::GateOn,
                             static_cast<int>(i), gates[i].field_v_per_m});
        tl.points.push_back(
            {gates[i].end(), Action::GateOff, static_cast<int>(i), 0.0});
    }
    for (const auto& d : seq.detect_windows()) {
        const int nbins =
            std::max(1, static_cast<int>(d.duration_s / cfg.detection_bin_s));
        for (int b = 0; b < nbins; ++b) {
            const double center = d.start_s + (b + 0.5) * cfg.detection_bin_s;
            if (center > d.end()) break;
            tl.points.push_back({center, Action::Sample,
                                 static_cast<int>(tl.bin_centers.size()), 0.0});
            tl.bin_centers.push_back(center);
        }
    }
    std::stable_sort(tl.points.begin(), tl.points.end(),
                     [](const TimePoint& a, const TimePoint& b) {
                         if (a.t != b.t) return a.t < b.t;
                         return static_cast<int>(a.action) <
                                static_cast<int>(b.action);
                     });
    tl.bandwidth_hz = cfg.pulse_bandwidth_hz > 0
                          ? cfg.pulse_bandwidth_hz
                          : (std::isfinite(tl.min_pulse_duration)
                                 ? 1.0 / tl.min_pulse_duration
                                 : spec.line.fwhm_hz);
    return tl;
}

void add_echo_markers(const PulseSequence& seq, EchoTrace& trace) {
    if (trace.times.empty()) return;
    const double t_min = trace.times.front();
    const double t_max = trace.times.back();
    auto push = [&](const std::string& label, double t) {
        if (t >= t_min && t <= t_max) trace.markers.push_back({label, t});
    };
    const auto pulses = seq.optical_pulses();
    std::vector<OpticalPulse> coherent;
    for (const auto& p : pulses)
        if (p.area != PulseArea::Saturation) coherent.push_back(p);
    if (coherent.size() == 2 && coherent[0].area == PulseArea::HalfPi &&
        coherent[1].area == PulseArea::Pi) {
        const double tau = coherent[1].center() - coherent[0].center();
        push("primary_echo", coherent[0].center() + 2.0 * tau);
        push("secondary_echo", coherent[0].center() + 3.0 * tau);
    } else if (coherent.size() == 3 &&
               coherent[0].area == PulseArea::HalfPi &&
               coherent[1].area == PulseArea::HalfPi &&
               coherent[2].area == PulseArea::HalfPi) {
        const double tau = coherent[1].center() - coherent[0].center();
        push("stimulated_echo", coherent[2].center() + tau);
    }
}

struct Walker {
    double u = 0.0, v = 0.0, w = -1.0;
    double static_det = 0.0;
    double bath_det = 0.0;
    double cos_theta = 0.0;
    double weight = 1.0;
    double gate_det = 0.0;
    double next_flip = std::numeric_limits<double>::infinity();
    double t = 0.0;
    double norm_ref = 1.0;
    // separate substreams so enabling the bath does not shift the noise
    // draws (paired comparisons stay correlated)
    CounterRng bath_rng{0};
    CounterRng noise_rng{0};
};

struct BathModel {
    bool active = false;
    double rate = 0.0;
    double scale = 0.0;  // Lorentzian scale (HWHM) of the stationary detuning
};

// Per-chunk accumulation so the reduction order is fixed by chunk index,
// independent of how chunks are scheduled across threads.
struct ChunkResult {
    std::vector<std::complex<double>> bins;
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    double max_drift = 0.0;
};

void run_chunks(int n_chunks, int n_threads,
                const std::function<void(int)>& work) {
    if (n_threads <= 1 || n_chunks <= 1) {
        for (int c = 0; c < n_chunks; ++c) work(c);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= n_chunks) return;
            work(c);
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min(n_threads, n_chunks);
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

ValidationReport validate(const SimConfig& cfg) {
    ValidationReport r;
    auto add = [&r](const std::string& m) { r.violations.push_back(m); };
    if (cfg.n_ions < 100) add("n_ions must be >= 100");
    if (!(cfg.time_step_s > 0)) add("time_step must be > 0");
    if (!(cfg.detection_bin_s > 0)) add("detection_bin must be > 0");
    if (cfg.memory_budget_bytes == 0) add("memory_budget must be > 0");
    if (cfg.n_threads < 0) add("n_threads must be >= 0");
    return r;
}

EchoTrace simulate(const EnsembleSpec& spec, const PulseSequence& seq,
                   const SimConfig& cfg, SimStats* stats) {
    require_valid(echo::validate(spec), "simulate: spec");
    require_valid(echo::validate(seq), "simulate: sequence");
    require_valid(validate(cfg), "simulate: config");
    if (seq.detect_windows().empty())
        throw ValidationError("simulate: sequence has no detection window");

    const Timeline tl = build_timeline(spec, seq, cfg);
    if (std::isfinite(tl.min_pulse_duration) &&
        cfg.time_step_s > tl.min_pulse_duration / 4.0) {
        std::ostringstream os;
        os << "simulate: time_step (" << cfg.time_step_s
           << " s) must be <= min pulse duration / 4 ("
           << tl.min_pulse_duration / 4.0 << " s)";
        throw ValidationError(os.str());
    }

    const int n_bins = static_cast<int>(tl.bin_centers.size());
    const int n_chunks = (cfg.n_ions + kChunk - 1) / kChunk;
    const std::uint64_t required =
        static_cast<std::uint64_t>(n_chunks) * n_bins *
            sizeof(std::complex<double>) +
        static_cast<std::uint64_t>(n_bins) * 2 * sizeof(double) +
        sizeof(Walker) * 64;
    if (required > cfg.memory_budget_bytes) {
        std::ostringstream os;
        os << "simulate: accumulators need " << required
           << " bytes but the memory budget allows " << cfg.memory_budget_bytes;
        throw ValidationError(os.str());
    }

    // dephasing channels
    const double noise_d =
        std::isfinite(spec.t2_optical_s) ? 2.0 / spec.t2_optical_s : 0.0;
    BathModel bath;
    if (spec.bath && spec.bath->gamma_sd_hz > 0 && spec.bath->flip_rate_hz > 0) {
        bath.active = true;
        bath.rate = spec.bath->flip_rate_hz;
        // jump (difference) distribution FWHM = gamma_sd
        // => stationary Lorentzian scale = gamma_sd / 4
        bath.scale = spec.bath->gamma_sd_hz / 4.0;
    }
    const double half_bw = 0.5 * tl.bandwidth_hz;
    const double t_start = tl.points.empty() ? 0.0 : tl.points.front().t;

    std::vector<ChunkResult> chunks(n_chunks);
    auto work = [&](int c) {
        ChunkResult res;
        res.bins.assign(n_bins, {0.0, 0.0});
        const int lo = c * kChunk;
        const int hi = std::min(cfg.n_ions, lo + kChunk);
        for (int ion = lo; ion < hi; ++ion) {
            Walker wk;
            CounterRng base(cfg.seed, static_cast<std::uint64_t>(ion));
            wk.bath_rng = base.fork(1);
            wk.noise_rng = base.fork(2);
            wk.static_det = spec.line.sample_within(base,
                                                    spec.line.center_hz - half_bw,
                                                    spec.line.center_hz + half_bw) -
                            spec.line.center_hz;
            const double theta = base.uniform(0.0, std::numbers::pi);
            wk.cos_theta = std::cos(theta);
            switch (spec.dipole_kernel) {
                case DipoleKernel::Sin4: {
                    const double s2 = std::sin(theta) * std::sin(theta);
                    wk.weight = s2 * s2;
                    break;
                }
                case DipoleKernel::Cos4: {
                    const double c2 = wk.cos_theta * wk.cos_theta;
                    wk.weight = c2 * c2;
                    break;
                }
                case DipoleKernel::Isotropic:
                    wk.weight = 1.0;
                    break;
            }
            if (bath.active) {
                wk.bath_det = wk.bath_rng.cauchy(bath.scale);
                wk.next_flip = t_start + wk.bath_rng.exponential(bath.rate);
            }
            wk.t = t_start;
            const bool in_band = std::abs(wk.static_det) <= half_bw;

            auto advance = [&](double t_to) {
                if (t_to <= wk.t) return;
                // piecewise-constant detuning: exact phase per piece
                double phase = 0.0;
                double t_cur = wk.t;
                while (bath.active && wk.next_flip < t_to) {
                    phase += (wk.static_det + wk.bath_det + wk.gate_det) *
                             (wk.next_flip - t_cur);
                    t_cur = wk.next_flip;
                    wk.bath_det = wk.bath_rng.cauchy(bath.scale);
                    wk.next_flip += wk.bath_rng.exponential(bath.rate);
                }
                phase += (wk.static_det + wk.bath_det + wk.gate_det) *
                         (t_to - t_cur);
                double angle = kTwoPi * phase;
                if (noise_d > 0) {
                    angle += std::sqrt(noise_d * (t_to - wk.t)) *
                             wk.noise_rng.normal();
                }
                const double cs = std::cos(angle), sn = std::sin(angle);
                const double u2 = wk.u * cs + wk.v * sn;
                const double v2 = wk.v * cs - wk.u * sn;
                wk.u = u2;
                wk.v = v2;
                wk.t = t_to;
            };

            for (const auto& tp : tl.points) {
                advance(tp.t);
                switch (tp.action) {
                    case Action::Rotate: {
                        if (in_band) {
                            const double cs = std::cos(tp.value);
                            const double sn = std::sin(tp.value);
                            const double v2 = wk.v * cs - wk.w * sn;
                            const double w2 = wk.v * sn + wk.w * cs;
                            wk.v = v2;
                            wk.w = w2;
                        }
                        break;
                    }
                    case Action::Saturate: {
                        if (in_band && tp.value > 0) {
                            wk.u = wk.v = wk.w = 0.0;
                            wk.norm_ref = 0.0;
                        }
                        break;
                    }
                    case Action::GateOn:
                        wk.gate_det = spec.stark_k * tp.value * wk.cos_theta;
                        break;
                    case Action::GateOff:
                        wk.gate_det = 0.0;
                        break;
                    case Action::Sample: {
                        res.bins[tp.index] +=
                            wk.weight * std::complex<double>(wk.u, wk.v);
                        const double norm = std::sqrt(wk.u * wk.u + wk.v * wk.v +
                                                      wk.w * wk.w);
                        res.max_drift = std::max(
                            res.max_drift, std::abs(norm - wk.norm_ref));
                        break;
                    }
                }
            }
            res.sum_w += wk.weight;
            res.sum_w2 += wk.weight * wk.weight;
        }
        chunks[c] = std::move(res);
    };

    const int n_threads = cfg.n_threads > 0
                              ? cfg.n_threads
                              : static_cast<int>(std::max(
                                    1u, std::thread::hardware_concurrency()));
    run_chunks(n_chunks, n_threads, work);

    // reduce in chunk order: bit-identical regardless of scheduling
    std::vector<std::complex<double>> totals(n_bins, {0.0, 0.0});
    double sum_w = 0.0, sum_w2 = 0.0, max_drift = 0.0;
    for (const auto& res : chunks) {
        for (int b = 0; b < n_bins; ++b) totals[b] += res.bins[b];
        sum_w += res.sum_w;
        sum_w2 += res.sum_w2;
        max_drift = std::max(max_drift, res.max_drift);
    }

    EchoTrace trace;
    trace.times = tl.bin_centers;
    trace.intensity.resize(n_bins);
    for (int b = 0; b < n_bins; ++b) trace.intensity[b] = std::norm(totals[b]);
    add_echo_markers(seq, trace);

    if (stats) {
        stats->max_bloch_norm_drift = max_drift;
        stats->sum_weights = sum_w;
        stats->sum_weights_sq = sum_w2;
        stats->n_chunks = n_chunks;
        stats->n_bins = n_bins;
        stats->chunk_bin_sums.clear();
        stats->chunk_bin_sums.reserve(static_cast<std::size_t>(n_chunks) *
                                      n_bins);
        for (const auto& res : chunks)
            stats->chunk_bin_sums.insert(stats->chunk_bin_sums.end(),
                                         res.bins.begin(), res.bins.end());
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Sweep operations
// ---------------------------------------------------------------------------

namespace {

constexpr double kPulseDuration = 32e-9;   // AOM-limited pulse length

double detect_halfwidth(const SimConfig& cfg, double bandwidth_hz) {
    const double bw = bandwidth_hz > 0 ? bandwidth_hz : 1.0 / kPulseDuration;
    return std::max(3.0 / bw, 2.0 * cfg.detection_bin_s);
}

struct IntensityPoint {
    double value = 0.0;
    double sigma = 0.0;
};

// window-integrated intensity with a delete-one-chunk jackknife error
IntensityPoint integrate_trace(const SimStats& stats) {
    IntensityPoint out;
    std::vector<std::complex<double>> totals(stats.n_bins, {0.0, 0.0});
    for (int c = 0; c < stats.n_chunks; ++c)
        for (int b = 0; b < stats.n_bins; ++b)
            totals[b] += stats.chunk_bin_sums[static_cast<std::size_t>(c) *
                                                  stats.n_bins +
                                              b];
    for (int b = 0; b < stats.n_bins; ++b) out.value += std::norm(totals[b]);
    const int nc = stats.n_chunks;
    if (nc > 1) {
        double mean = 0.0;
        std::vector<double> loo(nc, 0.0);
        for (int c = 0; c < nc; ++c) {
            double val = 0.0;
            for (int b = 0; b < stats.n_bins; ++b) {
                const auto partial =
                    totals[b] - stats.chunk_bin_sums[static_cast<std::size_t>(
                                                         c) *
                                                         stats.n_bins +
                                                     b];
                val += std::norm(partial);
            }
            loo[c] = val;
            mean += val / nc;
        }
        double var = 0.0;
        for (int c = 0; c < nc; ++c) var += (loo[c] - mean) * (loo[c] - mean);
        var *= static_cast<double>(nc - 1) / nc;
        out.sigma = std::sqrt(var);
    }
    if (out.sigma <= 0.0) out.sigma = std::max(out.value, 1.0) * 1e-6;
    return out;
}

// weighted straight-line fit of ln(y) vs x; returns slope and its sigma
void log_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& sigma, double& slope,
                    double& slope_sigma) {
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    int n_used = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0)) continue;
        const double rel = sigma[i] / y[i];
        const double wgt = 1.0 / std::max(rel * rel, 1e-12);
        sw += wgt;
        swx += wgt * x[i];
        swy += wgt * std::log(y[i]);
        swxx += wgt * x[i] * x[i];
        swxy += wgt * x[i] * std::log(y[i]);
        ++n_used;
    }
    const double denom = sw * swxx - swx * swx;
    if (n_used < 2 || std::abs(denom) < 1e-300) {
        slope = 0.0;
        slope_sigma = 0.0;
        return;
    }
    slope = (sw * swxy - swx * swy) / denom;
    slope_sigma = std::sqrt(sw / denom);
    // scale by reduced chi^2 so the estimate stays honest when the relative
    // errors are off by a common factor
    if (n_used > 2) {
        const double icpt = (swy - slope * swx) / sw;
        double chi2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(y[i] > 0)) continue;
            const double rel = sigma[i] / y[i];
            const double r = (std::log(y[i]) - icpt - slope * x[i]) /
                             std::max(rel, 1e-6);
            chi2 += r * r;
        }
        slope_sigma *= std::sqrt(std::max(chi2 / (n_used - 2), 1.0));
    }
}

}  // namespace

SweepCurve two_pulse_decay(const EnsembleSpec& spec, const SimConfig& cfg,
                           const std::vector<double>& tau_grid) {
    if (tau_grid.empty())
        throw ValidationError("two_pulse_decay: empty tau grid");
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        if (tau_grid[i] <= kPulseDuration)
            throw ValidationError(
                "two_pulse_decay: tau must exceed the pulse duration");
        if (i && tau_grid[i] <= tau_grid[i - 1])
            throw ValidationError("two_pulse_decay: tau grid must ascend");
    }
    SweepCurve curve;
    curve.abscissa_unit = "s";
    curve.ordinate_unit = "arb";
    curve.abscissa_name = "tau";
    curve.ordinate_name = "echo_intensity";
    curve.label = "two_pulse_decay";
    const double t0 = 2.0 * kPulseDuration;
    for (double tau : tau_grid) {
        SimStats stats;
        const auto seq = PulseSequence::two_pulse_echo(
            tau, kPulseDuration, t0,
            detect_halfwidth(cfg, cfg.pulse_bandwidth_hz));
        simulate(spec, seq, cfg, &stats);
        const IntensityPoint pt = integrate_trace(stats);
        curve.abscissa.push_back(tau);
        curve.ordinate.push_back(pt.value);
        curve.sigma.push_back(pt.sigma);
    }
    if (spec.shf_modulation && spec.shf_modulation->depth > 0) {
        curve = apply_shf_modulation(curve, spec.shf_modulation->depth,
                                     spec.shf_modulation->frequency_hz);
    }
    return curve;
}

std::vector<ThreePulsePoint> three_pulse_sweep(
    const EnsembleSpec& spec, const SimConfig& cfg,
    const std::vector<double>& tau_grid,
    const std::vector<double>& t_wait_list) {
    if (tau_grid.size() < 3)
        throw ValidationError("three_pulse_sweep: need >= 3 tau points");
    const double tau_min = *std::min_element(tau_grid.begin(), tau_grid.end());
    for (double tw : t_wait_list) {
        if (tw < tau_min)
            throw ValidationError(
                "three_pulse_sweep: waiting times must be >= min tau");
    }
    std::vector<ThreePulsePoint> out;
    const double t0 = 2.0 * kPulseDuration;
    for (double tw : t_wait_list) {
        ThreePulsePoint point;
        point.t_wait_s = tw;
        point.curve.abscissa_unit = "s";
        point.curve.ordinate_unit = "arb";
        point.curve.abscissa_name = "tau";
        point.curve.ordinate_name = "echo_intensity";
        {
            std::ostringstream os;
            os << "three_pulse_tw_" << tw;
            point.curve.label = os.str();
        }
        for (double tau : tau_grid) {
            SimStats stats;
            const auto seq = PulseSequence::three_pulse_echo(
                tau, tw, kPulseDuration, t0,
                detect_halfwidth(cfg, cfg.pulse_bandwidth_hz));
            simulate(spec, seq, cfg, &stats);
            const IntensityPoint pt = integrate_trace(stats);
            point.curve.abscissa.push_back(tau);
            point.curve.ordinate.push_back(pt.value);
            point.curve.sigma.push_back(pt.sigma);
        }
        double slope = 0.0, slope_sigma = 0.0;
        log_linear_fit(point.curve.abscissa, point.curve.ordinate,
                       point.curve.sigma, slope, slope_sigma);
        // intensity ~ exp(-4 pi gamma_eff tau)
        point.gamma_eff_hz = -slope / (4.0 * std::numbers::pi);
        point.gamma_eff_sigma_hz = slope_sigma / (4.0 * std::numbers::pi);
        out.push_back(std::move(point));
    }
    return out;
}

SweepCurve gamma_eff_curve(const std::vector<ThreePulsePoint>& points) {
    SweepCurve curve;
    curve.abscissa_unit = "s";
    curve.ordinate_unit = "Hz";
    curve.abscissa_name = "t_wait";
    curve.ordinate_name = "gamma_eff";
    curve.label = "spectral_diffusion";
    for (const auto& p : points) {
        curve.abscissa.push_back(p.t_wait_s);
        curve.ordinate.push_back(p.gamma_eff_hz);
        curve.sigma.push_back(std::max(p.gamma_eff_sigma_hz,
                                       1e-6 * std::abs(p.gamma_eff_hz)));
    }
    return curve;
}

SweepCurve saturation_recovery(const EnsembleSpec& spec, const SimConfig& cfg,
                               const std::vector<double>& t_wait_grid,
                               const RecoveryOptions& options) {
    require_valid(echo::validate(spec), "saturation_recovery: spec");
    require_valid(validate(cfg), "saturation_recovery: config");
    for (std::size_t i = 1; i < t_wait_grid.size(); ++i)
        if (t_wait_grid[i] <= t_wait_grid[i - 1])
            throw ValidationError("saturation_recovery: grid must ascend");

    const double ts = spec.spin_t1_short_s;  // excited-state drain
    const double tl = spec.spin_t1_long_s;   // ground sublevel equilibration
    const double pump = options.pump_rate_hz * options.power_scale;

    // three-level rate model: n = (n_a addressable, n_b shelf, n_e excited);
    // the excited state feeds both sublevels equally, so the wait-time
    // solution is exactly the double-exponential recovery in (ts, tl)
    double na = 0.5, nb = 0.5, ne = 0.0;
    {
        auto deriv = [&](double a, double b, double e, double& da, double& db,
                         double& de) {
            const double spin = (a - b) / (2.0 * tl);
            da = -pump * a + e / (2.0 * ts) - spin;
            db = e / (2.0 * ts) + spin;
            de = pump * a - e / ts;
        };
        const double t_end = options.saturation_duration_s;
        const double dt =
            std::min({ts, tl, pump > 0 ? 1.0 / pump : t_end, t_end}) / 50.0;
        const int steps = std::max(1, static_cast<int>(t_end / dt));
        const double h = t_end / steps;
        for (int s = 0; s < steps; ++s) {
            double k1a, k1b, k1e, k2a, k2b, k2e, k3a, k3b, k3e, k4a, k4b, k4e;
            deriv(na, nb, ne, k1a, k1b, k1e);
            deriv(na + 0.5 * h * k1a, nb + 0.5 * h * k1b, ne + 0.5 * h * k1e,
                  k2a, k2b, k2e);
            deriv(na + 0.5 * h * k2a, nb + 0.5 * h * k2b, ne + 0.5 * h * k2e,
                  k3a, k3b, k3e);
            deriv(na + h * k3a, nb + h * k3b, ne + h * k3e, k4a, k4b, k4e);
            na += h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
            nb += h / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
            ne += h / 6.0 * (k1e + 2 * k2e + 2 * k3e + k4e);
        }
    }
    const double delta0 = na - nb;
    const double ne0 = ne;

    SweepCurve curve;
    curve.abscissa_unit = "s";
    curve.ordinate_unit = "arb";
    curve.abscissa_name = "t_wait";
    curve.ordinate_name = "echo_amplitude";
    curve.label = "saturation_recovery";
    for (double tw : t_wait_grid) {
        const double net = ne0 * std::exp(-tw / ts);
        const double delta = delta0 * std::exp(-tw / tl);
        curve.abscissa.push_back(tw);
        curve.ordinate.push_back(0.5 * (1.0 - net + delta));
    }
    return curve;
}

SweepCurve stark_gated_echo(const EnsembleSpec& spec, const SimConfig& cfg,
                            const std::vector<double>& pulse_lengths,
                            double field_v_per_m) {
    if (pulse_lengths.empty())
        throw ValidationError("stark_gated_echo: empty pulse length list");
    const double max_len =
        *std::max_element(pulse_lengths.begin(), pulse_lengths.end());
    const double halfwidth = detect_halfwidth(cfg, cfg.pulse_bandwidth_hz);
    const double tau = max_len + 2.0 * kPulseDuration + 8.0 * halfwidth;
    const double t0 = 2.0 * kPulseDuration;

    // projected amplitude onto the expected echo quadrature, normalized by a
    // zero-length reference run so static-ensemble shape factors cancel
    auto projected = [&](double len, SimStats& stats) {
        const auto seq = PulseSequence::stark_gated_echo(
            tau, len, field_v_per_m, kPulseDuration, t0, halfwidth);
        require_valid(echo::validate(seq), "stark_gated_echo: sequence");
        simulate(spec, seq, cfg, &stats);
        std::vector<std::complex<double>> totals(stats.n_bins, {0.0, 0.0});
        for (int c = 0; c < stats.n_chunks; ++c)
            for (int b = 0; b < stats.n_bins; ++b)
                totals[b] += stats.chunk_bin_sums[static_cast<std::size_t>(c) *
                                                      stats.n_bins +
                                                  b];
        double sum = 0.0;
        for (const auto& z : totals) sum += (std::complex<double>(0, 1) * z).real();
        return sum;
    };

    SimStats ref_stats;
    const double ref = projected(0.0, ref_stats);
    if (!(std::abs(ref) > 0))
        throw ValidationError("stark_gated_echo: zero reference echo");

    SweepCurve curve;
    curve.abscissa_unit = "V*s/m";
    curve.ordinate_unit = "arb";
    curve.abscissa_name = "pulse_area";
    curve.ordinate_name = "echo_amplitude";
    curve.label = "stark_gated_echo";
    for (double len : pulse_lengths) {
        SimStats stats;
        const double raw = len > 0 ? projected(len, stats) : ref;
        const SimStats& st = len > 0 ? stats : ref_stats;
        // delete-one-chunk jackknife of the normalized amplitude
        double sigma = 0.0;
        if (st.n_chunks > 1 && st.n_chunks == ref_stats.n_chunks) {
            const int nc = st.n_chunks;
            std::vector<double> loo(nc);
            double mean = 0.0;
            for (int c = 0; c < nc; ++c) {
                double num = raw, den = ref;
                for (int b = 0; b < st.n_bins; ++b) {
                    num -= (std::complex<double>(0, 1) *
                            st.chunk_bin_sums[static_cast<std::size_t>(c) *
                                                  st.n_bins +
                                              b])
                               .real();
                    den -= (std::complex<double>(0, 1) *
                            ref_stats
                                .chunk_bin_sums[static_cast<std::size_t>(c) *
                                                    ref_stats.n_bins +
                                                b])
                               .real();
                }
                loo[c] = num / den;
                mean += loo[c] / nc;
            }
            double var = 0.0;
            for (int c = 0; c < nc; ++c)
                var += (loo[c] - mean) * (loo[c] - mean);
            sigma = std::sqrt(var * static_cast<double>(nc - 1) / nc);
        }
        curve.abscissa.push_back(field_v_per_m * len);
        curve.ordinate.push_back(raw / ref);
        curve.sigma.push_back(std::max(sigma, 1e-9));
    }
    return curve;
}

SweepCurve apply_shf_modulation(const SweepCurve& curve, double depth,
                                double frequency_hz) {
    if (!(depth >= 0.0 && depth <= 1.0))
        throw ValidationError("apply_shf_modulation: depth must be in [0, 1]");
    SweepCurve out = curve;
    const auto tau = curve.abscissa_si();
    for (std::size_t i = 0; i < out.ordinate.size(); ++i) {
        const double s = std::sin(std::numbers::pi * frequency_hz * tau[i]);
        const double factor = 1.0 - depth * s * s;
        out.ordinate[i] *= factor;
        if (i < out.sigma.size()) out.sigma[i] *= factor;
    }
    return out;
}

EchoTrace apply_shf_modulation(const EchoTrace& trace, double depth,
                               double frequency_hz) {
    if (!(depth >= 0.0 && depth <= 1.0))
        throw ValidationError("apply_shf_modulation: depth must be in [0, 1]");
    EchoTrace out = trace;
    for (std::size_t i = 0; i < out.intensity.size(); ++i) {
        const double s =
            std::sin(std::numbers::pi * frequency_hz * out.times[i]);
        out.intensity[i] *= 1.0 - depth * s * s;
    }
    return out;
}

}  // namespace echo::sim
