#include "echo/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "echo/errors.hpp"
#include "echo/units.hpp"

namespace echo {

namespace {

constexpr double kPi = std::numbers::pi;

double lorentz_cdf(double x, double center, double hwhm) {
    return 0.5 + std::atan((x - center) / hwhm) / kPi;
}

double lorentz_quantile(double p, double center, double hwhm) {
    return center + hwhm * std::tan(kPi * (p - 0.5));
}

double gauss_cdf(double x, double center, double sigma) {
    return 0.5 * (1.0 + std::erf((x - center) / (sigma * std::numbers::sqrt2)));
}

}  // namespace

double InhomogeneousLine::sample(CounterRng& rng) const {
    if (shape == LineShape::Gaussian) {
        const double sigma = fwhm_hz / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
        return center_hz + sigma * rng.normal();
    }
    const double hwhm = 0.5 * fwhm_hz;
    const double span = truncation_fwhm * fwhm_hz;
    const double p_lo = lorentz_cdf(center_hz - span, center_hz, hwhm);
    const double p_hi = lorentz_cdf(center_hz + span, center_hz, hwhm);
    const double p = p_lo + (p_hi - p_lo) * rng.uniform();
    return lorentz_quantile(p, center_hz, hwhm);
}

double InhomogeneousLine::sample_within(CounterRng& rng, double lo,
                                        double hi) const {
    const double u = rng.uniform();
    if (shape == LineShape::Lorentzian) {
        const double hwhm = 0.5 * fwhm_hz;
        const double p_lo = lorentz_cdf(lo, center_hz, hwhm);
        const double p_hi = lorentz_cdf(hi, center_hz, hwhm);
        return lorentz_quantile(p_lo + (p_hi - p_lo) * u, center_hz, hwhm);
    }
    // Gaussian: invert the CDF restricted to [lo, hi] by bisection.
    const double sigma = fwhm_hz / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double p_lo = gauss_cdf(lo, center_hz, sigma);
    const double p_hi = gauss_cdf(hi, center_hz, sigma);
    const double p = p_lo + (p_hi - p_lo) * u;
    double a = lo, b = hi;
    for (int i = 0; i < 200 && (b - a) > 1e-14 * (hi - lo); ++i) {
        const double mid = 0.5 * (a + b);
        (gauss_cdf(mid, center_hz, sigma) < p ? a : b) = mid;
    }
    return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// PulseSequence
// ---------------------------------------------------------------------------

std::vector<OpticalPulse> PulseSequence::optical_pulses() const {
    std::vector<OpticalPulse> out;
    for (const auto& e : events)
        if (const auto* p = std::get_if<OpticalPulse>(&e)) out.push_back(*p);
    return out;
}

std::vector<StarkGate> PulseSequence::stark_gates() const {
    std::vector<StarkGate> out;
    for (const auto& e : events)
        if (const auto* g = std::get_if<StarkGate>(&e)) out.push_back(*g);
    return out;
}

std::vector<Detect> PulseSequence::detect_windows() const {
    std::vector<Detect> out;
    for (const auto& e : events)
        if (const auto* d = std::get_if<Detect>(&e)) out.push_back(*d);
    return out;
}

namespace {
double event_start(const SequenceEvent& e) {
    return std::visit([](const auto& v) { return v.start_s; }, e);
}
double event_end(const SequenceEvent& e) {
    return std::visit([](const auto& v) { return v.start_s + v.duration_s; }, e);
}
}  // namespace

double PulseSequence::end_time() const {
    double end = 0.0;
    for (const auto& e : events) end = std::max(end, event_end(e));
    return end;
}

namespace {
void sort_events(PulseSequence& seq) {
    std::stable_sort(seq.events.begin(), seq.events.end(),
                     [](const SequenceEvent& a, const SequenceEvent& b) {
                         return std::visit(
                                    [](const auto& v) { return v.start_s; }, a) <
                                std::visit(
                                    [](const auto& v) { return v.start_s; }, b);
                     });
}
}  // namespace

PulseSequence PulseSequence::two_pulse_echo(double tau_s,
                                            double pulse_duration_s,
                                            double t0_s,
                                            double detect_halfwidth_s) {
    PulseSequence seq;
    seq.events.push_back(OpticalPulse{t0_s - 0.5 * pulse_duration_s,
                                      pulse_duration_s, PulseArea::HalfPi, 1.0});
    seq.events.push_back(OpticalPulse{t0_s + tau_s - 0.5 * pulse_duration_s,
                                      pulse_duration_s, PulseArea::Pi, 1.0});
    const double echo = t0_s + 2.0 * tau_s;
    seq.events.push_back(
        Detect{echo - detect_halfwidth_s, 2.0 * detect_halfwidth_s});
    sort_events(seq);
    return seq;
}

PulseSequence PulseSequence::three_pulse_echo(double tau_s, double t_wait_s,
                                              double pulse_duration_s,
                                              double t0_s,
                                              double detect_halfwidth_s) {
    PulseSequence seq;
    const double d = pulse_duration_s;
    seq.events.push_back(
        OpticalPulse{t0_s - 0.5 * d, d, PulseArea::HalfPi, 1.0});
    seq.events.push_back(
        OpticalPulse{t0_s + tau_s - 0.5 * d, d, PulseArea::HalfPi, 1.0});
    seq.events.push_back(OpticalPulse{t0_s + tau_s + t_wait_s - 0.5 * d, d,
                                      PulseArea::HalfPi, 1.0});
    const double echo = t0_s + 2.0 * tau_s + t_wait_s;
    seq.events.push_back(
        Detect{echo - detect_halfwidth_s, 2.0 * detect_halfwidth_s});
    sort_events(seq);
    return seq;
}

PulseSequence PulseSequence::stark_gated_echo(double tau_s,
                                              double gate_length_s,
                                              double field_v_per_m,
                                              double pulse_duration_s,
                                              double t0_s,
                                              double detect_halfwidth_s) {
    PulseSequence seq = two_pulse_echo(tau_s, pulse_duration_s, t0_s,
                                       detect_halfwidth_s);
    if (gate_length_s > 0.0) {
        // gate starts just after the pi/2 pulse ends
        const double gate_start = t0_s + 0.75 * pulse_duration_s;
        seq.events.push_back(StarkGate{gate_start, gate_length_s, field_v_per_m});
    }
    sort_events(seq);
    return seq;
}

// ---------------------------------------------------------------------------
// SweepCurve / FitResult
// ---------------------------------------------------------------------------

std::vector<double> SweepCurve::abscissa_si() const {
    std::vector<double> out(abscissa.size());
    for (std::size_t i = 0; i < abscissa.size(); ++i)
        out[i] = units::to_si(abscissa[i], abscissa_unit);
    return out;
}

std::vector<double> SweepCurve::ordinate_si() const {
    std::vector<double> out(ordinate.size());
    for (std::size_t i = 0; i < ordinate.size(); ++i)
        out[i] = units::to_si(ordinate[i], ordinate_unit);
    return out;
}

std::vector<double> SweepCurve::sigma_si() const {
    std::vector<double> out(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i)
        out[i] = units::to_si(sigma[i], ordinate_unit);
    return out;
}

double FitResult::param(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size(); ++i)
        if (param_names[i] == name) return params[i];
    throw std::out_of_range("no fit parameter named '" + name + "'");
}

double FitResult::sigma(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size(); ++i)
        if (param_names[i] == name) return std::sqrt(std::max(0.0, cov(i, i)));
    throw std::out_of_range("no fit parameter named '" + name + "'");
}

double FitResult::cov(std::size_t i, std::size_t j) const {
    const std::size_t k = params.size();
    return covariance.at(i * k + j);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::string ValidationReport::joined() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i];
    }
    return os.str();
}

ValidationReport validate(const EnsembleSpec& spec) {
    ValidationReport r;
    auto add = [&r](const std::string& m) { r.violations.push_back(m); };
    if (!(spec.line.fwhm_hz > 0)) add("line.fwhm must be > 0");
    if (!(spec.t1_optical_s > 0)) add("t1_optical must be > 0");
    if (!(spec.t2_optical_s > 0)) add("t2_optical must be > 0");
    if (!(spec.stretch_x >= 1.0)) add("stretch_x must be >= 1");
    if (!(spec.spin_t1_short_s > 0)) add("spin_t1_short must be > 0");
    if (!(spec.spin_t1_long_s > 0)) add("spin_t1_long must be > 0");
    if (!(spec.short_fraction >= 0.0 && spec.short_fraction <= 1.0))
        add("short_fraction must be in [0, 1]");
    if (!(spec.stark_k >= 0)) add("stark_k must be >= 0");
    if (spec.shf_modulation) {
        if (!(spec.shf_modulation->depth >= 0.0 &&
              spec.shf_modulation->depth <= 1.0))
            add("shf_modulation.depth must be in [0, 1]");
        if (!(spec.shf_modulation->frequency_hz >= 0))
            add("shf_modulation.frequency must be >= 0");
    }
    if (spec.bath) {
        if (!(spec.bath->flip_rate_hz >= 0)) add("bath.flip_rate must be >= 0");
        if (!(spec.bath->gamma_sd_hz >= 0)) add("bath.gamma_sd must be >= 0");
        if (!(spec.bath->tls_rate_hz >= 0)) add("bath.tls_rate must be >= 0");
        if (!(spec.bath->tls_t0_s > 0)) add("bath.tls_t0 must be > 0");
    }
    return r;
}

ValidationReport validate(const PulseSequence& seq) {
    ValidationReport r;
    auto add = [&r](const std::string& m) { r.violations.push_back(m); };

    for (std::size_t i = 1; i < seq.events.size(); ++i) {
        if (event_start(seq.events[i]) < event_start(seq.events[i - 1])) {
            add("events must be sorted by start time");
            break;
        }
    }
    const auto pulses = seq.optical_pulses();
    for (const auto& p : pulses) {
        if (!(p.duration_s > 0)) add("optical pulse duration must be > 0");
        if (!(p.power_scale >= 0)) add("optical pulse power_scale must be >= 0");
    }
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        for (std::size_t j = i + 1; j < pulses.size(); ++j) {
            if (pulses[i].start_s < pulses[j].end() &&
                pulses[j].start_s < pulses[i].end()) {
                add("optical pulses must not overlap");
            }
        }
    }
    for (const auto& d : seq.detect_windows()) {
        if (!(d.duration_s > 0)) add("detection window duration must be > 0");
        for (const auto& p : pulses) {
            if (d.start_s < p.end() && p.start_s < d.end()) {
                add("detection window overlaps an optical pulse");
            }
        }
    }
    for (const auto& g : seq.stark_gates()) {
        if (!(g.duration_s > 0)) add("stark gate duration must be > 0");
        for (const auto& p : pulses) {
            if (g.start_s < p.end() && p.start_s < g.end()) {
                add("stark gate overlaps an optical pulse");
            }
        }
    }
    return r;
}

ValidationReport validate(const DephasingParams& params) {
    ValidationReport r;
    auto add = [&r](const std::string& m) { r.violations.push_back(m); };
    if (!(params.gamma0_hz >= 0)) add("gamma0 must be >= 0");
    if (!(params.gamma_sd_hz >= 0)) add("gamma_sd must be >= 0");
    if (!(params.rate_r_hz >= 0)) add("rate_r must be >= 0");
    if (!(params.gamma_tls_hz >= 0)) add("gamma_tls must be >= 0");
    if (!(params.t0_s > 0)) add("t0 must be > 0");
    return r;
}

ValidationReport validate(const SweepCurve& curve) {
    ValidationReport r;
    auto add = [&r](const std::string& m) { r.violations.push_back(m); };
    if (curve.abscissa.size() != curve.ordinate.size())
        add("abscissa and ordinate lengths differ");
    if (curve.has_sigma() && curve.sigma.size() != curve.ordinate.size())
        add("sigma length differs from ordinate length");
    if (curve.has_sigma()) {
        for (double s : curve.sigma) {
            if (!(s > 0)) {
                add("sigma entries must be > 0");
                break;
            }
        }
    }
    return r;
}

void require_valid(const ValidationReport& report, const std::string& what) {
    if (!report.ok()) {
        throw ValidationError(what + ": " + report.joined());
    }
}

}  // namespace echo
