#include "echo/io/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "echo/errors.hpp"
#include "echo/fitmodels.hpp"
#include "echo/units.hpp"

namespace echo::io {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
    std::ostringstream os;
    os << origin;
    if (line > 0) os << ":" << line;
    os << ": " << msg;
    throw ValidationError(os.str());
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : value) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty() || out.empty()) out.push_back(trim(cur));
    return out;
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    k->second.used = true;
    return k->second.value;
}

std::string ConfigFile::require(const std::string& section,
                                const std::string& key) const {
    auto v = get(section, key);
    if (!v) fail(origin, 0, "missing required key [" + section + "] " + key);
    return *v;
}

double ConfigFile::require_si(const std::string& section,
                              const std::string& key) const {
    const std::string text = require(section, key);
    try {
        return units::parse_si(text);
    } catch (const UnitError& e) {
        auto s = sections.find(section);
        const int line = s->second.at(key).line;
        fail(origin, line, std::string(e.what()) + " (key " + key + ")");
    }
}

std::optional<double> ConfigFile::get_si(const std::string& section,
                                         const std::string& key) const {
    auto v = get(section, key);
    if (!v) return std::nullopt;
    try {
        return units::parse_si(*v);
    } catch (const UnitError& e) {
        auto s = sections.find(section);
        const int line = s->second.at(key).line;
        fail(origin, line, std::string(e.what()) + " (key " + key + ")");
    }
}

double ConfigFile::get_si_or(const std::string& section, const std::string& key,
                             double fallback) const {
    auto v = get_si(section, key);
    return v ? *v : fallback;
}

std::vector<double> ConfigFile::get_si_list(const std::string& section,
                                            const std::string& key) const {
    const std::string text = require(section, key);
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
        try {
            out.push_back(units::parse_si(item));
        } catch (const UnitError& e) {
            auto s = sections.find(section);
            fail(origin, s->second.at(key).line,
                 std::string(e.what()) + " (key " + key + ")");
        }
    }
    return out;
}

void ConfigFile::check_all_used() const {
    for (const auto& [section, keys] : sections) {
        for (const auto& [key, entry] : keys) {
            if (!entry.used) {
                fail(origin, entry.line,
                     "unknown key '" + key + "' in section [" + section + "]");
            }
        }
    }
}

ConfigFile parse_config_string(const std::string& text,
                               const std::string& origin) {
    ConfigFile cfg;
    cfg.origin = origin;
    cfg.raw_text = text;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                fail(origin, line_no, "unterminated section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) fail(origin, line_no, "empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail(origin, line_no, "expected key = value, got '" + t + "'");
        if (section.empty())
            fail(origin, line_no, "key outside any [section]");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail(origin, line_no, "empty key");
        if (cfg.sections[section].count(key))
            fail(origin, line_no, "duplicate key '" + key + "'");
        cfg.sections[section][key] = {value, line_no, false};
    }
    return cfg;
}

ConfigFile parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_string(buf.str(), path.string());
}

// ---------------------------------------------------------------------------
// Typed configurations
// ---------------------------------------------------------------------------

namespace {

LineShape parse_line_shape(const std::string& word, const std::string& origin) {
    if (word == "lorentzian") return LineShape::Lorentzian;
    if (word == "gaussian") return LineShape::Gaussian;
    fail(origin, 0, "unknown line shape '" + word + "'");
}

DipoleKernel parse_kernel(const std::string& word, const std::string& origin) {
    if (word == "sin4") return DipoleKernel::Sin4;
    if (word == "cos4") return DipoleKernel::Cos4;
    if (word == "isotropic") return DipoleKernel::Isotropic;
    fail(origin, 0, "unknown dipole kernel '" + word + "'");
}

// grid helpers: either an explicit list "x_grid = a, b, c" or
// "x_start/x_stop/x_points[/x_spacing]"
std::vector<double> parse_grid(const ConfigFile& cfg, const std::string& section,
                               const std::string& stem) {
    if (cfg.has(section, stem + "_grid"))
        return cfg.get_si_list(section, stem + "_grid");
    const double start = cfg.require_si(section, stem + "_start");
    const double stop = cfg.require_si(section, stem + "_stop");
    const double points_d = cfg.require_si(section, stem + "_points");
    const int points = static_cast<int>(points_d);
    if (points < 2) fail(cfg.origin, 0, stem + "_points must be >= 2");
    const std::string spacing =
        cfg.get(section, stem + "_spacing").value_or("linear");
    std::vector<double> grid(points);
    if (spacing == "log") {
        if (!(start > 0))
            fail(cfg.origin, 0, stem + "_start must be > 0 for log spacing");
        for (int i = 0; i < points; ++i)
            grid[i] = start * std::pow(stop / start,
                                       static_cast<double>(i) / (points - 1));
    } else if (spacing == "linear") {
        for (int i = 0; i < points; ++i)
            grid[i] = start + (stop - start) * i / (points - 1);
    } else {
        fail(cfg.origin, 0, "unknown spacing '" + spacing + "'");
    }
    return grid;
}

metrics::DeviceGeometry parse_geometry(const ConfigFile& cfg,
                                       const std::string& section) {
    metrics::DeviceGeometry g;
    g.doped_thickness_m = cfg.require_si(section, "doped_thickness");
    g.er_density_ppm = cfg.require_si(section, "er_density_ppm");
    g.waveguide_length_m = cfg.require_si(section, "waveguide_length");
    g.electrode_gap_m = cfg.require_si(section, "electrode_gap");
    g.applied_voltage_v = cfg.require_si(section, "applied_voltage");
    g.field_scale = cfg.get_si_or(section, "field_scale", 1.0);
    require_valid(metrics::validate(g), cfg.origin + ": [" + section + "]");
    return g;
}

}  // namespace

EnsembleSpec parse_ensemble(const ConfigFile& cfg) {
    EnsembleSpec spec;
    spec.line.center_hz = cfg.get_si_or("ensemble", "line_center", 0.0);
    spec.line.fwhm_hz = cfg.require_si("ensemble", "line_fwhm");
    spec.line.shape = parse_line_shape(
        cfg.get("ensemble", "line_shape").value_or("lorentzian"), cfg.origin);
    spec.t1_optical_s = cfg.require_si("ensemble", "t1_optical");
    spec.t2_optical_s = cfg.require_si("ensemble", "t2_optical");
    spec.stretch_x = cfg.get_si_or("ensemble", "stretch_x", 1.0);
    spec.spin_t1_short_s = cfg.require_si("ensemble", "spin_t1_short");
    spec.spin_t1_long_s = cfg.require_si("ensemble", "spin_t1_long");
    spec.short_fraction = cfg.get_si_or("ensemble", "short_fraction", 0.5);
    spec.stark_k = cfg.get_si_or("ensemble", "stark_k", 0.0);
    spec.dipole_kernel = parse_kernel(
        cfg.get("ensemble", "dipole_kernel").value_or("isotropic"), cfg.origin);
    if (cfg.has("ensemble", "shf_depth")) {
        ShfModulation shf;
        shf.depth = cfg.require_si("ensemble", "shf_depth");
        shf.frequency_hz = cfg.require_si("ensemble", "shf_frequency");
        spec.shf_modulation = shf;
    }
    if (cfg.sections.count("bath")) {
        SuddenJumpBath bath;
        bath.flip_rate_hz = cfg.require_si("bath", "flip_rate");
        bath.gamma_sd_hz = cfg.require_si("bath", "gamma_sd");
        bath.tls_rate_hz = cfg.get_si_or("bath", "tls_rate", 0.0);
        bath.tls_t0_s = cfg.get_si_or("bath", "tls_t0", 1e-4);
        spec.bath = bath;
    }
    require_valid(echo::validate(spec), cfg.origin + ": [ensemble]");
    return spec;
}

RunConfig parse_run_config(const ConfigFile& cfg) {
    RunConfig run;
    run.ensemble = parse_ensemble(cfg);

    run.sim.n_ions = static_cast<int>(cfg.get_si_or("sim", "n_ions", 10000));
    run.sim.seed = static_cast<std::uint64_t>(cfg.get_si_or("sim", "seed", 1));
    run.sim.time_step_s = cfg.get_si_or("sim", "time_step", 8e-9);
    run.sim.pulse_bandwidth_hz = cfg.get_si_or("sim", "pulse_bandwidth", 0.0);
    run.sim.detection_bin_s = cfg.get_si_or("sim", "detection_bin", 8e-9);
    run.sim.memory_budget_bytes = static_cast<std::uint64_t>(
        cfg.get_si_or("sim", "memory_budget_bytes", 256.0 * 1024 * 1024));
    run.sim.n_threads = static_cast<int>(cfg.get_si_or("sim", "threads", 0));
    require_valid(sim::validate(run.sim), cfg.origin + ": [sim]");

    const std::string type = cfg.require("experiment", "type");
    Experiment& exp = run.experiment;
    if (type == "two_pulse_decay") {
        exp.type = ExperimentType::TwoPulseDecay;
        exp.tau_grid = parse_grid(cfg, "experiment", "tau");
    } else if (type == "three_pulse_sweep") {
        exp.type = ExperimentType::ThreePulseSweep;
        exp.tau_grid = parse_grid(cfg, "experiment", "tau");
        exp.t_wait_list = parse_grid(cfg, "experiment", "t_wait");
    } else if (type == "saturation_recovery") {
        exp.type = ExperimentType::SaturationRecovery;
        exp.t_wait_list = parse_grid(cfg, "experiment", "t_wait");
        exp.recovery.saturation_duration_s =
            cfg.get_si_or("experiment", "saturation_duration", 1e-3);
        exp.recovery.pump_rate_hz =
            cfg.get_si_or("experiment", "pump_rate", 2000.0);
        exp.recovery.power_scale =
            cfg.get_si_or("experiment", "power_scale", 1.0);
    } else if (type == "stark_gated_echo") {
        exp.type = ExperimentType::StarkGatedEcho;
        exp.pulse_lengths = parse_grid(cfg, "experiment", "pulse_length");
        exp.field_v_per_m = cfg.require_si("experiment", "field");
    } else if (type == "trace") {
        exp.type = ExperimentType::Trace;
        exp.trace_tau_s = cfg.require_si("experiment", "tau");
        exp.trace_detect_halfwidth_s =
            cfg.get_si_or("experiment", "detect_halfwidth", 0.0);
    } else {
        fail(cfg.origin, 0, "unknown experiment type '" + type + "'");
    }

    if (cfg.sections.count("output")) {
        run.output_prefix = cfg.get("output", "prefix").value_or("run");
    }
    if (cfg.sections.count("fit")) {
        run.fit_model = cfg.require("fit", "model");
        if (!fit::registry_has(*run.fit_model)) {
            fail(cfg.origin, 0,
                 "unknown model id '" + *run.fit_model + "' in [fit]");
        }
        if (cfg.has("fit", "t0")) run.fit_t0_s = cfg.require_si("fit", "t0");
    }
    cfg.check_all_used();
    return run;
}

ReportConfig parse_report_config(const ConfigFile& cfg) {
    ReportConfig rep;
    rep.ensemble = parse_ensemble(cfg);
    rep.od = cfg.get_si_or("report", "od", 0.0);
    if (cfg.has("report", "efficiency")) {
        const double eta = cfg.require_si("report", "efficiency");
        rep.od = model::od_from_efficiency(eta, model::EfficiencyForm::PaperApprox);
    }
    rep.purcell_factor = cfg.get_si_or("report", "purcell_factor", 1.0);
    if (cfg.has("report", "spin_t2_projection"))
        rep.spin_t2_projection_s = cfg.require_si("report", "spin_t2_projection");
    if (cfg.sections.count("geometry"))
        rep.geometry = parse_geometry(cfg, "geometry");
    if (cfg.sections.count("geometry_target"))
        rep.target_geometry = parse_geometry(cfg, "geometry_target");
    cfg.check_all_used();
    return rep;
}

}  // namespace echo::io
