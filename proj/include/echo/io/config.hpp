// config.hpp - declarative run configuration
//
// Format: INI-style sections of key = value lines; '#' starts a comment;
// values are bare numbers, quantities with units ("64.1 us"), words, or
// comma-separated lists. No scripting, no includes.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "echo/metrics.hpp"
#include "echo/simulator.hpp"
#include "echo/types.hpp"

namespace echo::io {

struct ConfigFile {
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool used = false;
    };
    // section -> key -> entry
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::string origin;
    std::string raw_text;

    bool has(const std::string& section, const std::string& key) const;
    std::string require(const std::string& section, const std::string& key) const;
    std::optional<std::string> get(const std::string& section,
                                   const std::string& key) const;
    double require_si(const std::string& section, const std::string& key) const;
    std::optional<double> get_si(const std::string& section,
                                 const std::string& key) const;
    double get_si_or(const std::string& section, const std::string& key,
                     double fallback) const;
    std::vector<double> get_si_list(const std::string& section,
                                    const std::string& key) const;
    /// Throws ValidationError naming any key that was never consumed.
    void check_all_used() const;
};

ConfigFile parse_config_string(const std::string& text,
                               const std::string& origin = "<string>");
ConfigFile parse_config(const std::filesystem::path& path);

// --- run configuration -------------------------------------------------

enum class ExperimentType {
    TwoPulseDecay,
    ThreePulseSweep,
    SaturationRecovery,
    StarkGatedEcho,
    Trace,
};

struct Experiment {
    ExperimentType type = ExperimentType::TwoPulseDecay;
    std::vector<double> tau_grid;        // s
    std::vector<double> t_wait_list;     // s
    std::vector<double> pulse_lengths;   // s
    double field_v_per_m = 0.0;
    double trace_tau_s = 0.0;
    double trace_detect_halfwidth_s = 0.0;
    sim::RecoveryOptions recovery;
    double shf_depth = 0.0;              // optional post-processing
    double shf_frequency_hz = 0.0;
};

struct RunConfig {
    EnsembleSpec ensemble;
    sim::SimConfig sim;
    Experiment experiment;
    std::string output_prefix = "run";
    std::optional<std::string> fit_model;   // must exist in the registry
    std::optional<double> fit_t0_s;
};

/// Build and validate a RunConfig; unknown sections/keys, bad units and
/// violated invariants raise ValidationError with file/line context.
RunConfig parse_run_config(const ConfigFile& cfg);

// --- report configuration ----------------------------------------------

struct ReportConfig {
    EnsembleSpec ensemble;
    double od = 0.0;
    double purcell_factor = 1.0;
    std::optional<metrics::DeviceGeometry> geometry;
    std::optional<metrics::DeviceGeometry> target_geometry;
    std::optional<double> spin_t2_projection_s;
};

ReportConfig parse_report_config(const ConfigFile& cfg);

/// Ensemble spec shared by run and report configs ([ensemble] + [bath]).
EnsembleSpec parse_ensemble(const ConfigFile& cfg);

}  // namespace echo::io
