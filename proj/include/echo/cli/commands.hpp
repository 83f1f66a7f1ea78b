// commands.hpp - batch subcommands behind the echotool binary
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace echo::cli {

// exit codes: 0 success, 2 validation error, 3 fit non-convergence
// (results still written, flagged), 4 I/O error
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitFitNotConverged = 3;
inline constexpr int kExitIo = 4;

/// Output directory resolution: explicit flag, else ECHOTOOL_OUT_DIR, else ".".
std::string resolve_out_dir(const std::string& flag_value);

struct SimulateArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string out_dir;   // resolved via resolve_out_dir
};
int cmd_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err);

struct FitArgs {
    std::string dataset_path;
    std::string model_id;
    std::optional<double> t0_s;
    bool free_x = false;
    bool submodels = false;
    std::string format = "text";   // text | json
    std::string out_path;          // default: <dataset>.fit.json
    int max_iterations = 400;
};
int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);

struct ReportArgs {
    std::string config_path;
    std::string format = "text";   // text | json
    std::string out_path;          // optional JSON output file
};
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

struct PlotArgs {
    std::vector<std::string> dataset_paths;
    std::string fit_path;             // overlay source
    std::optional<bool> log_x;        // unset = automatic
    std::optional<bool> log_y;
    std::string out_dir;
    std::string combined_out;         // single figure when set
};
int cmd_plot(const PlotArgs& args, std::ostream& out, std::ostream& err);

}  // namespace echo::cli
