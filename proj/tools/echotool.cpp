// echotool - photon-echo simulation and analysis front end
//
//   echotool simulate --config run.cfg [--seed N] [--out-dir DIR]
//   echotool fit <dataset> --model <id> [--t0 Q] [--free-x] [--submodels]
//   echotool report --config report.cfg [--format text|json] [--out FILE]
//   echotool plot <dataset...> [--fit FILE] [--log-x] [--log-y]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "echo/cli/commands.hpp"
#include "echo/fitmodels.hpp"
#include "echo/units.hpp"
#include "echo/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{std::string(echo::kToolName) + " " + echo::kToolVersion +
                 " - photon-echo simulation and analysis"};
    app.require_subcommand(1);

    // simulate
    echo::cli::SimulateArgs sim_args;
    std::string seed_text;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "run a configured experiment and write datasets");
    sim_cmd->add_option("--config", sim_args.config_path, "run configuration")
        ->required();
    sim_cmd->add_option("--seed", seed_text, "override the configured seed");
    sim_cmd->add_option("--out-dir", sim_args.out_dir,
                        "output directory (default: $ECHOTOOL_OUT_DIR or .)");

    // fit
    echo::cli::FitArgs fit_args;
    std::string t0_text;
    auto* fit_cmd =
        app.add_subcommand("fit", "fit a dataset against a registry model");
    fit_cmd->add_option("dataset", fit_args.dataset_path, "dataset file")
        ->required();
    std::string model_list;
    for (const auto& id : echo::fit::registry_ids()) {
        if (!model_list.empty()) model_list += ", ";
        model_list += id;
    }
    fit_cmd->add_option("--model", fit_args.model_id,
                        "model id (" + model_list + ")");
    fit_cmd->add_option("--t0", t0_text,
                        "spectral-diffusion t0, e.g. '0.1 ms' (default: "
                        "smallest waiting time)");
    fit_cmd->add_flag("--free-x", fit_args.free_x,
                      "free the echo-decay stretch exponent");
    fit_cmd->add_flag("--submodels", fit_args.submodels,
                      "compare TLS-only / spin-bath-only / full models");
    fit_cmd->add_option("--format", fit_args.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    fit_cmd->add_option("--out", fit_args.out_path,
                        "result file (default: <dataset>.fit.json)");
    fit_cmd->add_option("--max-iter", fit_args.max_iterations,
                        "iteration cap for the solver");

    // report
    echo::cli::ReportArgs report_args;
    auto* report_cmd =
        app.add_subcommand("report", "capability report from a configuration");
    report_cmd
        ->add_option("--config", report_args.config_path, "report configuration")
        ->required();
    report_cmd->add_option("--format", report_args.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    report_cmd->add_option("--out", report_args.out_path,
                           "also write the JSON report here");

    // plot
    echo::cli::PlotArgs plot_args;
    bool flag_log_x = false, flag_log_y = false, flag_lin_x = false;
    auto* plot_cmd = app.add_subcommand("plot", "render datasets as SVG");
    plot_cmd->add_option("datasets", plot_args.dataset_paths, "dataset files")
        ->required();
    plot_cmd->add_option("--fit", plot_args.fit_path,
                         "overlay a fit result (JSON)");
    plot_cmd->add_flag("--log-x", flag_log_x, "logarithmic abscissa");
    plot_cmd->add_flag("--lin-x", flag_lin_x, "force a linear abscissa");
    plot_cmd->add_flag("--log-y", flag_log_y, "logarithmic ordinate");
    plot_cmd->add_option("--out-dir", plot_args.out_dir,
                         "output directory (default: $ECHOTOOL_OUT_DIR or .)");
    plot_cmd->add_option("--out", plot_args.combined_out,
                         "combine all datasets into this single figure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return echo::cli::kExitValidation;
    }

    try {
        if (sim_cmd->parsed()) {
            if (!seed_text.empty()) {
                sim_args.seed_override = static_cast<std::uint64_t>(
                    std::strtoull(seed_text.c_str(), nullptr, 10));
            }
            return echo::cli::cmd_simulate(sim_args, std::cout, std::cerr);
        }
        if (fit_cmd->parsed()) {
            if (fit_args.model_id.empty() && !fit_args.submodels) {
                std::cerr << "error: --model is required (one of " << model_list
                          << ")\n";
                return echo::cli::kExitValidation;
            }
            if (fit_args.model_id.empty()) fit_args.model_id = "spectral_diffusion";
            if (!t0_text.empty()) fit_args.t0_s = echo::units::parse_si(t0_text);
            return echo::cli::cmd_fit(fit_args, std::cout, std::cerr);
        }
        if (report_cmd->parsed()) {
            return echo::cli::cmd_report(report_args, std::cout, std::cerr);
        }
        if (plot_cmd->parsed()) {
            if (flag_log_x) plot_args.log_x = true;
            if (flag_lin_x) plot_args.log_x = false;
            if (flag_log_y) plot_args.log_y = true;
            return echo::cli::cmd_plot(plot_args, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return echo::cli::kExitValidation;
    }
    return echo::cli::kExitValidation;
}
