#include "echo/cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "echo/analytic.hpp"
#include "echo/errors.hpp"
#include "echo/fitmodels.hpp"
#include "echo/io/config.hpp"
#include "echo/io/dataset.hpp"
#include "echo/io/manifest.hpp"
#include "echo/io/svg.hpp"
#include "echo/metrics.hpp"
#include "echo/simulator.hpp"
#include "echo/units.hpp"
#include "echo/version.hpp"

namespace echo::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int map_exception(std::ostream& err) {
    try {
        throw;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const UnitError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

ordered_json fit_to_json(const FitResult& fr) {
    ordered_json j;
    j["model_id"] = fr.model_id;
    ordered_json params = ordered_json::object();
    ordered_json sigmas = ordered_json::object();
    for (std::size_t i = 0; i < fr.param_names.size(); ++i) {
        params[fr.param_names[i]] = fr.params[i];
        sigmas[fr.param_names[i]] = fr.sigma(fr.param_names[i]);
    }
    j["params"] = params;
    j["sigmas"] = sigmas;
    const std::size_t k = fr.n_params();
    ordered_json cov = ordered_json::array();
    for (std::size_t i = 0; i < k; ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t m = 0; m < k; ++m) row.push_back(fr.cov(i, m));
        cov.push_back(row);
    }
    j["covariance"] = cov;
    j["residual_norm"] = fr.residual_norm;
    j["n_points"] = fr.n_points;
    j["converged"] = fr.converged;
    j["message"] = fr.message;
    j["metadata"] = fr.metadata;
    return j;
}

FitResult fit_from_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open fit result '" + path.string() + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("bad fit result '" + path.string() + "': " + e.what());
    }
    FitResult fr;
    fr.model_id = j.at("model_id").get<std::string>();
    for (const auto& [name, value] : j.at("params").items()) {
        fr.param_names.push_back(name);
        fr.params.push_back(value.get<double>());
    }
    fr.converged = j.value("converged", false);
    if (j.contains("metadata")) {
        for (const auto& [key, value] : j.at("metadata").items())
            fr.metadata[key] = value.get<std::string>();
    }
    return fr;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string fit_summary(const FitResult& fr) {
    std::ostringstream os;
    os << "model " << fr.model_id << ": "
       << (fr.converged ? "converged" : "NOT CONVERGED");
    if (!fr.message.empty()) os << " (" << fr.message << ")";
    os << "\n";
    char buf[128];
    for (std::size_t i = 0; i < fr.param_names.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "  %-10s = %.6g +- %.3g",
                      fr.param_names[i].c_str(), fr.params[i],
                      fr.sigma(fr.param_names[i]));
        os << buf << "\n";
    }
    if (fr.model_id == "echo_decay") {
        const double t2 = fr.param("t2");
        std::snprintf(buf, sizeof(buf),
                      "  T2 = %.6g s +- %.3g s;  gamma_h = 1/(pi*T2) = %.6g Hz",
                      t2, fr.sigma("t2"),
                      t2 > 0 ? model::homogeneous_linewidth(t2) : 0.0);
        os << buf << "\n";
    }
    std::snprintf(buf, sizeof(buf), "  residual_norm = %.6g over %d points",
                  fr.residual_norm, fr.n_points);
    os << buf << "\n";
    return os.str();
}

// registry fits routed through the named operations so their extra logic
// (ordering, structured starts, preconditions) applies
FitResult run_registry_fit(const SweepCurve& curve, const std::string& id,
                           const fit::ModelOptions& options,
                           const fit::LmOptions& lm) {
    if (id == "recovery_2exp" && lm.max_iterations >= 400)
        return fit::fit_recovery(curve);
    if (id == "spectral_diffusion") {
        const double t0 =
            options.t0_s > 0
                ? options.t0_s
                : *std::min_element(curve.abscissa_si().begin(),
                                    curve.abscissa_si().end());
        return fit::fit_spectral_diffusion(curve, t0);
    }
    return fit::fit(curve, fit::make_model(id, curve, options), {}, lm);
}

}  // namespace

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("ECHOTOOL_OUT_DIR"); env && *env)
        return env;
    return ".";
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err) {
    try {
        const io::ConfigFile cfg = io::parse_config(args.config_path);
        io::RunConfig run = io::parse_run_config(cfg);
        if (args.seed_override) run.sim.seed = *args.seed_override;

        const std::string hash = io::config_hash(cfg.raw_text, run.sim.seed);
        const fs::path dir = resolve_out_dir(args.out_dir);
        fs::create_directories(dir);

        std::vector<std::string> comments = {
            std::string("generated by ") + kToolName + " " + kToolVersion,
            "manifest_hash: " + hash};
        io::Manifest manifest;
        manifest.config_hash = hash;
        manifest.seed = run.sim.seed;

        auto emit_curve = [&](const SweepCurve& curve, const std::string& name) {
            const fs::path path = dir / name;
            io::write_curve(path, curve, comments);
            manifest.outputs.push_back(name);
            out << "wrote " << path.string() << " (" << curve.size()
                << " points)\n";
        };

        const auto& exp = run.experiment;
        switch (exp.type) {
            case io::ExperimentType::TwoPulseDecay: {
                emit_curve(sim::two_pulse_decay(run.ensemble, run.sim,
                                                exp.tau_grid),
                           run.output_prefix + ".csv");
                break;
            }
            case io::ExperimentType::ThreePulseSweep: {
                const auto points = sim::three_pulse_sweep(
                    run.ensemble, run.sim, exp.tau_grid, exp.t_wait_list);
                for (std::size_t i = 0; i < points.size(); ++i) {
                    std::ostringstream name;
                    name << run.output_prefix << "_tw" << i << ".csv";
                    emit_curve(points[i].curve, name.str());
                }
                emit_curve(sim::gamma_eff_curve(points),
                           run.output_prefix + "_gamma.csv");
                break;
            }
            case io::ExperimentType::SaturationRecovery: {
                emit_curve(sim::saturation_recovery(run.ensemble, run.sim,
                                                    exp.t_wait_list,
                                                    exp.recovery),
                           run.output_prefix + ".csv");
                break;
            }
            case io::ExperimentType::StarkGatedEcho: {
                emit_curve(sim::stark_gated_echo(run.ensemble, run.sim,
                                                 exp.pulse_lengths,
                                                 exp.field_v_per_m),
                           run.output_prefix + ".csv");
                break;
            }
            case io::ExperimentType::Trace: {
                const double dur = 32e-9;
                const double t0 = 2.0 * dur;
                PulseSequence seq =
                    PulseSequence::two_pulse_echo(exp.trace_tau_s, dur, t0, 0.0);
                seq.events.pop_back();  // replace the point window
                if (exp.trace_detect_halfwidth_s > 0) {
                    const double echo = t0 + 2.0 * exp.trace_tau_s;
                    seq.events.push_back(
                        Detect{echo - exp.trace_detect_halfwidth_s,
                               2.0 * exp.trace_detect_halfwidth_s});
                } else {
                    // default: from just after the pi pulse to past the
                    // secondary-echo position at 3 tau
                    const double start = t0 + exp.trace_tau_s + 2.0 * dur;
                    const double stop = t0 + 3.5 * exp.trace_tau_s;
                    seq.events.push_back(Detect{start, stop - start});
                }
                const auto trace = sim::simulate(run.ensemble, seq, run.sim);
                const std::string name = run.output_prefix + ".csv";
                io::write_trace(dir / name, trace, comments);
                manifest.outputs.push_back(name);
                out << "wrote " << (dir / name).string() << " ("
                    << trace.times.size() << " bins)\n";
                break;
            }
        }
        const fs::path mpath = dir / (run.output_prefix + ".manifest.json");
        io::write_manifest(mpath, manifest);
        out << "wrote " << mpath.string() << "\n";
        return kExitOk;
    } catch (...) {
        return map_exception(err);
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (!fit::registry_has(args.model_id))
            throw ValidationError("unknown model id '" + args.model_id + "'");
        const SweepCurve curve = io::read_curve(args.dataset_path);

        fit::ModelOptions options;
        if (args.t0_s) options.t0_s = *args.t0_s;
        options.free_x = args.free_x;
        fit::LmOptions lm;
        lm.max_iterations = args.max_iterations;

        const fs::path out_path = args.out_path.empty()
                                      ? fs::path(args.dataset_path + ".fit.json")
                                      : fs::path(args.out_path);

        if (args.submodels) {
            const double t0 =
                args.t0_s ? *args.t0_s
                          : *std::min_element(curve.abscissa_si().begin(),
                                              curve.abscissa_si().end());
            const auto cmp = fit::fit_submodels(curve, t0);
            ordered_json j;
            j["comparison"] = ordered_json::array();
            for (const auto& [id, norm] : cmp.ranking) {
                ordered_json row;
                row["model_id"] = id;
                row["residual_norm"] = norm;
                j["comparison"].push_back(row);
            }
            j["full"] = fit_to_json(cmp.full);
            j["bath_only"] = fit_to_json(cmp.bath_only);
            j["tls_only"] = fit_to_json(cmp.tls_only);
            write_text_file(out_path, j.dump(2) + "\n");

            if (args.format == "json") {
                out << j.dump(2) << "\n";
            } else {
                out << "spectral-diffusion model comparison (residual norm "
                       "ascending)\n";
                int rank = 1;
                for (const auto& [id, norm] : cmp.ranking) {
                    char buf[96];
                    std::snprintf(buf, sizeof(buf), "  %d. %-20s %.6g", rank++,
                                  id.c_str(), norm);
                    out << buf << "\n";
                }
                out << "\n" << fit_summary(cmp.full);
            }
            out << "wrote " << out_path.string() << "\n";
            const bool ok = cmp.full.converged && cmp.bath_only.converged &&
                            cmp.tls_only.converged;
            return ok ? kExitOk : kExitFitNotConverged;
        }

        const FitResult fr =
            run_registry_fit(curve, args.model_id, options, lm);
        write_text_file(out_path, fit_to_json(fr).dump(2) + "\n");
        if (args.format == "json") {
            out << fit_to_json(fr).dump(2) << "\n";
        } else {
            out << fit_summary(fr);
        }
        out << "wrote " << out_path.string() << "\n";
        return fr.converged ? kExitOk : kExitFitNotConverged;
    } catch (...) {
        return map_exception(err);
    }
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const io::ConfigFile cfg = io::parse_config(args.config_path);
        const io::ReportConfig rc = io::parse_report_config(cfg);
        const auto rep = metrics::capability_report(
            rc.ensemble, rc.od, rc.purcell_factor, rc.geometry,
            rc.target_geometry, rc.spin_t2_projection_s);

        ordered_json j;
        j["storage_time_s"] = rep.metrics.storage_time_s;
        j["bandwidth_ensemble_hz"] = rep.metrics.bandwidth_ensemble_hz;
        j["inverse_t1_hz"] = rep.metrics.inverse_t1_hz;
        j["purcell_factor"] = rep.metrics.purcell_factor;
        j["single_ion_bandwidth_hz"] = rep.metrics.single_ion_bandwidth_hz;
        j["od"] = rep.metrics.od;
        j["efficiency_paper"] = rep.metrics.efficiency_paper;
        j["efficiency_exact"] = rep.metrics.efficiency_exact;
        if (rep.spin_t2_projection_s)
            j["spin_t2_projection_s"] = *rep.spin_t2_projection_s;
        if (rep.semm) {
            j["semm"] = {{"field_v_per_m", rep.semm->field_v_per_m},
                         {"extinction_time_s", rep.semm->extinction_time_s},
                         {"recalls_within_t2", rep.semm->recalls_within_t2},
                         {"target", rep.semm->target}};
        }
        if (rep.scaled_od) j["scaled_od"] = *rep.scaled_od;
        if (!rep.flags.empty()) j["note"] = rep.flags;

        if (args.format == "json") {
            out << j.dump(2) << "\n";
        } else {
            out << metrics::to_text(rep);
        }
        if (!args.out_path.empty()) {
            write_text_file(args.out_path, j.dump(2) + "\n");
            out << "wrote " << args.out_path << "\n";
        }
        return kExitOk;
    } catch (...) {
        return map_exception(err);
    }
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

namespace {

io::PlotSeries make_series(const SweepCurve& curve, const FitResult* fit_result,
                           bool log_x) {
    io::PlotSeries series;
    series.data = curve;
    series.name = curve.label;
    if (fit_result && curve.size() >= 2) {
        fit::ModelOptions options;
        if (auto it = fit_result->metadata.find("t0_s");
            it != fit_result->metadata.end())
            options.t0_s = std::strtod(it->second.c_str(), nullptr);
        for (const auto& n : fit_result->param_names)
            if (n == "x") options.free_x = true;
        const fit::ModelSpec model =
            fit::make_model(fit_result->model_id, curve, options);

        const auto x_si = curve.abscissa_si();
        const double lo = *std::min_element(x_si.begin(), x_si.end());
        const double hi = *std::max_element(x_si.begin(), x_si.end());
        const double back =
            units::convert(1.0, units::si_unit(
                                    units::find_unit(curve.abscissa_unit)->dim),
                           curve.abscissa_unit);
        const int n = 200;
        for (int i = 0; i < n; ++i) {
            double x;
            if (log_x && lo > 0) {
                x = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
            } else {
                x = lo + (hi - lo) * i / (n - 1);
            }
            series.overlay_x.push_back(x * back);
            series.overlay_y.push_back(model(x, fit_result->params));
        }
    }
    return series;
}

bool auto_log_axis(const SweepCurve& curve) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : curve.abscissa) {
        if (!(v > 0)) return false;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi / lo >= 50.0;
}

// provenance comment ("# manifest_hash: ...") from a dataset header, if any
std::string dataset_provenance(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] != '#') break;
        const std::string key = "# manifest_hash:";
        if (line.rfind(key, 0) == 0)
            return "manifest_hash:" + line.substr(key.size());
    }
    return {};
}

}  // namespace

int cmd_plot(const PlotArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (args.dataset_paths.empty())
            throw ValidationError("plot: no datasets given");
        std::optional<FitResult> overlay;
        if (!args.fit_path.empty()) overlay = fit_from_json(args.fit_path);

        const fs::path dir = resolve_out_dir(args.out_dir);
        fs::create_directories(dir);

        if (!args.combined_out.empty()) {
            std::vector<io::PlotSeries> series;
            bool log_x = args.log_x.value_or(false);
            for (const auto& p : args.dataset_paths) {
                const SweepCurve curve = io::read_curve(p);
                if (!args.log_x) log_x = log_x || auto_log_axis(curve);
                series.push_back(make_series(
                    curve, overlay ? &*overlay : nullptr, log_x));
            }
            io::PlotOptions options;
            options.log_x = log_x;
            options.log_y = args.log_y.value_or(false);
            options.title = "echotool datasets";
            options.provenance = dataset_provenance(args.dataset_paths[0]);
            io::write_svg(dir / args.combined_out, series, options);
            out << "wrote " << (dir / args.combined_out).string() << "\n";
            return kExitOk;
        }

        for (const auto& p : args.dataset_paths) {
            const SweepCurve curve = io::read_curve(p);
            const bool log_x = args.log_x.value_or(auto_log_axis(curve));
            io::PlotOptions options;
            options.log_x = log_x;
            options.log_y = args.log_y.value_or(false);
            options.title = curve.label;
            options.provenance = dataset_provenance(p);
            const io::PlotSeries series =
                make_series(curve, overlay ? &*overlay : nullptr, log_x);
            const fs::path out_path =
                dir / (fs::path(p).filename().string() + ".svg");
            io::write_svg(out_path, {series}, options);
            out << "wrote " << out_path.string() << "\n";
        }
        return kExitOk;
    } catch (...) {
        return map_exception(err);
    }
}

}  // namespace echo::cli
