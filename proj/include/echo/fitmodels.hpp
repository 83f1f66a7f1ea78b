// fitmodels.hpp - named model registry and fit operations
//
// Every closed-form model is registered under a stable id with parameter
// names, bounds, analytic gradients and an initialization heuristic, so any
// SweepCurve can be fitted by id from the CLI or programmatically.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "echo/analytic.hpp"
#include "echo/levmar.hpp"
#include "echo/types.hpp"
#include "echo/units.hpp"

namespace echo::fit {

struct ParamDef {
    std::string name;
    double lower;
    double upper;
};

struct ModelSpec {
    std::string model_id;
    std::vector<ParamDef> params;
    // expected abscissa dimension; Dimensionless accepts any axis
    units::Dimension abscissa_dim = units::Dimension::Dimensionless;
    std::function<double(double, std::span<const double>)> eval;
    std::function<void(double, std::span<const double>, std::span<double>)>
        gradient;
    std::function<std::vector<double>(const std::vector<double>&,
                                      const std::vector<double>&)>
        init;
    std::map<std::string, std::string> metadata;

    /// Model curve for a fitted result (same parameter order).
    double operator()(double x, const std::vector<double>& p) const {
        return eval(x, std::span<const double>(p));
    }
};

// --- model factories -------------------------------------------------------

/// I0 * exp(-((4 tau)/T2)^x); x frozen at 1 unless freed.
ModelSpec echo_decay_model(bool free_x = false);
/// gamma0 + (gamma_sd/2)(1 - e^{-R Tw}) + gamma_tls ln(Tw/t0)
ModelSpec spectral_diffusion_model(double t0_s);
ModelSpec sd_tls_only_model(double t0_s);
ModelSpec sd_bath_only_model();
ModelSpec recovery_2exp_model();
ModelSpec lorentzian_model();
ModelSpec linear_broadening_model();
ModelSpec stark_model(model::KernelForm form);

// --- registry --------------------------------------------------------------

/// The exact set of addressable ids.
const std::vector<std::string>& registry_ids();
bool registry_has(const std::string& id);

struct ModelOptions {
    double t0_s = 0.0;    // spectral-diffusion t0; 0 = smallest abscissa
    bool free_x = false;  // free the echo-decay stretch exponent
};

/// Build a registry model by id, resolving data-dependent defaults against
/// the curve (t0 for the spectral-diffusion family). Throws ValidationError
/// for unknown ids.
ModelSpec make_model(const std::string& id, const SweepCurve& curve,
                     const ModelOptions& options = {});

// --- fitting ---------------------------------------------------------------

/// Nonlinear least squares against a registry model. The curve is converted
/// to SI; sigma entries weight the residuals when present. `overrides`
/// replaces selected initial values (SI). Throws std::invalid_argument for
/// NaNs in the data (naming the index) and ValidationError when the curve is
/// too short for the parameter count.
FitResult fit(const SweepCurve& curve, const ModelSpec& model,
              const std::map<std::string, double>& overrides = {},
              const LmOptions& options = {});

FitResult fit_echo_decay(const SweepCurve& curve, bool free_x = false);
FitResult fit_spectral_diffusion(const SweepCurve& curve, double t0_s);
FitResult fit_recovery(const SweepCurve& curve);
FitResult fit_lorentzian_peak(const SweepCurve& curve);
FitResult fit_linear_broadening(const SweepCurve& curve);
FitResult fit_stark_modulation(const SweepCurve& curve, model::KernelForm form);

struct SubmodelComparison {
    FitResult full;
    FitResult bath_only;
    FitResult tls_only;
    /// (model_id, residual_norm) ascending by residual norm
    std::vector<std::pair<std::string, double>> ranking;
};

/// Fits the TLS-only, spin-bath-only and full spectral diffusion models and
/// orders them by residual norm.
SubmodelComparison fit_submodels(const SweepCurve& curve, double t0_s);

}  // namespace echo::fit
