// levmar.hpp - damped least-squares solver for small dense problems
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace echo::fit {

struct LmOptions {
    int max_iterations = 400;
    // converged when, on an accepted step, both fall below their tolerance
    double rel_step_tol = 1e-8;
    double rel_cost_tol = 1e-8;
    double lambda_init = 1e-3;
    double lambda_up = 5.0;
    double lambda_down = 0.2;
    double lambda_max = 1e12;
    int restarts = 4;   // extra perturbed starts used by fit() when needed
};

struct LmProblem {
    // residual vector r(p), size n
    std::function<void(std::span<const double>, std::vector<double>&)> residuals;
    // jacobian d r_i / d p_k, row-major n x k
    std::function<void(std::span<const double>, std::vector<double>&)> jacobian;
    int n_residuals = 0;
    int n_params = 0;
    std::vector<double> lower;   // box bounds, size k
    std::vector<double> upper;
};

struct LmSolution {
    std::vector<double> params;
    std::vector<double> covariance;   // k x k row-major; see below
    double cost = 0.0;                // 1/2 sum r^2
    double residual_norm = 0.0;       // sqrt(sum r^2)
    int iterations = 0;
    bool converged = false;
    std::string message;
};

/// Levenberg-Marquardt with multiplicative damping on diag(J^T J) and box
/// bounds by projection (parameters pinned at a bound with an outward
/// gradient are frozen for the step). The covariance is
/// s^2 (J^T J + lambda diag)^-1 evaluated at the solution, with
/// s^2 = sum r^2 / (n - k).
LmSolution levenberg_marquardt(const LmProblem& problem,
                               std::vector<double> p0,
                               const LmOptions& options = {});

}  // namespace echo::fit
