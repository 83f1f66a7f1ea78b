#include "echo/levmar.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace echo::fit {

namespace {

double cost_of(const std::vector<double>& r) {
    double c = 0.0;
    for (double v : r) c += v * v;
    return 0.5 * c;
}

bool finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void clip_to_bounds(std::vector<double>& p, const std::vector<double>& lo,
                    const std::vector<double>& hi) {
    for (size_t i = 0; i < p.size(); ++i)
        p[i] = std::clamp(p[i], lo[i], hi[i]);
}

}  // namespace

LmSolution levenberg_marquardt(const LmProblem& problem,
                               std::vector<double> p0,
                               const LmOptions& options) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;

    const int n = problem.n_residuals;
    const int k = problem.n_params;
    LmSolution sol;
    sol.params = p0;

    clip_to_bounds(sol.params, problem.lower, problem.upper);

    std::vector<double> r(n), jac(static_cast<size_t>(n) * k);
    problem.residuals(sol.params, r);
    if (!finite(r)) {
        sol.message = "non-finite residuals at the initial point";
        return sol;
    }
    double cost = cost_of(r);
    // scale-covariant floor for exact (zero-residual) data
    const double zero_cost_floor = 1e-28 * (cost + 1e-300);

    double lambda = options.lambda_init;
    double nu = 2.0;  // Nielsen escalation factor
    MatrixXd J(n, k);
    VectorXd rv(n);

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        sol.iterations = iter;
        problem.jacobian(sol.params, jac);
        if (!finite(jac)) {
            sol.message = "non-finite jacobian";
            break;
        }
        for (int i = 0; i < n; ++i) {
            rv(i) = r[i];
            for (int j = 0; j < k; ++j) J(i, j) = jac[static_cast<size_t>(i) * k + j];
        }
        MatrixXd H = J.transpose() * J;
        VectorXd g = J.transpose() * rv;

        // freeze parameters pinned at a bound with the gradient pushing out
        std::vector<bool> frozen(k, false);
        bool any_free = false;
        for (int j = 0; j < k; ++j) {
            const double p = sol.params[j];
            if ((p <= problem.lower[j] && g(j) > 0) ||
                (p >= problem.upper[j] && g(j) < 0)) {
                frozen[j] = true;
            } else {
                any_free = true;
            }
        }
        if (!any_free) {
            sol.converged = true;
            sol.message = "all parameters at active bounds";
            break;
        }
        double max_diag = 0.0;
        for (int j = 0; j < k; ++j) max_diag = std::max(max_diag, H(j, j));
        if (!(max_diag > 0.0)) {
            sol.message = "singular jacobian: J^T J has an empty diagonal";
            break;
        }

        bool accepted = false;
        while (lambda <= options.lambda_max) {
            MatrixXd A = H;
            VectorXd damping(k);
            for (int j = 0; j < k; ++j) {
                double d = H(j, j);
                if (!(d > 0.0)) d = 1e-12 * max_diag;  // inert column, keep solvable
                damping(j) = lambda * d;
                A(j, j) = d + damping(j);
                if (frozen[j]) {
                    // zero the row/column so the frozen parameter does not move
                    for (int m = 0; m < k; ++m) {
                        if (m != j) {
                            A(j, m) = 0.0;
                            A(m, j) = 0.0;
                        }
                    }
                }
            }
            VectorXd rhs = -g;
            for (int j = 0; j < k; ++j)
                if (frozen[j]) rhs(j) = 0.0;
            VectorXd step = A.ldlt().solve(rhs);
            if (!step.allFinite()) {
                sol.message = "singular jacobian: damped normal equations failed";
                lambda *= nu;
                nu *= 2.0;
                continue;
            }

            std::vector<double> trial(sol.params);
            for (int j = 0; j < k; ++j) trial[j] += step(j);
            clip_to_bounds(trial, problem.lower, problem.upper);

            std::vector<double> r_try(n);
            problem.residuals(trial, r_try);
            const double cost_try = finite(r_try)
                                        ? cost_of(r_try)
                                        : std::numeric_limits<double>::infinity();
            if (cost_try < cost) {
                // Nielsen gain-ratio damping update
                double predicted = 0.0;
                for (int j = 0; j < k; ++j) {
                    const double d = trial[j] - sol.params[j];
                    predicted += 0.5 * d * (damping(j) * d - g(j));
                }
                const double rho =
                    predicted > 0 ? (cost - cost_try) / predicted : 1.0;
                const double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3);
                lambda *= std::max(1.0 / 3.0, std::min(shrink, 1.0));
                lambda = std::max(lambda, 1e-14);
                nu = 2.0;

                double rel_step = 0.0;
                for (int j = 0; j < k; ++j) {
                    const double denom = std::abs(sol.params[j]) + 1e-300;
                    rel_step = std::max(
                        rel_step, std::abs(trial[j] - sol.params[j]) / denom);
                }
                const double rel_cost = (cost - cost_try) / std::max(cost, 1e-300);
                sol.params = trial;
                r = r_try;
                cost = cost_try;
                accepted = true;
                if ((rel_step < options.rel_step_tol &&
                     rel_cost < options.rel_cost_tol) ||
                    cost <= zero_cost_floor) {
                    sol.converged = true;
                }
                break;
            }
            lambda *= nu;
            nu *= 2.0;
        }
        if (!accepted) {
            // stationary point: no step helps and the gradient has vanished
            double rel_grad = 0.0;
            for (int j = 0; j < k; ++j) {
                if (frozen[j]) continue;
                rel_grad = std::max(rel_grad,
                                    std::abs(g(j)) *
                                        std::max(std::abs(sol.params[j]), 1.0) /
                                        std::max(cost, 1e-300));
            }
            if (rel_grad < 1e-6) {
                sol.converged = true;
                sol.message = "stationary (gradient below tolerance)";
            } else if (sol.message.empty()) {
                sol.message = "no acceptable step (damping exhausted)";
            }
            break;
        }
        if (sol.converged) break;
    }
    if (!sol.converged && sol.message.empty()) {
        // at the iteration cap a vanished gradient still counts as a solution
        // (flat-valley fits end here; the covariance reports the degeneracy)
        problem.jacobian(sol.params, jac);
        if (finite(jac)) {
            for (int i = 0; i < n; ++i) {
                rv(i) = r[i];
                for (int j = 0; j < k; ++j)
                    J(i, j) = jac[static_cast<size_t>(i) * k + j];
            }
            VectorXd g = J.transpose() * rv;
            double rel_grad = 0.0;
            for (int j = 0; j < k; ++j)
                rel_grad = std::max(rel_grad,
                                    std::abs(g(j)) *
                                        std::max(std::abs(sol.params[j]), 1.0) /
                                        std::max(cost, 1e-300));
            if (rel_grad < 1e-6) {
                sol.converged = true;
                sol.message = "stationary at iteration cap";
            }
        }
        if (sol.message.empty())
            sol.message = "iteration cap reached before convergence";
    }

    // covariance from the damped normal equations at the solution
    problem.jacobian(sol.params, jac);
    problem.residuals(sol.params, r);
    cost = cost_of(r);
    sol.cost = cost;
    sol.residual_norm = std::sqrt(2.0 * cost);
    sol.covariance.assign(static_cast<size_t>(k) * k, 0.0);
    if (finite(jac)) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j)
                J(i, j) = jac[static_cast<size_t>(i) * k + j];
        MatrixXd H = J.transpose() * J;
        double max_diag = 0.0;
        for (int j = 0; j < k; ++j) max_diag = std::max(max_diag, H(j, j));
        if (max_diag > 0.0) {
            // report with (at most) a vestigial damping so that flat
            // directions show up as large variances instead of being hidden
            const double lambda_cov = std::min(lambda, 1e-9);
            MatrixXd A = H;
            for (int j = 0; j < k; ++j) {
                double d = H(j, j);
                if (!(d > 0.0)) d = 1e-12 * max_diag;
                A(j, j) = d * (1.0 + lambda_cov);
            }
            const double dof = std::max(1, n - k);
            const double s2 = 2.0 * cost / dof;
            MatrixXd C = A.ldlt().solve(MatrixXd::Identity(k, k)) * s2;
            // symmetrize against round-off
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    sol.covariance[static_cast<size_t>(i) * k + j] =
                        0.5 * (C(i, j) + C(j, i));
        }
    }
    return sol;
}

}  // namespace echo::fit
