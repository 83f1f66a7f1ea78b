// quadrature.hpp - Gauss-Legendre rules with order escalation
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace echo::quad {

struct Rule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]. Rules are cached; thread-safe.
const Rule& gauss_legendre(int n);

/// Fixed-order integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 int order);

/// Escalate order (doubling) until successive estimates differ by less than
/// abs_tol or max_order is reached. Smooth integrands only.
struct AdaptiveResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int order = 0;
    bool converged = false;
};
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b, double abs_tol,
                                  int start_order = 32, int max_order = 8192);

}  // namespace echo::quad
