#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "echo/quadrature.hpp"

using namespace echo;

TEST_CASE("node symmetry and weight sum") {
    for (int n : {8, 33, 128}) {
        const auto& rule = quad::gauss_legendre(n);
        double wsum = 0.0;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            wsum += rule.weights[i];
            CHECK(rule.nodes[i] ==
                  doctest::Approx(-rule.nodes[n - 1 - i]).epsilon(1e-14));
        }
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("polynomials integrate exactly") {
    // order-n rule is exact through degree 2n-1
    auto f = [](double x) { return 5 * x * x * x * x - x * x + 3; };
    const double exact = 2.0 * (5.0 / 5.0 - 1.0 / 3.0 + 3.0);
    CHECK(quad::integrate(f, -1, 1, 3) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("sin^4 and cos^4 normalization equals 3 pi / 16") {
    const double expected = 3.0 * std::numbers::pi / 16.0;
    auto s4 = [](double t) { return std::pow(std::sin(t), 4); };
    auto c4 = [](double t) { return std::pow(std::cos(t), 4); };
    CHECK(quad::integrate(s4, 0, std::numbers::pi / 2, 32) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(quad::integrate(c4, 0, std::numbers::pi / 2, 32) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("adaptive escalation handles oscillatory integrands") {
    // Int_0^{pi/2} cos(z cos th) sin th dth = sin(z)/z
    for (double z : {5.0, 50.0, 400.0}) {
        auto f = [z](double t) { return std::cos(z * std::cos(t)) * std::sin(t); };
        const auto res =
            quad::integrate_adaptive(f, 0, std::numbers::pi / 2, 1e-12);
        CHECK(res.converged);
        CHECK(res.value == doctest::Approx(std::sin(z) / z).epsilon(1e-9));
    }
}
