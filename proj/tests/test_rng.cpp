#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "echo/rng.hpp"

using echo::CounterRng;

TEST_CASE("streams are deterministic and order-independent") {
    CounterRng a(42, 7);
    CounterRng b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // draw i of a stream does not depend on other streams being consumed
    CounterRng c(42, 8);
    (void)c.next_u64();
    CounterRng a2(42, 7);
    CounterRng b2(42, 7);
    (void)b2.next_u64();
    (void)a2.next_u64();
    CHECK(a2.next_u64() == b2.next_u64());
}

TEST_CASE("different seeds and streams decorrelate") {
    CounterRng a(1, 0), b(2, 0), c(1, 1);
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        if (x == b.next_u64()) ++same_ab;
        if (x == c.next_u64()) ++same_ac;
    }
    CHECK(same_ab == 0);
    CHECK(same_ac == 0);
}

TEST_CASE("uniform moments") {
    CounterRng rng(3);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform();
        CHECK(x > 0.0);
        CHECK(x < 1.0);
        sum += x;
        sum2 += x * x;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("normal moments") {
    CounterRng rng(11);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
        sum4 += x * x * x * x;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(1.0).scale(0.01));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("exponential mean") {
    CounterRng rng(5);
    const double rate = 300.0;
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.exponential(rate);
    CHECK(sum / n == doctest::Approx(1.0 / rate).epsilon(0.02));
}

TEST_CASE("cauchy median matches scale") {
    CounterRng rng(17);
    const double scale = 2.5;
    const int n = 100001;
    std::vector<double> mags(n);
    for (int i = 0; i < n; ++i) mags[i] = std::abs(rng.cauchy(scale));
    std::nth_element(mags.begin(), mags.begin() + n / 2, mags.end());
    // median of |Cauchy(scale)| equals the scale
    CHECK(mags[n / 2] == doctest::Approx(scale).epsilon(0.03));
}

TEST_CASE("fork gives independent child streams") {
    CounterRng parent(99);
    CounterRng c1 = parent.fork(1);
    CounterRng c2 = parent.fork(2);
    CounterRng c1b = parent.fork(1);
    CHECK(c1.next_u64() == c1b.next_u64());
    CHECK(c1.next_u64() != c2.next_u64());
}
