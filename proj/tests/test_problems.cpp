#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "sdde/problems.hpp"

using namespace sdde;

TEST_SUITE("problems") {

TEST_CASE("k1 values")
{
    CHECK(k1(0.875, 1.0, 3, 3.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(k1(1.875, 1.0, 3, 3.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(k1(0.0, 1.0, 3, 3.0) == 1.0);
    CHECK_THROWS_AS(k1(0.5, 1.0, 3, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(k1(4.5, 1.0, 3, 3.0), std::out_of_range);
}

TEST_CASE("k1 stays finite at interval ends")
{
    for (int j = 0; j <= 4; ++j) {
        const double v = k1(static_cast<double>(j), 1.0, 3, 3.0);
        CHECK(std::isfinite(v));
    }
    // Right end of the horizon falls in the last interval and hits the clamp.
    CHECK(k1(4.0, 1.0, 3, 3.0) == doctest::Approx(std::pow(1e-12, -1.0 / 3.0)));
    // Interval starts restart the factor at 1.
    CHECK(k1(1.0, 1.0, 3, 3.0) == 1.0);
}

TEST_CASE("k1 repeats across lag intervals")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = u(rng);
        CHECK(k1(t + 1.0, 1.0, 3, 5.0) == doctest::Approx(k1(t, 1.0, 3, 5.0)).epsilon(1e-9));
    }
}

TEST_CASE("k2 steps")
{
    CHECK(k2(0.5, 1.0, 3) == doctest::Approx(0.1));
    CHECK(k2(1.5, 1.0, 3) == doctest::Approx(0.2));
    CHECK(k2(3.5, 1.0, 3) == doctest::Approx(0.4));
    CHECK(k2(4.0, 1.0, 3) == doctest::Approx(0.4));
    for (int j = 1; j <= 3; ++j)
        CHECK(k2(j, 1.0, 3) - k2(j - 1e-9, 1.0, 3) == doctest::Approx(0.1));
}

TEST_CASE("power time factor")
{
    CHECK(k_pow(0.25, 0.5) == 0.5);
    CHECK(k_pow(0.0, 0.3) == 0.0);
    CHECK(k_pow(0.7, 1.0) == 0.7);
}

TEST_CASE("drift body")
{
    CHECK(f1(k1(0.3, 1.0, 3, 3.0), 0.0, 0.0, 0.5) == 0.0);
    CHECK(f1(k1(0.875, 1.0, 3, 3.0), 0.0, 1.0, 1.0) == doctest::Approx(0.02).epsilon(1e-14));
    // 0.1 * (1 + sin(10)), sin(10) = -0.5440211108893698 (tabulated)
    CHECK(f1(k2(0.5, 1.0, 3), 1.0, 0.0, 0.7) ==
          doctest::Approx(0.1 * (1.0 - 0.5440211108893698)).epsilon(1e-14));
}

TEST_CASE("additive diffusion")
{
    CHECK(g1(0.0) == 0.5);
    CHECK(g1(1.0 / 64.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(g1(1.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("multiplicative diffusion")
{
    CHECK(g2(0.0, 3.0, -2.0, 0.5, 0.5) == 0.0);
    CHECK(g2(1.0, 0.0, 0.0, 1.0, 0.3) == 1.0);
    CHECK(g2(0.25, 0.0, 0.0, 0.5, 1.0) == 0.5);
}

TEST_CASE("registry coefficients are finite and additive noise ignores the state")
{
    for (auto family : {ProblemFamily::additive_k1, ProblemFamily::additive_k2,
                        ProblemFamily::multiplicative_k1, ProblemFamily::multiplicative_k2}) {
        ProblemSpec spec;
        spec.family = family;
        spec.alpha1 = 0.1;
        spec.alpha2 = (family == ProblemFamily::additive_k1 || family == ProblemFamily::additive_k2)
                          ? 1.0
                          : 0.1;
        spec.gamma1 = 2.5;
        spec.gamma2 = 0.1;
        const auto p = make_problem(spec);
        std::mt19937_64 rng(static_cast<unsigned>(family));
        std::uniform_real_distribution<double> ut(0.0, 4.0), ux(-1e6, 1e6);
        for (int i = 0; i < 2000; ++i) {
            const double t = (i % 50 == 0) ? std::floor(ut(rng)) : ut(rng);
            const double x = ux(rng), z = ux(rng);
            double f = 0.0, g = 0.0;
            p.drift(t, std::span(&x, 1), std::span(&z, 1), std::span(&f, 1));
            p.diffusion(t, std::span(&x, 1), std::span(&z, 1), std::span(&g, 1));
            CHECK(std::isfinite(f));
            CHECK(std::isfinite(g));
            if (family == ProblemFamily::additive_k1) {
                const double x2 = x + 1.0, z2 = -z;
                double g_other = 0.0;
                p.diffusion(t, std::span(&x2, 1), std::span(&z2, 1), std::span(&g_other, 1));
                CHECK(g_other == g);
            }
        }
    }
}

TEST_CASE("make_problem records regularity metadata")
{
    ProblemSpec a;
    a.family = ProblemFamily::additive_k1;
    a.gamma1 = 3.0;
    a.alpha1 = 0.5;
    const auto pa = make_problem(a);
    CHECK(pa.rho == 1.0);
    CHECK(pa.alpha2 == 1.0);
    for (int j = 0; j < 4; ++j)
        CHECK(pa.predicted_exponent(j) == doctest::Approx(0.5 * std::pow(0.5, j)));

    ProblemSpec m;
    m.family = ProblemFamily::multiplicative_k2;
    m.gamma2 = 0.5;
    m.alpha1 = 1.0;
    m.alpha2 = 1.0;
    const auto pm = make_problem(m);
    CHECK(pm.rho == 0.5);
    CHECK(pm.predicted_exponent(0) == doctest::Approx(0.5));
    CHECK(pm.predicted_exponent(3) == doctest::Approx(0.5));
}

TEST_CASE("custom problems pass through")
{
    SddeProblem mine;
    mine.name = "mine";
    mine.x0 = {2.0};
    mine.drift = [](double, std::span<const double>, std::span<const double>, std::span<double> o) {
        o[0] = 7.0;
    };
    mine.diffusion = [](double, std::span<const double>, std::span<const double>,
                        std::span<double> o) { o[0] = 0.0; };
    mine.alpha1 = 0.3;
    ProblemSpec spec;
    spec.family = ProblemFamily::custom;
    spec.custom = mine;
    const auto p = make_problem(spec);
    CHECK(p.name == "mine");
    CHECK(p.x0 == std::vector<double>{2.0});
    CHECK(p.alpha1 == 0.3);
    double out = 0.0, x = 0.0;
    p.drift(0.0, std::span(&x, 1), std::span(&x, 1), std::span(&out, 1));
    CHECK(out == 7.0);
}

TEST_CASE("inconsistent specs are rejected")
{
    ProblemSpec s;
    s.family = ProblemFamily::additive_k1;
    s.gamma1 = 2.0;
    CHECK_THROWS_AS(make_problem(s), std::invalid_argument);

    s = {};
    s.family = ProblemFamily::multiplicative_k2;
    s.gamma2 = 1.5;
    CHECK_THROWS_AS(make_problem(s), std::invalid_argument);
    s.gamma2 = 0.0;
    CHECK_THROWS_AS(make_problem(s), std::invalid_argument);

    s = {};
    s.family = ProblemFamily::additive_k2;
    s.alpha2 = 0.5;
    CHECK_THROWS_AS(make_problem(s), std::invalid_argument);

    s = {};
    s.family = ProblemFamily::custom;
    CHECK_THROWS_AS(make_problem(s), std::invalid_argument);

    s = {};
    s.alpha1 = 0.0;
    CHECK_THROWS_AS(make_problem(s), std::invalid_argument);

    CHECK_THROWS_AS(parse_family("quadratic"), std::invalid_argument);
    CHECK(parse_family("multiplicative_k1") == ProblemFamily::multiplicative_k1);
}

}
