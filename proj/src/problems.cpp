#include "sdde/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sdde {

namespace {

struct FamilyName {
    ProblemFamily family;
    std::string_view name;
};

constexpr FamilyName kFamilies[] = {
    {ProblemFamily::additive_k1, "additive_k1"},
    {ProblemFamily::additive_k2, "additive_k2"},
    {ProblemFamily::multiplicative_k1, "multiplicative_k1"},
    {ProblemFamily::multiplicative_k2, "multiplicative_k2"},
    {ProblemFamily::custom, "custom"},
    {ProblemFamily::delay_linear, "delay_linear"},
    {ProblemFamily::gbm, "gbm"},
    {ProblemFamily::brownian, "brownian"},
};

bool uses_k1(ProblemFamily f)
{
    return f == ProblemFamily::additive_k1 || f == ProblemFamily::multiplicative_k1;
}

bool is_additive(ProblemFamily f)
{
    return f == ProblemFamily::additive_k1 || f == ProblemFamily::additive_k2;
}

bool is_multiplicative(ProblemFamily f)
{
    return f == ProblemFamily::multiplicative_k1 || f == ProblemFamily::multiplicative_k2;
}

double hoelder_term(double z, double alpha)
{
    return std::pow(std::fabs(z), alpha);
}

SddeProblem scalar_problem(std::string name, const ProblemSpec& spec)
{
    SddeProblem p;
    p.name = std::move(name);
    p.dim_x = 1;
    p.dim_w = 1;
    p.x0 = {spec.x0};
    p.tau = spec.tau;
    return p;
}

}  // namespace

std::string to_string(ProblemFamily family)
{
    for (const auto& entry : kFamilies)
        if (entry.family == family)
            return std::string(entry.name);
    return "unknown";
}

ProblemFamily parse_family(std::string_view name)
{
    for (const auto& entry : kFamilies)
        if (entry.name == name)
            return entry.family;
    throw std::invalid_argument("unknown problem family '" + std::string(name) + "'");
}

void ProblemSpec::validate() const
{
    auto in_unit = [](double a) { return a > 0.0 && a <= 1.0; };
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::invalid_argument("problem: tau must be positive");
    if (n < 0)
        throw std::invalid_argument("problem: n must be non-negative");
    if (!std::isfinite(x0))
        throw std::invalid_argument("problem: x0 must be finite");
    if (family == ProblemFamily::custom) {
        if (!custom)
            throw std::invalid_argument("problem: custom family needs user-supplied coefficients");
        return;
    }
    if (custom)
        throw std::invalid_argument("problem: coefficients supplied for a built-in family");
    if (is_additive(family) || is_multiplicative(family)) {
        if (!in_unit(alpha1) || !in_unit(alpha2))
            throw std::invalid_argument("problem: alpha1 and alpha2 must lie in (0, 1]");
    }
    if (uses_k1(family) && !(gamma1 > 2.0))
        throw std::invalid_argument("problem: k1 families require gamma1 > 2");
    if (is_multiplicative(family) && !in_unit(gamma2))
        throw std::invalid_argument("problem: gamma2 must lie in (0, 1]");
    if (is_additive(family) && alpha2 != 1.0)
        throw std::invalid_argument(
            "problem: additive noise does not depend on z, alpha2 must be 1");
    if ((family == ProblemFamily::gbm || family == ProblemFamily::brownian) &&
        !std::isfinite(sigma))
        throw std::invalid_argument("problem: sigma must be finite");
    if (family == ProblemFamily::gbm && !std::isfinite(drift_rate))
        throw std::invalid_argument("problem: drift rate must be finite");
}

int lag_interval(double t, double tau, int n)
{
    const double horizon = (n + 1) * tau;
    if (!(t >= 0.0 && t <= horizon))
        throw std::out_of_range("time " + std::to_string(t) + " outside [0, " +
                                std::to_string(horizon) + "]");
    const auto j = static_cast<int>(std::floor(t / tau));
    return j > n ? n : j;
}

double k1(double t, double tau, int n, double gamma1)
{
    if (!(gamma1 > 2.0))
        throw std::invalid_argument("k1: gamma1 must exceed 2");
    const int j = lag_interval(t, tau, n);
    double gap = (j + 1) * tau - t;
    const double floor = k1_singularity_floor * tau;
    if (gap < floor)
        gap = floor;
    return std::pow(gap, -1.0 / gamma1);
}

double k2(double t, double tau, int n)
{
    return 0.1 * (lag_interval(t, tau, n) + 1);
}

double k_pow(double t, double gamma2)
{
    if (t < 0.0)
        throw std::out_of_range("k_pow: negative time");
    return std::pow(t, gamma2);
}

double f1(double time_factor, double x, double z, double alpha1)
{
    const double zp = hoelder_term(z, alpha1);
    return time_factor * (x + 0.01 * zp + std::sin(10.0 * x) * std::cos(100.0 * zp));
}

double g1(double t)
{
    return 0.5 * std::fabs(std::cos(32.0 * std::numbers::pi * t));
}

double g2(double t, double x, double z, double gamma2, double alpha2)
{
    const double zp = hoelder_term(z, alpha2);
    return k_pow(t, gamma2) * (x + 0.01 * zp + std::cos(10.0 * x) * std::cos(100.0 * zp));
}

SddeProblem make_problem(const ProblemSpec& spec)
{
    spec.validate();
    const double tau = spec.tau;
    const int n = spec.n;

    switch (spec.family) {
    case ProblemFamily::custom: {
        SddeProblem p = *spec.custom;
        p.validate();
        return p;
    }
    case ProblemFamily::delay_linear: {
        auto p = scalar_problem("delay_linear", spec);
        p.drift = [](double, std::span<const double>, std::span<const double> z,
                     std::span<double> out) { out[0] = z[0]; };
        p.diffusion = [](double, std::span<const double>, std::span<const double>,
                         std::span<double> out) { out[0] = 0.0; };
        return p;
    }
    case ProblemFamily::gbm: {
        auto p = scalar_problem("gbm", spec);
        const double a = spec.drift_rate;
        const double sigma = spec.sigma;
        p.drift = [a](double, std::span<const double> x, std::span<const double>,
                      std::span<double> out) { out[0] = a * x[0]; };
        p.diffusion = [sigma](double, std::span<const double> x, std::span<const double>,
                              std::span<double> out) { out[0] = sigma * x[0]; };
        return p;
    }
    case ProblemFamily::brownian: {
        auto p = scalar_problem("brownian", spec);
        const double sigma = spec.sigma;
        p.drift = [](double, std::span<const double>, std::span<const double>,
                     std::span<double> out) { out[0] = 0.0; };
        p.diffusion = [sigma](double, std::span<const double>, std::span<const double>,
                              std::span<double> out) { out[0] = sigma; };
        return p;
    }
    default:
        break;
    }

    auto p = scalar_problem(to_string(spec.family), spec);
    p.alpha1 = spec.alpha1;
    const double alpha1 = spec.alpha1;
    if (uses_k1(spec.family)) {
        const double gamma1 = spec.gamma1;
        p.drift = [=](double t, std::span<const double> x, std::span<const double> z,
                      std::span<double> out) {
            out[0] = f1(k1(t, tau, n, gamma1), x[0], z[0], alpha1);
        };
    } else {
        p.drift = [=](double t, std::span<const double> x, std::span<const double> z,
                      std::span<double> out) { out[0] = f1(k2(t, tau, n), x[0], z[0], alpha1); };
    }
    if (is_additive(spec.family)) {
        p.alpha2 = 1.0;
        p.rho = 1.0;
        p.diffusion = [](double t, std::span<const double>, std::span<const double>,
                         std::span<double> out) { out[0] = g1(t); };
    } else {
        const double gamma2 = spec.gamma2;
        const double alpha2 = spec.alpha2;
        p.alpha2 = alpha2;
        p.rho = gamma2;
        p.diffusion = [=](double t, std::span<const double> x, std::span<const double> z,
                          std::span<double> out) { out[0] = g2(t, x[0], z[0], gamma2, alpha2); };
    }
    return p;
}

}  // namespace sdde
