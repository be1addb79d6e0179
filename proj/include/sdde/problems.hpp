#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sdde/core.hpp"

namespace sdde {

// Scalar test coefficients with time-irregular drift factors.
//
//   f(t, x, z) = k_i(t) · (x + 0.01|z|^a1 + sin(10x) · cos(100|z|^a1))
//   g1(t)      = 0.5 |cos(32πt)|                           (additive)
//   g2(t, x, z)= t^γ2 · (x + 0.01|z|^a2 + cos(10x) · cos(100|z|^a2))
//
// with k1(t) = ((j+1)τ − t)^(−1/γ1) and k2(t) = 0.1·(j+1) on the lag interval
// [jτ, (j+1)τ) containing t. k1 is unbounded at the right end of every
// interval but lies in L^p because γ1 > 2; the drift therefore only satisfies
// the convergence assumptions in an integrable sense.

enum class ProblemFamily {
    additive_k1,
    additive_k2,
    multiplicative_k1,
    multiplicative_k2,
    custom,
    // Oracle problems with known behaviour.
    delay_linear,  ///< f = z, g = 0
    gbm,           ///< f = a·x, g = σ·x (no delay dependence)
    brownian,      ///< f = 0, g = σ
};

std::string to_string(ProblemFamily family);
/// Throws std::invalid_argument for unknown names.
ProblemFamily parse_family(std::string_view name);

struct ProblemSpec {
    ProblemFamily family = ProblemFamily::additive_k1;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double gamma1 = 3.0;  ///< k1 exponent, > 2; k1 families only
    double gamma2 = 1.0;  ///< k(t) = t^γ2 exponent in (0, 1]; multiplicative only
    double tau = 1.0;
    int n = 3;
    double x0 = 1.0;
    double drift_rate = 1.0;  ///< a, gbm only
    double sigma = 1.0;       ///< σ, gbm and brownian only
    std::optional<SddeProblem> custom;  ///< required for ProblemFamily::custom

    /// Throws std::invalid_argument on inconsistent family/parameter choices.
    void validate() const;
};

/// Index of the lag interval containing t, half-open [jτ, (j+1)τ) with
/// t = (n+1)τ assigned to interval n.
int lag_interval(double t, double tau, int n);

/// Smallest argument passed to the k1 power, relative to tau.
inline constexpr double k1_singularity_floor = 1e-12;

double k1(double t, double tau, int n, double gamma1);
double k2(double t, double tau, int n);
double k_pow(double t, double gamma2);

/// Drift body without the time factor: x + 0.01|z|^a + sin(10x)·cos(100|z|^a).
double f1(double time_factor, double x, double z, double alpha1);
double g1(double t);
double g2(double t, double x, double z, double gamma2, double alpha2);

SddeProblem make_problem(const ProblemSpec& spec);

}  // namespace sdde
