#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sdde {

/// Uniform mesh over [0, (n+1)·tau] aligned with the lag: N steps per lag
/// interval, so node (j, k) sits at j·tau + k·h with h = tau / N.
class DelayMesh {
public:
    DelayMesh(double tau, int n, int steps_per_lag);

    double tau() const noexcept { return tau_; }
    int n() const noexcept { return n_; }
    int steps_per_lag() const noexcept { return steps_; }
    double h() const noexcept { return h_; }
    int intervals() const noexcept { return n_ + 1; }
    double horizon() const noexcept { return (n_ + 1) * tau_; }

    /// j·tau + k·h. The segment end (k = N) is returned as (j+1)·tau so it
    /// coincides with node(j+1, 0) for every N, not only powers of two.
    double node(int j, int k) const;

    /// node(j, k) + h·gamma, gamma in [0, 1].
    double randomized_time(int j, int k, double gamma) const;

    bool operator==(const DelayMesh&) const = default;

private:
    double tau_;
    int n_;
    int steps_;
    double h_;
};

double mesh_node(const DelayMesh& mesh, int j, int k);
double randomized_time(const DelayMesh& mesh, int j, int k, double gamma);

/// Drift: writes f(t, x, z) (length d) into `out`.
using DriftFn = std::function<void(double t, std::span<const double> x,
                                   std::span<const double> z, std::span<double> out)>;
/// Diffusion: writes g(t, x, z) as a row-major d×m matrix into `out`.
using DiffusionFn = std::function<void(double t, std::span<const double> x,
                                       std::span<const double> z, std::span<double> out)>;

/// dX = f(t, X(t), X(t-tau)) dt + g(t, X(t), X(t-tau)) dW with X = x0 on [-tau, 0].
///
/// alpha1, alpha2 (Hölder exponents of f and g in the delayed argument) and
/// rho (time-Hölder exponent of g) are metadata for the predicted rate only.
struct SddeProblem {
    std::string name;
    int dim_x = 1;
    int dim_w = 1;
    std::vector<double> x0;
    double tau = 1.0;
    DriftFn drift;
    DiffusionFn diffusion;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double rho = 1.0;

    /// Throws std::invalid_argument on inconsistent dimensions or exponents.
    void validate() const;

    /// min{rho, 1/2} · min{alpha1, alpha2}^j
    double predicted_exponent(int j) const;
};

/// Values y_k^j for j in 0..n, k in 0..N, plus the constant history segment.
class SegmentedPath {
public:
    SegmentedPath(DelayMesh mesh, std::vector<double> history);

    const DelayMesh& mesh() const noexcept { return mesh_; }
    int dim() const noexcept { return dim_; }
    std::span<const double> history() const noexcept { return history_; }

    std::span<const double> at(int j, int k) const;
    std::span<double> at(int j, int k);

    /// All N+1 node values of segment j, node-major (length (N+1)·d).
    std::span<const double> segment(int j) const;

    /// Flat storage, segment-major then node-major then component.
    std::span<const double> values() const noexcept { return values_; }

private:
    std::size_t offset(int j, int k) const;

    DelayMesh mesh_;
    int dim_;
    std::vector<double> history_;
    std::vector<double> values_;
};

/// The lagged state y_k^{j-1}: the history for j = 0, else values(j-1, k).
std::span<const double> delayed_value(const SegmentedPath& path, int j, int k);

}  // namespace sdde
