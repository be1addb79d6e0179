#include "sdde/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace sdde {

DelayMesh::DelayMesh(double tau, int n, int steps_per_lag)
    : tau_(tau), n_(n), steps_(steps_per_lag), h_(0.0)
{
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::invalid_argument("DelayMesh: tau must be positive and finite");
    if (n < 0)
        throw std::invalid_argument("DelayMesh: horizon parameter n must be non-negative");
    if (steps_per_lag < 1)
        throw std::invalid_argument("DelayMesh: steps per lag must be positive");
    h_ = tau_ / steps_;
}

double DelayMesh::node(int j, int k) const
{
    if (j < 0 || j > n_ || k < 0 || k > steps_)
        throw std::out_of_range("DelayMesh::node: index (" + std::to_string(j) + ", " +
                                std::to_string(k) + ") outside mesh");
    if (k == steps_)
        return (j + 1) * tau_;
    return j * tau_ + k * h_;
}

double DelayMesh::randomized_time(int j, int k, double gamma) const
{
    if (k >= steps_)
        throw std::out_of_range("DelayMesh::randomized_time: k must be below N");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("DelayMesh::randomized_time: gamma outside [0, 1]");
    if (gamma == 1.0)
        return node(j, k + 1);
    return node(j, k) + h_ * gamma;
}

double mesh_node(const DelayMesh& mesh, int j, int k) { return mesh.node(j, k); }

double randomized_time(const DelayMesh& mesh, int j, int k, double gamma)
{
    return mesh.randomized_time(j, k, gamma);
}

void SddeProblem::validate() const
{
    if (dim_x < 1 || dim_w < 1)
        throw std::invalid_argument("SddeProblem: dimensions must be positive");
    if (static_cast<int>(x0.size()) != dim_x)
        throw std::invalid_argument("SddeProblem: x0 has wrong dimension");
    if (!(tau > 0.0))
        throw std::invalid_argument("SddeProblem: tau must be positive");
    if (!drift || !diffusion)
        throw std::invalid_argument("SddeProblem: drift and diffusion must be set");
    auto in_unit = [](double a) { return a > 0.0 && a <= 1.0; };
    if (!in_unit(alpha1) || !in_unit(alpha2) || !in_unit(rho))
        throw std::invalid_argument("SddeProblem: alpha1, alpha2, rho must lie in (0, 1]");
}

double SddeProblem::predicted_exponent(int j) const
{
    return std::min(rho, 0.5) * std::pow(std::min(alpha1, alpha2), j);
}

SegmentedPath::SegmentedPath(DelayMesh mesh, std::vector<double> history)
    : mesh_(mesh), dim_(static_cast<int>(history.size())), history_(std::move(history))
{
    if (dim_ < 1)
        throw std::invalid_argument("SegmentedPath: empty state dimension");
    values_.assign(static_cast<std::size_t>(mesh_.intervals()) *
                       static_cast<std::size_t>(mesh_.steps_per_lag() + 1) *
                       static_cast<std::size_t>(dim_),
                   0.0);
}

std::size_t SegmentedPath::offset(int j, int k) const
{
    if (j < 0 || j > mesh_.n() || k < 0 || k > mesh_.steps_per_lag())
        throw std::out_of_range("SegmentedPath: index (" + std::to_string(j) + ", " +
                                std::to_string(k) + ") outside path");
    const auto per_segment = static_cast<std::size_t>(mesh_.steps_per_lag() + 1);
    return (static_cast<std::size_t>(j) * per_segment + static_cast<std::size_t>(k)) *
           static_cast<std::size_t>(dim_);
}

std::span<const double> SegmentedPath::at(int j, int k) const
{
    return std::span<const double>(values_).subspan(offset(j, k), dim_);
}

std::span<double> SegmentedPath::at(int j, int k)
{
    return std::span<double>(values_).subspan(offset(j, k), dim_);
}

std::span<const double> SegmentedPath::segment(int j) const
{
    const auto len = static_cast<std::size_t>(mesh_.steps_per_lag() + 1) *
                     static_cast<std::size_t>(dim_);
    return std::span<const double>(values_).subspan(offset(j, 0), len);
}

std::span<const double> delayed_value(const SegmentedPath& path, int j, int k)
{
    if (j < 0 || j > path.mesh().n() || k < 0 || k > path.mesh().steps_per_lag())
        throw std::out_of_range("delayed_value: index outside mesh");
    if (j == 0)
        return path.history();
    return path.at(j - 1, k);
}

}  // namespace sdde
