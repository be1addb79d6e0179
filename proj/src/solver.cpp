#include "sdde/solver.hpp"

#include <cmath>
#include <sstream>

namespace sdde {

namespace {

bool all_finite(std::span<const double> v)
{
    for (double x : v)
        if (!std::isfinite(x))
            return false;
    return true;
}

[[noreturn]] void abort_step(const char* what, int j, int k, double time)
{
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " at segment j=" << j << ", node k=" << k << ", time " << time;
    throw SolveError(msg.str(), j, k, time);
}

/// Scratch buffers for one stepping loop.
struct Workspace {
    std::vector<double> drift;
    std::vector<double> diffusion;

    explicit Workspace(const SddeProblem& p)
        : drift(static_cast<std::size_t>(p.dim_x)),
          diffusion(static_cast<std::size_t>(p.dim_x) * static_cast<std::size_t>(p.dim_w))
    {}
};

void advance(std::span<const double> y, std::span<const double> z, int j, int k,
             double drift_time, double left_time, std::span<const double> dw,
             const SddeProblem& problem, double h, Workspace& ws, std::span<double> out)
{
    problem.drift(drift_time, y, z, ws.drift);
    if (!all_finite(ws.drift))
        abort_step("non-finite drift", j, k, drift_time);
    problem.diffusion(left_time, y, z, ws.diffusion);
    if (!all_finite(ws.diffusion))
        abort_step("non-finite diffusion", j, k, left_time);

    const int d = problem.dim_x;
    const int m = problem.dim_w;
    for (int r = 0; r < d; ++r) {
        const double* g_row = ws.diffusion.data() + static_cast<std::size_t>(r) * m;
        double noise = g_row[0] * dw[0];
        for (int q = 1; q < m; ++q)
            noise += g_row[q] * dw[q];
        out[r] = (y[r] + h * ws.drift[r]) + noise;
    }
    if (!all_finite(out.first(static_cast<std::size_t>(d))))
        abort_step("non-finite state", j, k, drift_time);
}

}  // namespace

std::string to_string(Scheme scheme)
{
    return scheme == Scheme::randomized ? "randomized" : "classical";
}

SolveError::SolveError(const std::string& what, int j, int k, double time)
    : std::runtime_error(what), j_(j), k_(k), time_(time)
{}

std::vector<double> randomized_euler_step(std::span<const double> y, std::span<const double> z,
                                          int j, int k, double gamma,
                                          std::span<const double> dw,
                                          const SddeProblem& problem, const DelayMesh& mesh)
{
    if (static_cast<int>(y.size()) != problem.dim_x || static_cast<int>(z.size()) != problem.dim_x)
        throw std::invalid_argument("randomized_euler_step: state has wrong dimension");
    if (static_cast<int>(dw.size()) != problem.dim_w)
        throw std::invalid_argument("randomized_euler_step: increment has wrong dimension");
    const double theta = mesh.randomized_time(j, k, gamma);
    Workspace ws(problem);
    std::vector<double> out(y.size());
    advance(y, z, j, k, theta, mesh.node(j, k), dw, problem, mesh.h(), ws, out);
    return out;
}

SegmentedPath solve_on_increments(const SddeProblem& problem, const DelayMesh& mesh,
                                  std::span<const double> increments,
                                  std::span<const double> gammas, Scheme scheme)
{
    problem.validate();
    if (mesh.tau() != problem.tau)
        throw std::invalid_argument("solve: mesh lag differs from the problem lag");
    const int n_int = mesh.intervals();
    const int N = mesh.steps_per_lag();
    const int m = problem.dim_w;
    const auto steps = static_cast<std::size_t>(n_int) * static_cast<std::size_t>(N);
    if (increments.size() != steps * static_cast<std::size_t>(m))
        throw std::invalid_argument("solve: increment table does not match the mesh");
    if (scheme == Scheme::randomized && gammas.size() < steps)
        throw std::invalid_argument("solve: gamma stream shorter than (n+1)·N");

    SegmentedPath path(mesh, problem.x0);
    {
        auto start = path.at(0, 0);
        for (int r = 0; r < problem.dim_x; ++r)
            start[r] = problem.x0[r];
    }

    Workspace ws(problem);
    const double h = mesh.h();
    std::size_t step = 0;
    for (int j = 0; j < n_int; ++j) {
        if (j > 0) {
            const auto prev_end = path.at(j - 1, N);
            auto start = path.at(j, 0);
            for (int r = 0; r < problem.dim_x; ++r)
                start[r] = prev_end[r];
        }
        for (int k = 0; k < N; ++k, ++step) {
            const double left = mesh.node(j, k);
            const double drift_time =
                scheme == Scheme::randomized ? mesh.randomized_time(j, k, gammas[step]) : left;
            const auto dw = increments.subspan(step * static_cast<std::size_t>(m),
                                               static_cast<std::size_t>(m));
            const auto y = std::span<const double>(path.at(j, k));
            advance(y, delayed_value(path, j, k), j, k, drift_time, left, dw, problem, h, ws,
                    path.at(j, k + 1));
        }
    }
    return path;
}

SegmentedPath solve(const SolveSpec& spec)
{
    const auto& w = spec.wiener;
    if (spec.factor < 1 ||
        static_cast<long long>(spec.mesh.steps_per_lag()) * spec.factor != w.fine_steps_per_lag())
        throw std::invalid_argument("solve: N · factor must equal the lattice resolution");
    if (w.n() != spec.mesh.n() || w.tau() != spec.mesh.tau())
        throw std::invalid_argument("solve: lattice and mesh disagree on the horizon");
    if (w.dim_w() != spec.problem.dim_w)
        throw std::invalid_argument("solve: lattice dimension differs from the problem's dim_w");
    const auto increments = coarsen(w, spec.factor);
    return solve_on_increments(spec.problem, spec.mesh, increments, spec.gammas, spec.scheme);
}

SegmentedPath solve_classical(const SolveSpec& spec)
{
    SolveSpec classical{spec.problem, spec.mesh, spec.wiener, spec.factor, spec.gammas,
                        Scheme::classical};
    return solve(classical);
}

}  // namespace sdde
