#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdde/brownian.hpp"
#include "sdde/core.hpp"

namespace sdde {

enum class Scheme {
    randomized,  ///< drift evaluated at t_k + h·gamma
    classical,   ///< drift evaluated at t_k; consumes no gammas
};

std::string to_string(Scheme scheme);

/// Raised when drift, diffusion, or the updated state is not finite. The
/// realization is abandoned; callers decide whether to count or propagate.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, int j, int k, double time);
    int segment() const noexcept { return j_; }
    int node() const noexcept { return k_; }
    double time() const noexcept { return time_; }

private:
    int j_;
    int k_;
    double time_;
};

/// One solve: the problem, the mesh it runs on, and the Brownian lattice seen
/// through a coarsening factor c (so mesh N · c must equal the lattice's M).
struct SolveSpec {
    const SddeProblem& problem;
    DelayMesh mesh;
    const WienerLattice& wiener;
    int factor = 1;
    std::span<const double> gammas;  ///< (n+1)·N draws, consumed in (j, k) order
    Scheme scheme = Scheme::randomized;
};

/// y + h·f(θ, y, z) + g(t_k^j, y, z)·dW with θ = t_k^j + h·gamma.
std::vector<double> randomized_euler_step(std::span<const double> y, std::span<const double> z,
                                          int j, int k, double gamma,
                                          std::span<const double> dw,
                                          const SddeProblem& problem, const DelayMesh& mesh);

SegmentedPath solve(const SolveSpec& spec);

/// solve() with the drift time pinned to the left endpoint.
SegmentedPath solve_classical(const SolveSpec& spec);

/// Runs the scheme on a mesh whose per-step increments are given directly as a
/// row-major ((n+1)·N) × m table.
SegmentedPath solve_on_increments(const SddeProblem& problem, const DelayMesh& mesh,
                                  std::span<const double> increments,
                                  std::span<const double> gammas, Scheme scheme);

}  // namespace sdde
