#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sdde/core.hpp"

namespace sdde {

enum class StreamKind : std::uint8_t { wiener = 1, solver_gamma = 2, reference_gamma = 3 };

/// Identifies one random stream: (master seed, realization ω_k, tag). Equal
/// keys give equal streams; any differing field gives an unrelated stream.
struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint64_t realization = 0;
    StreamKind kind = StreamKind::wiener;
    int level = 0;  ///< mesh exponent; only meaningful for solver_gamma

    static StreamKey wiener(std::uint64_t seed, std::uint64_t realization);
    static StreamKey solver_gamma(std::uint64_t seed, std::uint64_t realization, int level);
    static StreamKey reference_gamma(std::uint64_t seed, std::uint64_t realization);

    bool operator==(const StreamKey&) const = default;
    std::string describe() const;
};

/// 64-bit Mersenne Twister seeded from the key through a SplitMix64 mix of
/// every field, so streams can be rebuilt in any order on any worker.
std::mt19937_64 make_engine(const StreamKey& key);

/// Brownian increments on the finest mesh of a study: for each lag interval
/// j in 0..n, M increments of an m-dimensional Wiener process over steps of
/// length tau / M.
class WienerLattice {
public:
    WienerLattice(double tau, int n, int fine_steps_per_lag, int dim_w,
                  std::vector<double> increments);

    double tau() const noexcept { return tau_; }
    int n() const noexcept { return n_; }
    int fine_steps_per_lag() const noexcept { return steps_; }
    int dim_w() const noexcept { return dim_w_; }
    double fine_step() const noexcept { return tau_ / steps_; }

    std::span<const double> increment(int j, int i) const;
    std::span<const double> segment(int j) const;
    /// Row-major ((n+1)·M) × m table.
    std::span<const double> increments() const noexcept { return increments_; }

    /// Overwrites one increment; used to probe causality of the solver.
    void set_increment(int j, int i, std::span<const double> value);

    bool operator==(const WienerLattice&) const = default;

private:
    std::size_t offset(int j, int i) const;

    double tau_;
    int n_;
    int steps_;
    int dim_w_;
    std::vector<double> increments_;
};

/// Increments are rounded to integer multiples of 2^-32. Any sum of them below
/// 2^21 in magnitude is then exact in double precision, so coarsening is exact
/// and order-free and a coarse run sees W(t) at shared nodes bit for bit.
inline constexpr int kIncrementQuantumBits = 32;

/// (n+1)·M independent N(0, (tau/M)·I_m) draws, deterministic in the key.
WienerLattice sample_wiener_lattice(const StreamKey& key, const DelayMesh& finest, int dim_w);

/// Sum of fine increments (j, k·c) .. (j, k·c + c − 1), left to right.
std::vector<double> coarse_increment(const WienerLattice& lattice, int factor, int j, int k);

/// All coarse increments at once, row-major ((n+1)·M/c) × m. Bitwise equal to
/// calling coarse_increment for every (j, k).
std::vector<double> coarsen(const WienerLattice& lattice, int factor);

/// `count` iid U[0, 1] draws, deterministic in the key.
std::vector<double> sample_gamma_stream(const StreamKey& key, std::size_t count);

}  // namespace sdde
