#include "sdde/brownian.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "sdde/kernels.hpp"

namespace sdde {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

const char* kind_name(StreamKind kind)
{
    switch (kind) {
    case StreamKind::wiener: return "wiener";
    case StreamKind::solver_gamma: return "solver_gamma";
    case StreamKind::reference_gamma: return "reference_gamma";
    }
    return "unknown";
}

}  // namespace

StreamKey StreamKey::wiener(std::uint64_t seed, std::uint64_t realization)
{
    return {seed, realization, StreamKind::wiener, 0};
}

StreamKey StreamKey::solver_gamma(std::uint64_t seed, std::uint64_t realization, int level)
{
    return {seed, realization, StreamKind::solver_gamma, level};
}

StreamKey StreamKey::reference_gamma(std::uint64_t seed, std::uint64_t realization)
{
    return {seed, realization, StreamKind::reference_gamma, 0};
}

std::string StreamKey::describe() const
{
    std::string out = std::string(kind_name(kind)) + "(seed=" + std::to_string(master_seed) +
                      ", realization=" + std::to_string(realization);
    if (kind == StreamKind::solver_gamma)
        out += ", level=" + std::to_string(level);
    return out + ")";
}

std::mt19937_64 make_engine(const StreamKey& key)
{
    // Chain the fields through SplitMix64 and expand to 256 bits of seed material.
    std::uint64_t state = splitmix64(key.master_seed);
    state = splitmix64(state ^ key.realization);
    state = splitmix64(state ^ (static_cast<std::uint64_t>(key.kind) << 32 |
                                static_cast<std::uint32_t>(key.level)));
    std::array<std::uint32_t, 8> words{};
    for (std::size_t w = 0; w < words.size(); w += 2) {
        state = splitmix64(state);
        words[w] = static_cast<std::uint32_t>(state);
        words[w + 1] = static_cast<std::uint32_t>(state >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

WienerLattice::WienerLattice(double tau, int n, int fine_steps_per_lag, int dim_w,
                             std::vector<double> increments)
    : tau_(tau), n_(n), steps_(fine_steps_per_lag), dim_w_(dim_w),
      increments_(std::move(increments))
{
    if (!(tau > 0.0) || n < 0 || fine_steps_per_lag < 1 || dim_w < 1)
        throw std::invalid_argument("WienerLattice: bad shape");
    const auto expected = static_cast<std::size_t>(n + 1) *
                          static_cast<std::size_t>(fine_steps_per_lag) *
                          static_cast<std::size_t>(dim_w);
    if (increments_.size() != expected)
        throw std::invalid_argument("WienerLattice: increment table has wrong size");
}

std::size_t WienerLattice::offset(int j, int i) const
{
    if (j < 0 || j > n_ || i < 0 || i >= steps_)
        throw std::out_of_range("WienerLattice: index (" + std::to_string(j) + ", " +
                                std::to_string(i) + ") outside lattice");
    return (static_cast<std::size_t>(j) * static_cast<std::size_t>(steps_) +
            static_cast<std::size_t>(i)) *
           static_cast<std::size_t>(dim_w_);
}

std::span<const double> WienerLattice::increment(int j, int i) const
{
    return std::span<const double>(increments_).subspan(offset(j, i), dim_w_);
}

std::span<const double> WienerLattice::segment(int j) const
{
    return std::span<const double>(increments_)
        .subspan(offset(j, 0), static_cast<std::size_t>(steps_) * dim_w_);
}

void WienerLattice::set_increment(int j, int i, std::span<const double> value)
{
    if (static_cast<int>(value.size()) != dim_w_)
        throw std::invalid_argument("WienerLattice::set_increment: wrong dimension");
    const auto at = offset(j, i);
    for (int r = 0; r < dim_w_; ++r)
        increments_[at + r] = value[r];
}

WienerLattice sample_wiener_lattice(const StreamKey& key, const DelayMesh& finest, int dim_w)
{
    if (key.kind != StreamKind::wiener)
        throw std::invalid_argument("sample_wiener_lattice: key is not a wiener stream: " +
                                    key.describe());
    if (dim_w < 1)
        throw std::invalid_argument("sample_wiener_lattice: dim_w must be positive");
    auto engine = make_engine(key);
    std::normal_distribution<double> normal(0.0, std::sqrt(finest.h()));
    std::vector<double> increments(static_cast<std::size_t>(finest.intervals()) *
                                   static_cast<std::size_t>(finest.steps_per_lag()) *
                                   static_cast<std::size_t>(dim_w));
    for (double& dw : increments)
        dw = std::ldexp(std::nearbyint(std::ldexp(normal(engine), kIncrementQuantumBits)),
                        -kIncrementQuantumBits);
    return WienerLattice(finest.tau(), finest.n(), finest.steps_per_lag(), dim_w,
                         std::move(increments));
}

std::vector<double> coarse_increment(const WienerLattice& lattice, int factor, int j, int k)
{
    if (factor < 1 || lattice.fine_steps_per_lag() % factor != 0)
        throw std::invalid_argument("coarse_increment: factor " + std::to_string(factor) +
                                    " does not divide " +
                                    std::to_string(lattice.fine_steps_per_lag()));
    if (k < 0 || k >= lattice.fine_steps_per_lag() / factor)
        throw std::out_of_range("coarse_increment: coarse node out of range");
    std::vector<double> sum(lattice.increment(j, k * factor).begin(),
                            lattice.increment(j, k * factor).end());
    for (int q = 1; q < factor; ++q) {
        const auto dw = lattice.increment(j, k * factor + q);
        for (std::size_t r = 0; r < sum.size(); ++r)
            sum[r] += dw[r];
    }
    return sum;
}

std::vector<double> coarsen(const WienerLattice& lattice, int factor)
{
    if (factor < 1 || lattice.fine_steps_per_lag() % factor != 0)
        throw std::invalid_argument("coarsen: factor " + std::to_string(factor) +
                                    " does not divide " +
                                    std::to_string(lattice.fine_steps_per_lag()));
    std::vector<double> out(lattice.increments().size() / static_cast<std::size_t>(factor));
    kernels::block_sum(lattice.increments(), static_cast<std::size_t>(lattice.dim_w()),
                       static_cast<std::size_t>(factor), out);
    return out;
}

std::vector<double> sample_gamma_stream(const StreamKey& key, std::size_t count)
{
    if (key.kind == StreamKind::wiener)
        throw std::invalid_argument("sample_gamma_stream: key is not a gamma stream: " +
                                    key.describe());
    auto engine = make_engine(key);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> gammas(count);
    for (double& g : gammas)
        g = uniform(engine);
    return gammas;
}

}  // namespace sdde
