#pragma once

// Data-parallel inner loops used by the lattice coarsening and the error
// estimator. Every kernel has a scalar reference in `scalar::` and, when the
// build and the host CPU allow it, an AVX2 variant in `avx2::`. The unqualified
// entry points dispatch at runtime. Variants produce bitwise-identical results:
// each output lane performs the same IEEE operations in the same order as the
// scalar loop.

#include <cstddef>
#include <span>
#include <string_view>

namespace sdde::kernels {

enum class Isa { scalar, avx2 };

/// True when the AVX2 variants were compiled in and the CPU reports AVX2.
bool avx2_available() noexcept;

/// ISA used by the dispatching entry points. SDDE_FORCE_SCALAR=1 in the
/// environment pins it to scalar.
Isa active_isa() noexcept;
std::string_view isa_name(Isa isa) noexcept;

/// Sums consecutive blocks of `factor` rows of a row-major table with `width`
/// columns: out row k = fine row k·factor + fine row k·factor+1 + ... ,
/// accumulated left to right starting from the first row of the block.
/// fine.size() must equal out.size() · factor.
void block_sum(std::span<const double> fine, std::size_t width, std::size_t factor,
               std::span<double> out);

/// max over i of |coarse_i − fine_{i·stride}| (Euclidean norm over `dim`
/// components; plain absolute value when dim = 1). coarse holds `count`
/// node-major states, fine at least (count−1)·stride + 1.
double max_strided_deviation(std::span<const double> coarse, std::span<const double> fine,
                             std::size_t dim, std::size_t stride);

namespace scalar {
void block_sum(std::span<const double> fine, std::size_t width, std::size_t factor,
               std::span<double> out);
double max_strided_deviation(std::span<const double> coarse, std::span<const double> fine,
                             std::size_t dim, std::size_t stride);
}  // namespace scalar

#if defined(SDDE_HAVE_AVX2)
namespace avx2 {
void block_sum(std::span<const double> fine, std::size_t width, std::size_t factor,
               std::span<double> out);
double max_strided_deviation(std::span<const double> coarse, std::span<const double> fine,
                             std::size_t dim, std::size_t stride);
}  // namespace avx2
#endif

}  // namespace sdde::kernels
