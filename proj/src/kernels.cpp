#include "sdde/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace sdde::kernels {

namespace {

void check_block_sum(std::span<const double> fine, std::size_t width, std::size_t factor,
                     std::span<double> out)
{
    if (width == 0 || factor == 0)
        throw std::invalid_argument("block_sum: width and factor must be positive");
    if (out.size() % width != 0 || fine.size() != out.size() * factor)
        throw std::invalid_argument("block_sum: fine table size must equal out size times factor");
}

std::size_t check_deviation(std::span<const double> coarse, std::span<const double> fine,
                            std::size_t dim, std::size_t stride)
{
    if (dim == 0 || stride == 0 || coarse.size() % dim != 0)
        throw std::invalid_argument("max_strided_deviation: bad dim or stride");
    const std::size_t count = coarse.size() / dim;
    if (count > 0 && fine.size() < ((count - 1) * stride + 1) * dim)
        throw std::invalid_argument("max_strided_deviation: fine table too short");
    return count;
}

}  // namespace

bool avx2_available() noexcept
{
#if defined(SDDE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa active_isa() noexcept
{
    static const Isa isa = [] {
        const char* force = std::getenv("SDDE_FORCE_SCALAR");
        if (force != nullptr && force[0] != '\0' && force[0] != '0')
            return Isa::scalar;
        return avx2_available() ? Isa::avx2 : Isa::scalar;
    }();
    return isa;
}

std::string_view isa_name(Isa isa) noexcept
{
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

namespace scalar {

void block_sum(std::span<const double> fine, std::size_t width, std::size_t factor,
               std::span<double> out)
{
    check_block_sum(fine, width, factor, out);
    const std::size_t rows = out.size() / width;
    for (std::size_t k = 0; k < rows; ++k) {
        const double* block = fine.data() + k * factor * width;
        for (std::size_t r = 0; r < width; ++r) {
            double acc = block[r];
            for (std::size_t q = 1; q < factor; ++q)
                acc += block[q * width + r];
            out[k * width + r] = acc;
        }
    }
}

double max_strided_deviation(std::span<const double> coarse, std::span<const double> fine,
                             std::size_t dim, std::size_t stride)
{
    const std::size_t count = check_deviation(coarse, fine, dim, stride);
    double worst = 0.0;
    if (dim == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            const double dev = std::fabs(coarse[i] - fine[i * stride]);
            worst = dev > worst ? dev : worst;
        }
        return worst;
    }
    for (std::size_t i = 0; i < count; ++i) {
        double sq = 0.0;
        for (std::size_t r = 0; r < dim; ++r) {
            const double diff = coarse[i * dim + r] - fine[i * stride * dim + r];
            sq += diff * diff;
        }
        const double dev = std::sqrt(sq);
        worst = dev > worst ? dev : worst;
    }
    return worst;
}

}  // namespace scalar

void block_sum(std::span<const double> fine, std::size_t width, std::size_t factor,
               std::span<double> out)
{
#if defined(SDDE_HAVE_AVX2)
    if (active_isa() == Isa::avx2)
        return avx2::block_sum(fine, width, factor, out);
#endif
    scalar::block_sum(fine, width, factor, out);
}

double max_strided_deviation(std::span<const double> coarse, std::span<const double> fine,
                             std::size_t dim, std::size_t stride)
{
#if defined(SDDE_HAVE_AVX2)
    if (active_isa() == Isa::avx2)
        return avx2::max_strided_deviation(coarse, fine, dim, stride);
#endif
    return scalar::max_strided_deviation(coarse, fine, dim, stride);
}

#if defined(SDDE_HAVE_AVX2)
namespace avx2 {
// Argument checks live here so the AVX2 translation unit stays intrinsics-only.
void check_block_sum_args(std::span<const double> fine, std::size_t width, std::size_t factor,
                          std::span<double> out)
{
    check_block_sum(fine, width, factor, out);
}
std::size_t check_deviation_args(std::span<const double> coarse, std::span<const double> fine,
                                 std::size_t dim, std::size_t stride)
{
    return check_deviation(coarse, fine, dim, stride);
}
}  // namespace avx2
#endif

}  // namespace sdde::kernels
