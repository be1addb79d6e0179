// Compiled with -mavx2 only; reached through the runtime dispatch in kernels.cpp.
#include "sdde/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace sdde::kernels::avx2 {

void check_block_sum_args(std::span<const double> fine, std::size_t width, std::size_t factor,
                          std::span<double> out);
std::size_t check_deviation_args(std::span<const double> coarse, std::span<const double> fine,
                                 std::size_t dim, std::size_t stride);

namespace {

/// (0, s, 2s, 3s) as 64-bit gather offsets.
__m256i lane_multiples(std::int64_t s)
{
    return _mm256_set_epi64x(3 * s, 2 * s, s, 0);
}

}  // namespace

void block_sum(std::span<const double> fine, std::size_t width, std::size_t factor,
               std::span<double> out)
{
    check_block_sum_args(fine, width, factor, out);
    const std::size_t total = out.size();
    const double* src = fine.data();
    const auto row_step = _mm256_set1_epi64x(static_cast<std::int64_t>(width));

    std::size_t e = 0;
    for (; e + 4 <= total; e += 4) {
        alignas(32) std::int64_t base[4];
        for (std::size_t lane = 0; lane < 4; ++lane) {
            const std::size_t flat = e + lane;
            base[lane] = static_cast<std::int64_t>((flat / width) * factor * width + flat % width);
        }
        __m256i idx = _mm256_load_si256(reinterpret_cast<const __m256i*>(base));
        __m256d acc = _mm256_i64gather_pd(src, idx, 8);
        for (std::size_t q = 1; q < factor; ++q) {
            idx = _mm256_add_epi64(idx, row_step);
            acc = _mm256_add_pd(acc, _mm256_i64gather_pd(src, idx, 8));
        }
        _mm256_storeu_pd(out.data() + e, acc);
    }
    for (; e < total; ++e) {
        const double* block = src + (e / width) * factor * width + e % width;
        double acc = block[0];
        for (std::size_t q = 1; q < factor; ++q)
            acc += block[q * width];
        out[e] = acc;
    }
}

double max_strided_deviation(std::span<const double> coarse, std::span<const double> fine,
                             std::size_t dim, std::size_t stride)
{
    const std::size_t count = check_deviation_args(coarse, fine, dim, stride);
    const double* c = coarse.data();
    const double* f = fine.data();
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d worst = _mm256_setzero_pd();

    const auto fine_node_step = static_cast<std::int64_t>(stride * dim);

    std::size_t i = 0;
    if (dim == 1) {
        const __m256i fine_idx0 = lane_multiples(fine_node_step);
        for (; i + 4 <= count; i += 4) {
            const __m256i idx = _mm256_add_epi64(
                fine_idx0, _mm256_set1_epi64x(static_cast<std::int64_t>(i) * fine_node_step));
            const __m256d ref = _mm256_i64gather_pd(f, idx, 8);
            const __m256d dev = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(c + i), ref));
            worst = _mm256_max_pd(dev, worst);
        }
    } else {
        const auto coarse_node_step = static_cast<std::int64_t>(dim);
        const __m256i coarse_idx0 = lane_multiples(coarse_node_step);
        const __m256i fine_idx0 = lane_multiples(fine_node_step);
        for (; i + 4 <= count; i += 4) {
            const __m256i cbase = _mm256_add_epi64(
                coarse_idx0, _mm256_set1_epi64x(static_cast<std::int64_t>(i) * coarse_node_step));
            const __m256i fbase = _mm256_add_epi64(
                fine_idx0, _mm256_set1_epi64x(static_cast<std::int64_t>(i) * fine_node_step));
            __m256d sq = _mm256_setzero_pd();
            for (std::size_t r = 0; r < dim; ++r) {
                const __m256i roff = _mm256_set1_epi64x(static_cast<std::int64_t>(r));
                const __m256d a = _mm256_i64gather_pd(c, _mm256_add_epi64(cbase, roff), 8);
                const __m256d b = _mm256_i64gather_pd(f, _mm256_add_epi64(fbase, roff), 8);
                const __m256d diff = _mm256_sub_pd(a, b);
                sq = _mm256_add_pd(sq, _mm256_mul_pd(diff, diff));
            }
            worst = _mm256_max_pd(_mm256_sqrt_pd(sq), worst);
        }
    }

    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, worst);
    double result = 0.0;
    for (double v : lanes)
        result = v > result ? v : result;

    for (; i < count; ++i) {
        double dev;
        if (dim == 1) {
            dev = std::fabs(c[i] - f[i * stride]);
        } else {
            double sq = 0.0;
            for (std::size_t r = 0; r < dim; ++r) {
                const double diff = c[i * dim + r] - f[i * stride * dim + r];
                sq += diff * diff;
            }
            dev = std::sqrt(sq);
        }
        result = dev > result ? dev : result;
    }
    return result;
}

}  // namespace sdde::kernels::avx2
