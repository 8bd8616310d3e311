// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cstdint>

#include "pathfinder/kernels.hpp"

namespace pathfinder::kernels::avx2 {

namespace {

// exp(x) for x in [-708, 708]: x = k ln2 + r, |r| <= ln2/2, Taylor to r^13
// (truncation < 2e-16 relative), then scale by 2^k through the exponent bits.
inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

    x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(708.0));
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
    r = _mm256_fnmadd_pd(k, ln2_lo, r);

    static constexpr double kInvFactorial[] = {
        1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
        1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
        1.0 / 6.0,          0.5,               1.0,              1.0,
    };
    __m256d poly = _mm256_set1_pd(kInvFactorial[0]);
    for (int i = 1; i < 14; ++i) {
        poly = _mm256_fmadd_pd(poly, r, _mm256_set1_pd(kInvFactorial[i]));
    }

    // k + 1.5*2^52 puts k, as a two's-complement integer, in the low mantissa bits.
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);
    const __m256i k_int = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)), _mm256_castpd_si256(magic));
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k_int, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(poly, _mm256_castsi256_pd(bits));
}

// 1 / (1 + exp(x))
inline __m256d logistic_complement_pd(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    return _mm256_div_pd(one, _mm256_add_pd(one, exp_pd(x)));
}

inline __m256d ipow_pd(__m256d base, int exponent) {
    __m256d result = _mm256_set1_pd(1.0);
    while (exponent > 0) {
        if (exponent & 1) {
            result = _mm256_mul_pd(result, base);
        }
        base = _mm256_mul_pd(base, base);
        exponent >>= 1;
    }
    return result;
}

inline double hsum_pd(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double expected_mixture_power(const MixtureShape& shape, std::span<const double> shifts,
                              std::span<const double> weights) {
    const __m256d alpha = _mm256_set1_pd(shape.alpha);
    const __m256d one_minus_alpha = _mm256_set1_pd(1.0 - shape.alpha);
    const __m256d beta = _mm256_set1_pd(shape.beta);
    const __m256d u_minus = _mm256_set1_pd(shape.u_minus);
    const __m256d u_plus = _mm256_set1_pd(shape.u_plus);

    auto lane = [&](__m256d xi, __m256d w, __m256d acc) {
        const __m256d rejective = logistic_complement_pd(_mm256_mul_pd(beta, _mm256_add_pd(u_minus, xi)));
        const __m256d receptive = logistic_complement_pd(_mm256_mul_pd(beta, _mm256_add_pd(u_plus, xi)));
        const __m256d mixture = _mm256_fmadd_pd(alpha, rejective, _mm256_mul_pd(one_minus_alpha, receptive));
        return _mm256_fmadd_pd(w, ipow_pd(mixture, shape.n), acc);
    };

    const std::size_t size = shifts.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= size; k += 4) {
        acc = lane(_mm256_loadu_pd(shifts.data() + k), _mm256_loadu_pd(weights.data() + k), acc);
    }
    if (k < size) {
        // Masked-off lanes load zero weight and contribute nothing.
        const auto remaining = static_cast<std::int64_t>(size - k);
        const __m256i mask = _mm256_cmpgt_epi64(_mm256_set1_epi64x(remaining), _mm256_setr_epi64x(0, 1, 2, 3));
        acc = lane(_mm256_maskload_pd(shifts.data() + k, mask), _mm256_maskload_pd(weights.data() + k, mask), acc);
    }
    return hsum_pd(acc);
}

}  // namespace pathfinder::kernels::avx2
