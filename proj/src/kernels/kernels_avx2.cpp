// AVX2+FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; callers reach it through the dispatch table.

#if defined(__x86_64__)

#include <immintrin.h>

#include "mca/kernels.hpp"

namespace mca::kernels::detail {

namespace {

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    __m128d swap = _mm_unpackhi_pd(s, s);
    return _mm_cvtsd_f64(_mm_add_sd(s, swap));
}

} // namespace

double sum_avx2(const double *x, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    }
    double tail = hsum(acc);
    for (; i < n; i++) {
        tail += x[i];
    }
    return tail;
}

double dot_avx2(const double *x, const double *y, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                              acc);
    }
    double tail = hsum(acc);
    for (; i < n; i++) {
        tail += x[i] * y[i];
    }
    return tail;
}

PearsonSums pearson_sums_avx2(const double *x, const double *y, std::size_t n,
                              double mean_x, double mean_y)
{
    const __m256d mx = _mm256_set1_pd(mean_x);
    const __m256d my = _mm256_set1_pd(mean_y);
    __m256d axy = _mm256_setzero_pd();
    __m256d axx = _mm256_setzero_pd();
    __m256d ayy = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), mx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), my);
        axy = _mm256_fmadd_pd(dx, dy, axy);
        axx = _mm256_fmadd_pd(dx, dx, axx);
        ayy = _mm256_fmadd_pd(dy, dy, ayy);
    }
    PearsonSums s;
    s.sxy = hsum(axy);
    s.sxx = hsum(axx);
    s.syy = hsum(ayy);
    for (; i < n; i++) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        s.sxy += dx * dy;
        s.sxx += dx * dx;
        s.syy += dy * dy;
    }
    return s;
}

void dist_sq_avx2(const double *const *dims, std::size_t d, const double *q,
                  std::size_t n, double *out)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_setzero_pd());
    }
    for (; i < n; i++) {
        out[i] = 0.0;
    }
    for (std::size_t j = 0; j < d; j++) {
        const double *col = dims[j];
        const __m256d qj = _mm256_set1_pd(q[j]);
        std::size_t k = 0;
        for (; k + 4 <= n; k += 4) {
            const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(col + k), qj);
            const __m256d acc = _mm256_loadu_pd(out + k);
            _mm256_storeu_pd(out + k, _mm256_fmadd_pd(diff, diff, acc));
        }
        for (; k < n; k++) {
            const double diff = col[k] - q[j];
            out[k] += diff * diff;
        }
    }
}

} // namespace mca::kernels::detail

#endif // __x86_64__
