#include "darklattice/kernels.hpp"

#include <immintrin.h>

// One __m256d holds two interleaved complex doubles (re0, im0, re1, im1).
namespace darklattice::kernels::avx2 {

namespace {

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

// a * (xr + i xi) for both lanes
inline __m256d cmul_bcast(__m256d a, __m256d xr, __m256d xi)
{
    const __m256d swapped = _mm256_permute_pd(a, 0b0101);
    return _mm256_fmaddsub_pd(a, xr, _mm256_mul_pd(swapped, xi));
}

inline double hsum(__m256d v)
{
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

} // namespace

void matvec(const cplx* A, std::size_t rows, std::size_t cols, std::size_t lda,
            const cplx* x, cplx* y)
{
    std::size_t i = 0;
    // Row blocks of 8 complex values held in registers across all columns.
    for (; i + 8 <= rows; i += 8) {
        __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
        __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
        for (std::size_t j = 0; j < cols; ++j) {
            const cplx* col = A + j * lda + i;
            const __m256d xr = _mm256_set1_pd(x[j].real());
            const __m256d xi = _mm256_set1_pd(x[j].imag());
            acc0 = _mm256_add_pd(acc0, cmul_bcast(load2(col), xr, xi));
            acc1 = _mm256_add_pd(acc1, cmul_bcast(load2(col + 2), xr, xi));
            acc2 = _mm256_add_pd(acc2, cmul_bcast(load2(col + 4), xr, xi));
            acc3 = _mm256_add_pd(acc3, cmul_bcast(load2(col + 6), xr, xi));
        }
        store2(y + i, acc0);
        store2(y + i + 2, acc1);
        store2(y + i + 4, acc2);
        store2(y + i + 6, acc3);
    }
    for (; i + 2 <= rows; i += 2) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t j = 0; j < cols; ++j) {
            const __m256d xr = _mm256_set1_pd(x[j].real());
            const __m256d xi = _mm256_set1_pd(x[j].imag());
            acc = _mm256_add_pd(acc, cmul_bcast(load2(A + j * lda + i), xr, xi));
        }
        store2(y + i, acc);
    }
    if (i < rows) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const cplx a = A[j * lda + i];
            acc += cplx(a.real() * x[j].real() - a.imag() * x[j].imag(),
                        a.imag() * x[j].real() + a.real() * x[j].imag());
        }
        y[i] = acc;
    }
}

void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y)
{
    const __m256d ar = _mm256_set1_pd(alpha.real());
    const __m256d ai = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        store2(y + i, _mm256_add_pd(load2(y + i), cmul_bcast(load2(x + i), ar, ai)));
    for (; i < n; ++i)
        y[i] += alpha * x[i];
}

cplx dotc(std::size_t n, const cplx* x, const cplx* y)
{
    // conj(x) y = (xr yr + xi yi) + i (xr yi - xi yr)
    __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(x + i), yv = load2(y + i);
        re = _mm256_fmadd_pd(xv, yv, re);
        im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0b0101), im);
    }
    // re lanes: xr*yr, xi*yi -> summed. im lanes: xr*yi, xi*yr -> alternate signs.
    const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
    cplx s(hsum(re), hsum(_mm256_mul_pd(im, sign)));
    for (; i < n; ++i)
        s += std::conj(x[i]) * y[i];
    return s;
}

double norm2(std::size_t n, const cplx* x)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = load2(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i)
        s += std::norm(x[i]);
    return s;
}

} // namespace darklattice::kernels::avx2
