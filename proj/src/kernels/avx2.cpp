#include <immintrin.h>

#include "manakov/kernels.hpp"

namespace manakov::kernels {
namespace {

// Two complex doubles per register, interleaved [re0, im0, re1, im1].

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }

void cauchy_sum_avx2(const cplx* tgt, std::size_t nt, const cplx* src, std::size_t ns,
                     const cplx* q, std::size_t nfun, cplx* out) {
    const std::size_t npair = ns / 2;
    for (std::size_t t = 0; t < nt; ++t) {
        const __m256d tv = _mm256_setr_pd(tgt[t].real(), tgt[t].imag(), tgt[t].real(), tgt[t].imag());
        for (std::size_t f = 0; f < nfun; ++f) {
            const cplx* qf = q + f * ns;
            __m256d acc_re = _mm256_setzero_pd();
            __m256d acc_im = _mm256_setzero_pd();
            for (std::size_t p = 0; p < npair; ++p) {
                const __m256d d = _mm256_sub_pd(load2(src + 2 * p), tv);
                const __m256d n = _mm256_hadd_pd(_mm256_mul_pd(d, d), _mm256_mul_pd(d, d));
                const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), n);
                const __m256d qv = _mm256_mul_pd(load2(qf + 2 * p), inv);
                acc_re = _mm256_fmadd_pd(qv, d, acc_re);
                acc_im = _mm256_fmadd_pd(qv, _mm256_permute_pd(d, 0x5), acc_im);
            }
            alignas(32) double r[4], i[4];
            _mm256_store_pd(r, acc_re);
            _mm256_store_pd(i, acc_im);
            double re = r[0] + r[1] + r[2] + r[3];
            double im = (i[1] - i[0]) + (i[3] - i[2]);
            if (ns % 2) {
                const std::size_t j = ns - 1;
                const double dr = src[j].real() - tgt[t].real();
                const double di = src[j].imag() - tgt[t].imag();
                const double inv = 1.0 / (dr * dr + di * di);
                re += (qf[j].real() * dr + qf[j].imag() * di) * inv;
                im += (qf[j].imag() * dr - qf[j].real() * di) * inv;
            }
            out[f * nt + t] += cplx(re, im);
        }
    }
}

inline __m256d cmul2(__m256d a, __m256d b) {
    const __m256d ar = _mm256_movedup_pd(a);
    const __m256d ai = _mm256_permute_pd(a, 0xF);
    return _mm256_fmaddsub_pd(ar, b, _mm256_mul_pd(ai, _mm256_permute_pd(b, 0x5)));
}

void cmul_avx2(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2)
        _mm256_storeu_pd(reinterpret_cast<double*>(out + k), cmul2(load2(a + k), load2(b + k)));
    for (; k < n; ++k) out[k] = a[k] * b[k];
}

void matvec_avx2(const cplx* a, std::size_t m, std::size_t n, const cplx* x, cplx* y) {
    for (std::size_t i = 0; i < m; ++i) {
        const cplx* row = a + i * n;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            acc0 = _mm256_add_pd(acc0, cmul2(load2(row + j), load2(x + j)));
            acc1 = _mm256_add_pd(acc1, cmul2(load2(row + j + 2), load2(x + j + 2)));
        }
        for (; j + 2 <= n; j += 2) acc0 = _mm256_add_pd(acc0, cmul2(load2(row + j), load2(x + j)));
        alignas(32) double r[4];
        _mm256_store_pd(r, _mm256_add_pd(acc0, acc1));
        cplx s(r[0] + r[2], r[1] + r[3]);
        for (; j < n; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

const KernelTable kAvx2{"avx2", &cauchy_sum_avx2, &cmul_avx2, &matvec_avx2};

}  // namespace

const KernelTable* avx2_table() {
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok ? &kAvx2 : nullptr;
}

}  // namespace manakov::kernels
