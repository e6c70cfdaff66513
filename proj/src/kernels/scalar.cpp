#include "manakov/kernels.hpp"

namespace manakov::kernels {
namespace {

void cauchy_sum_scalar(const cplx* tgt, std::size_t nt, const cplx* src, std::size_t ns,
                       const cplx* q, std::size_t nfun, cplx* out) {
    for (std::size_t t = 0; t < nt; ++t) {
        for (std::size_t f = 0; f < nfun; ++f) {
            const cplx* qf = q + f * ns;
            double re = 0.0, im = 0.0;
            for (std::size_t j = 0; j < ns; ++j) {
                const double dr = src[j].real() - tgt[t].real();
                const double di = src[j].imag() - tgt[t].imag();
                const double inv = 1.0 / (dr * dr + di * di);
                // q / d = q * conj(d) / |d|^2
                re += (qf[j].real() * dr + qf[j].imag() * di) * inv;
                im += (qf[j].imag() * dr - qf[j].real() * di) * inv;
            }
            out[f * nt + t] += cplx(re, im);
        }
    }
}

void cmul_scalar(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double re = a[k].real() * b[k].real() - a[k].imag() * b[k].imag();
        const double im = a[k].real() * b[k].imag() + a[k].imag() * b[k].real();
        out[k] = cplx(re, im);
    }
}

void matvec_scalar(const cplx* a, std::size_t m, std::size_t n, const cplx* x, cplx* y) {
    for (std::size_t i = 0; i < m; ++i) {
        const cplx* row = a + i * n;
        double re = 0.0, im = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            re += row[j].real() * x[j].real() - row[j].imag() * x[j].imag();
            im += row[j].real() * x[j].imag() + row[j].imag() * x[j].real();
        }
        y[i] = cplx(re, im);
    }
}

const KernelTable kScalar{"scalar", &cauchy_sum_scalar, &cmul_scalar, &matvec_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace manakov::kernels
