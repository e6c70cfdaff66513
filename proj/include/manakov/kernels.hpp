#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace manakov::kernels {

using cplx = std::complex<double>;

/// Data-parallel inner loops shared by the Cauchy operators. Every entry has a
/// scalar reference implementation; a vectorized table is selected at runtime
/// when the CPU supports it.
struct KernelTable {
    std::string_view name;

    /// out[f * nt + t] += sum_j q[f * ns + j] / (src[j] - tgt[t]) for f < nfun.
    void (*cauchy_sum)(const cplx* tgt, std::size_t nt, const cplx* src, std::size_t ns,
                       const cplx* q, std::size_t nfun, cplx* out);

    /// out[k] = a[k] * b[k].
    void (*cmul)(const cplx* a, const cplx* b, cplx* out, std::size_t n);

    /// y = A x, A row-major m x n.
    void (*matvec)(const cplx* a, std::size_t m, std::size_t n, const cplx* x, cplx* y);
};

const KernelTable& scalar_table();
/// nullptr when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// Table chosen once per process: AVX2 when available unless the environment
/// variable MANAKOV_SIMD=scalar forces the reference path.
const KernelTable& active();

inline void cauchy_sum(std::span<const cplx> tgt, std::span<const cplx> src, std::span<const cplx> q,
                       std::size_t nfun, std::span<cplx> out) {
    active().cauchy_sum(tgt.data(), tgt.size(), src.data(), src.size(), q.data(), nfun, out.data());
}

inline void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
    active().cmul(a.data(), b.data(), out.data(), out.size());
}

}  // namespace manakov::kernels
