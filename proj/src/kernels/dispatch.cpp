#include <cstdlib>
#include <cstring>

#include "manakov/kernels.hpp"

namespace manakov::kernels {

#if !defined(MANAKOV_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif

const KernelTable& active() {
    static const KernelTable* table = [] {
        const char* env = std::getenv("MANAKOV_SIMD");
        if (env && std::strcmp(env, "scalar") == 0) return &scalar_table();
        if (const KernelTable* t = avx2_table()) return t;
        return &scalar_table();
    }();
    return *table;
}

}  // namespace manakov::kernels
