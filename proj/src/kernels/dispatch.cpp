#include "tpms/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace tpms::kernels {

#ifdef TPMS_HAVE_AVX2_KERNELS
const KernelTable& avx2_table_impl();
#endif

const KernelTable* avx2_table()
{
#ifdef TPMS_HAVE_AVX2_KERNELS
    return &avx2_table_impl();
#else
    return nullptr;
#endif
}

bool cpu_supports_avx2()
{
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable& select()
{
    if (const char* env = std::getenv("TPMS_CPIA_SIMD")) {
        if (std::string_view(env) == "scalar")
            return scalar_table();
    }
    if (const KernelTable* simd = avx2_table(); simd != nullptr && cpu_supports_avx2())
        return *simd;
    return scalar_table();
}

}  // namespace

const KernelTable& active()
{
    static const KernelTable& table = select();
    return table;
}

}  // namespace tpms::kernels
