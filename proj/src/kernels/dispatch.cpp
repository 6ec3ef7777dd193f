#include "venomguard/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace vg::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops& active() {
    static const Ops* resolved = [] {
        const char* force = std::getenv("VENOMGUARD_ISA");
        if (force && std::strcmp(force, "scalar") == 0) return &scalar_ops();
        if (force && std::strcmp(force, "avx2") == 0 && avx2_available()) return &avx2_ops();
        return avx2_available() ? &avx2_ops() : &scalar_ops();
    }();
    return *resolved;
}

}  // namespace vg::kernels
