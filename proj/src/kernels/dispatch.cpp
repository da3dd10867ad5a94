#include "gwq/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace gwq::kernels {

#if GWQ_HAVE_AVX2
const Ops& avx2_ops();
#endif

namespace {

bool cpu_has_avx2() {
#if GWQ_HAVE_AVX2
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool env_forces_scalar() {
    const char* v = std::getenv("GWQ_FORCE_SCALAR");
    return v && v[0] != '\0' && !(v[0] == '0' && v[1] == '\0');
}

std::atomic<bool>& scalar_flag() {
    static std::atomic<bool> flag{env_forces_scalar()};
    return flag;
}

} // namespace

bool avx2_available() {
    static const bool ok = cpu_has_avx2();
    return ok;
}

void force_scalar(bool on) {
    scalar_flag().store(on, std::memory_order_relaxed);
}

const Ops& active() {
#if GWQ_HAVE_AVX2
    if (avx2_available() && !scalar_flag().load(std::memory_order_relaxed))
        return avx2_ops();
#endif
    return scalar();
}

} // namespace gwq::kernels
