#include <atomic>
#include <cstdlib>
#include <string>

#include "pathfinder/error.hpp"
#include "pathfinder/kernels.hpp"

namespace pathfinder::kernels {

namespace {

Isa initial_isa() noexcept {
    const char* env = std::getenv("PATHFINDER_ISA");
    if (env != nullptr) {
        const std::string_view requested(env);
        if (requested == "scalar") {
            return Isa::scalar;
        }
        if (requested == "avx2" && isa_available(Isa::avx2)) {
            return Isa::avx2;
        }
    }
    return detected_isa();
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(PATHFINDER_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

Isa detected_isa() noexcept { return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    require(isa_available(isa), ErrorCode::invalid_argument,
            "kernel variant '" + std::string(to_string(isa)) + "' is not available on this machine");
    active().store(isa, std::memory_order_relaxed);
}

double expected_mixture_power(const MixtureShape& shape, std::span<const double> shifts,
                              std::span<const double> weights) {
    require(shifts.size() == weights.size(), ErrorCode::invalid_argument,
            "quadrature shifts and weights differ in length");
#if defined(PATHFINDER_HAVE_AVX2)
    if (active_isa() == Isa::avx2) {
        return avx2::expected_mixture_power(shape, shifts, weights);
    }
#endif
    return scalar::expected_mixture_power(shape, shifts, weights);
}

}  // namespace pathfinder::kernels
