#pragma once

// Data-parallel inner loop of the noisy worst-case analysis.
//
// expected_mixture_power evaluates
//
//     sum_k  w_k * ( alpha * rho(beta*(u_minus + xi_k)) + (1-alpha) * rho(beta*(u_plus + xi_k)) )^n
//
// with rho(x) = 1/(1+exp(x)), i.e. a quadrature of the all-reject
// probability over a shared utility shift xi. The scalar variant is the
// reference; the AVX2 variant is selected at runtime when the CPU supports
// AVX2+FMA and must agree with the reference to ~1e-13 relative.

#include <span>
#include <string_view>

namespace pathfinder::kernels {

struct MixtureShape {
    double alpha;
    double beta;
    double u_minus;
    double u_plus;
    int n;
};

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Best variant both compiled in and supported by this CPU.
Isa detected_isa() noexcept;

/// Variant used by expected_mixture_power. Starts as PATHFINDER_ISA
/// (scalar|avx2|auto) when set, otherwise detected_isa().
Isa active_isa() noexcept;

/// Throws invalid_argument when `isa` is not available on this machine.
void set_active_isa(Isa isa);

bool isa_available(Isa isa) noexcept;

class ScopedIsa {
public:
    explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
    ~ScopedIsa() { set_active_isa(previous_); }
    ScopedIsa(const ScopedIsa&) = delete;
    ScopedIsa& operator=(const ScopedIsa&) = delete;

private:
    Isa previous_;
};

/// Dispatches to the active variant. shifts and weights must have equal size.
double expected_mixture_power(const MixtureShape& shape, std::span<const double> shifts,
                              std::span<const double> weights);

namespace scalar {
double expected_mixture_power(const MixtureShape& shape, std::span<const double> shifts,
                              std::span<const double> weights);
}

#if defined(PATHFINDER_HAVE_AVX2)
namespace avx2 {
double expected_mixture_power(const MixtureShape& shape, std::span<const double> shifts,
                              std::span<const double> weights);
}
#endif

}  // namespace pathfinder::kernels
