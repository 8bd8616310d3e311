#include <cmath>

#include "pathfinder/kernels.hpp"
#include "pathfinder/numeric.hpp"

namespace pathfinder::kernels::scalar {

double expected_mixture_power(const MixtureShape& shape, std::span<const double> shifts,
                              std::span<const double> weights) {
    double total = 0.0;
    for (std::size_t k = 0; k < shifts.size(); ++k) {
        const double rejective = logistic_complement(shape.beta * (shape.u_minus + shifts[k]));
        const double receptive = logistic_complement(shape.beta * (shape.u_plus + shifts[k]));
        const double mixture = shape.alpha * rejective + (1.0 - shape.alpha) * receptive;
        total += weights[k] * std::pow(mixture, shape.n);
    }
    return total;
}

}  // namespace pathfinder::kernels::scalar
