#ifndef LEAFFLOW_TEST_HELPERS_HPP
#define LEAFFLOW_TEST_HELPERS_HPP

#include <cmath>
#include <random>
#include <vector>

#include "leafflow/leafgrid.hpp"

namespace leafflow::testing {

/// Random band-limited field on a periodic 1D grid: sum of modes k <= kmax
/// with 1/k^2 coefficient decay.  Deterministic for a fixed seed.
inline ScalarField random_smooth(const GridPtr& grid, uint64_t seed, int kmax = 5,
                                 double amplitude = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::vector<double> a(kmax + 1), b(kmax + 1);
    for (int k = 1; k <= kmax; ++k) {
        a[k] = coeff(rng) / (k * k);
        b[k] = coeff(rng) / (k * k);
    }
    const double w = 2.0 * M_PI / grid->length_x();
    return ScalarField::from_function(grid, [&](double x, double) {
        double v = 0.0;
        for (int k = 1; k <= kmax; ++k)
            v += a[k] * std::cos(k * w * x) + b[k] * std::sin(k * w * x);
        return amplitude * v;
    });
}

/// Random smooth strictly positive field: base + bounded perturbation.
inline ScalarField random_positive(const GridPtr& grid, uint64_t seed, double base = 1.0,
                                   double amplitude = 0.3, int kmax = 4) {
    ScalarField f = random_smooth(grid, seed, kmax, amplitude);
    return map_field(f, [&](double v) { return base + v; });
}

/// Random smooth nonnegative field with the stated maximum.
inline ScalarField random_nonnegative(const GridPtr& grid, uint64_t seed, double max_value,
                                      int kmax = 4) {
    ScalarField f = random_smooth(grid, seed, kmax, 1.0);
    auto [lo, hi] = field_extrema(f);
    const double span = hi - lo;
    if (span <= 0.0) return ScalarField(grid, max_value);
    return map_field(f, [&](double v) { return (v - lo) / span * max_value; });
}

}  // namespace leafflow::testing

#endif
