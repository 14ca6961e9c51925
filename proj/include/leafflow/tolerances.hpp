#ifndef LEAFFLOW_TOLERANCES_HPP
#define LEAFFLOW_TOLERANCES_HPP

namespace leafflow {

// Discretization slack for the theorem monitors.  The continuum bounds are
// exact; the discrete run carries first-order-in-dt and second-order-in-h
// defects.  Constants calibrated by refinement on the randomized scenario
// family (see tests/test_heatflow.cpp).

// Envelope monitor: violations <= kEnvelopeAbsTol + kEnvelopeSlackDt*dt
//                                 + kEnvelopeSlackH2*h^2.
inline constexpr double kEnvelopeAbsTol = 1e-8;
inline constexpr double kEnvelopeSlackDt = 150.0;
inline constexpr double kEnvelopeSlackH2 = 10.0;

// Burgers residual: max residual <= kBurgersSlackDt*dt + kBurgersSlackH2*h^2
// for unit-scale scenarios.
inline constexpr double kBurgersSlackDt = 400.0;
inline constexpr double kBurgersSlackH2 = 60.0;

// Conservation monitors.
inline constexpr double kConservationTol = 1e-6;

// Fitted decay rates against the spectral bound.
inline constexpr double kRateLowerFactor = 0.9;
inline constexpr double kRateUpperFactor = 1.5;

// Mean curvature asymptote of the running metric.
inline constexpr double kCurvatureLimitTol = 1e-4;

}  // namespace leafflow

#endif
