#pragma once

namespace infothermo {

/// Numerical tolerances shared by the library and its tests.
struct NumericalPolicy {
    double validation = 1e-10;    ///< Hermiticity, positivity, trace checks
    double identity_check = 1e-8; ///< agreement between two routes to the same quantity
    double povm_completeness = 1e-9;
    double probability_sum = 1e-9;
    double support_zero = 1e-12;  ///< eigenvalues below this are treated as exactly zero
    double log_clamp = 1e-14;     ///< 0 ln 0 := 0 below this
    double bound_margin = 1e-8;   ///< BoundReport satisfied <=> margin >= -bound_margin
    double residual_margin = 1e-6;///< margin tolerance for protocols with an erasure residual
    double max_energy = 50.0;     ///< level cap during raise schedules, in units of T
};

inline constexpr NumericalPolicy policy{};

} // namespace infothermo
