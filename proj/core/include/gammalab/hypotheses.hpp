#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gammalab/densities.hpp"

namespace gammalab {

/// How `validate_growth` draws its samples.
struct SamplingPlan {
    std::size_t count = 10000;
    /// x and y are drawn from [0, x_extent]^d.
    double x_extent = 2.0;
    /// Components of xi are drawn from [-xi_range, xi_range].
    double xi_range = 5.0;
    /// tau is drawn from [-tau_range, tau_range].
    double tau_range = 5.0;
    /// z is drawn from the ball of this radius (values > 1 probe the support condition).
    double z_radius = 1.5;
    int dimension = 1;
    std::uint64_t seed = 1;
    /// Relative slack absorbing rounding in the inequalities.
    double rel_tol = 1e-12;
};

struct ConditionResult {
    std::string name;
    std::string statement;
    bool pass = true;
    std::size_t violations = 0;
    /// Arguments of the worst violating sample, formatted; empty when passing.
    std::string worst_sample;
    double violation = 0.0;
};

struct HypothesisReport {
    std::string density;
    std::vector<ConditionResult> conditions;
    std::size_t sample_count = 0;

    bool all_pass() const;
    const ConditionResult* find(const std::string& name) const;
};

/// Samples the two-sided growth bound, nonnegativity and periodicity of a local density.
HypothesisReport validate_growth(const LocalDensity& g, const SamplingPlan& plan);

/// Samples the kernel comparison bounds, nonnegativity, compact support and
/// periodicity of a nonlocal density.
HypothesisReport validate_growth(const NonlocalDensity& f, const SamplingPlan& plan);

HypothesisReport validate_growth(const Density& density, const SamplingPlan& plan);

}  // namespace gammalab
