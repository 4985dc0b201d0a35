#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gammalab/vec.hpp"

namespace gammalab {

/// Radial kernel profile psi(r) supported on the closed unit ball of R^d.
///
/// The profile is evaluated at r = |z| and treated as zero for r > 1. A small
/// relative slack absorbs rounding when lattice offsets land on the sphere
/// |k z| = 1 (such points are evaluated at r = 1).
class KernelSpec {
public:
    using Profile = std::function<double(double)>;

    KernelSpec(std::string name, int dimension, Profile profile, double nominal_mass = 1.0);

    /// Piecewise-linear profile through equally spaced samples on [0, 1].
    /// With `normalize` the samples are rescaled so that the kernel mass is 1.
    static KernelSpec tabulated(std::vector<double> samples, int dimension, bool normalize = true);

    /// Built-in profiles: "uniform", "triangle", "epanechnikov". All unit mass.
    static KernelSpec builtin(const std::string& name, int dimension);

    static const std::vector<std::string>& builtin_names();

    const std::string& name() const noexcept { return name_; }
    int dimension() const noexcept { return dimension_; }
    double nominal_mass() const noexcept { return nominal_mass_; }

    /// Profile value at radius r; zero outside [0, 1].
    double profile(double r) const;

    /// psi(z) = profile(|z|).
    double operator()(const Vec& z) const { return profile(norm(z)); }

    /// Sampled supremum of the profile on [0, 1].
    double sup() const noexcept { return sup_; }

    /// Tabulated samples when built by `tabulated`, empty otherwise.
    const std::vector<double>& samples() const noexcept { return samples_; }

private:
    std::string name_;
    int dimension_;
    Profile profile_;
    double nominal_mass_;
    double sup_ = 0.0;
    std::vector<double> samples_;
};

/// Slack for the support test r <= 1.
inline constexpr double kSupportSlack = 1e-12;

/// k^d psi(k z); zero when |k z| > 1. Throws InvalidParameter for k <= 0.
double eval_scaled_kernel(const KernelSpec& kernel, double k, const Vec& z);

}  // namespace gammalab
