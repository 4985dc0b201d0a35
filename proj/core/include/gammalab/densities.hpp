#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gammalab/kernel.hpp"
#include "gammalab/vec.hpp"

namespace gammalab {

/// Local energy density g(x, xi) with its declared growth constants
/// c0 |xi|^p <= g(x, xi) <= c1 |xi|^p + a0.
struct LocalDensity {
    using Value = std::function<double(const Vec& x, const Vec& xi)>;
    using Gradient = std::function<Vec(const Vec& x, const Vec& xi)>;
    /// g(x, xi + dxi) - g(x, xi) without cancellation.
    using Difference = std::function<double(const Vec& x, const Vec& xi, const Vec& dxi)>;

    std::string name;
    Value value;
    /// d g / d xi. When empty, central differences are used.
    Gradient gradient;
    /// When empty, the difference of two evaluations is used.
    Difference difference;
    double p = 2.0;
    double c0 = 1.0;
    double c1 = 1.0;
    double a0 = 0.0;
    /// Unit-cell periodic in x.
    bool periodic = false;

    double operator()(const Vec& x, const Vec& xi) const { return value(x, xi); }
    Vec grad_xi(const Vec& x, const Vec& xi) const;
    double change(const Vec& x, const Vec& xi, const Vec& dxi) const;
};

/// Nonlocal energy density f(x, y, z, tau), z = x - y, tau = u(x) - u(y), with the
/// kernel comparison C0 psi(z) |tau|^p / |z|^p <= f <= C1 psi(z) |tau|^p / |z|^p.
struct NonlocalDensity {
    using Value = std::function<double(const Vec& x, const Vec& y, const Vec& z, double tau)>;
    using Weight = std::function<double(const Vec& x)>;

    std::string name;
    Value value;
    /// d f / d tau. When empty, central differences are used.
    Value d_tau;
    std::shared_ptr<const KernelSpec> kernel;
    double p = 2.0;
    double C0 = 1.0;
    double C1 = 1.0;
    bool periodic = false;

    /// Set when f = 1/2 (w(x) + w(y)) psi(z) |tau|^p / |z|^p. The energy assembly
    /// then precomputes lattice weights instead of calling `value` per pair.
    /// An empty `weight` means w = 1.
    struct KernelPowerForm {
        Weight weight;
    };
    std::optional<KernelPowerForm> kernel_power;

    double operator()(const Vec& x, const Vec& y, const Vec& z, double tau) const {
        return value(x, y, z, tau);
    }
    double derivative_tau(const Vec& x, const Vec& y, const Vec& z, double tau) const;
};

using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

/// One parameter of a built-in density or kernel.
struct ParamSchema {
    std::string name;
    ParamValue default_value;
    std::string description;
};

struct BuiltinInfo {
    std::string name;
    std::string kind;  // "local", "nonlocal" or "kernel"
    std::string formula;
    std::vector<ParamSchema> params;
};

/// Catalog of built-in densities and kernels with parameter schemas.
const std::vector<BuiltinInfo>& builtin_catalog();

const BuiltinInfo& builtin_info(const std::string& name);

/// Unit-periodic bump prod_j (1 + cos(2 pi x_j)) / 2 with values in [0, 1].
double periodic_profile(const Vec& x, int dimension);

using Density = std::variant<LocalDensity, NonlocalDensity>;

/// Instantiates a built-in density. Unknown names or parameters throw InvalidParameter.
///
/// Local:    quadratic-local, double-well-1d, periodic-coefficient-local
/// Nonlocal: kernel-p-difference, periodic-kernel-p-difference
Density builtin_density(const std::string& name, const ParamMap& params = {});

LocalDensity builtin_local(const std::string& name, const ParamMap& params = {});
NonlocalDensity builtin_nonlocal(const std::string& name, const ParamMap& params = {});

/// Fills defaults and rejects unknown keys, returning the resolved parameter map.
ParamMap resolve_params(const std::string& name, const ParamMap& params);

}  // namespace gammalab
