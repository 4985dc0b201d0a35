#include "gammalab/densities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gammalab/error.hpp"

namespace gammalab {

Vec LocalDensity::grad_xi(const Vec& x, const Vec& xi) const {
    if (gradient) return gradient(x, xi);
    Vec out{0.0, 0.0};
    for (int c = 0; c < 2; ++c) {
        const double step = 1e-6 * (1.0 + std::abs(xi[c]));
        Vec plus = xi, minus = xi;
        plus[c] += step;
        minus[c] -= step;
        out[c] = (value(x, plus) - value(x, minus)) / (plus[c] - minus[c]);
    }
    return out;
}

double LocalDensity::change(const Vec& x, const Vec& xi, const Vec& dxi) const {
    if (difference) return difference(x, xi, dxi);
    return value(x, xi + dxi) - value(x, xi);
}

double NonlocalDensity::derivative_tau(const Vec& x, const Vec& y, const Vec& z, double tau) const {
    if (d_tau) return d_tau(x, y, z, tau);
    const double step = 1e-6 * (1.0 + std::abs(tau));
    return (value(x, y, z, tau + step) - value(x, y, z, tau - step)) / (2.0 * step);
}

double periodic_profile(const Vec& x, int dimension) {
    using std::numbers::pi;
    double out = 1.0;
    for (int c = 0; c < dimension; ++c) out *= 0.5 * (1.0 + std::cos(2.0 * pi * x[c]));
    return out;
}

const std::vector<BuiltinInfo>& builtin_catalog() {
    static const std::vector<BuiltinInfo> catalog{
        {"quadratic-local", "local", "g(x, xi) = coefficient |xi|^2",
         {{"coefficient", 1.0, "positive multiplier"}}},
        {"double-well-1d", "local", "g(xi) = min{(xi-1)^2, (xi+1)^2} + delta xi^2 (radial |xi| in 2D)",
         {{"delta", 0.1, "coercivity term, > 0"}}},
        {"periodic-coefficient-local", "local",
         "g(x, xi) = a(x) |xi|^p, a = a_min + (a_max - a_min) prod_j (1 + cos 2 pi x_j)/2",
         {{"a_min", 1.0, "minimum of a, > 0"},
          {"a_max", 2.0, "maximum of a, >= a_min"},
          {"p", 2.0, "growth exponent, > 1"}}},
        {"kernel-p-difference", "nonlocal", "f(x, y, z, tau) = psi(z) |tau|^p / |z|^p",
         {{"kernel", std::string("uniform"), "kernel profile name"},
          {"dimension", 1.0, "space dimension, 1 or 2"},
          {"p", 2.0, "growth exponent, > 1"}}},
        {"periodic-kernel-p-difference", "nonlocal",
         "f(x, y, z, tau) = (b(x) + b(y))/2 psi(z) |tau|^p / |z|^p, b = b_min + (b_max - b_min) prod_j (1 + cos 2 pi x_j)/2",
         {{"kernel", std::string("uniform"), "kernel profile name"},
          {"dimension", 1.0, "space dimension, 1 or 2"},
          {"p", 2.0, "growth exponent, > 1"},
          {"b_min", 1.0, "minimum of b, > 0"},
          {"b_max", 2.0, "maximum of b, >= b_min"}}},
        {"uniform", "kernel", "psi(r) = 1/2 (1D), 1/pi (2D)", {}},
        {"triangle", "kernel", "psi(r) = (1 - r) (1D), 3/pi (1 - r) (2D)", {}},
        {"epanechnikov", "kernel", "psi(r) = 3/4 (1 - r^2) (1D), 2/pi (1 - r^2) (2D)", {}},
    };
    return catalog;
}

const BuiltinInfo& builtin_info(const std::string& name) {
    for (const auto& info : builtin_catalog())
        if (info.name == name) return info;
    throw InvalidParameter("unknown built-in '" + name + "'");
}

ParamMap resolve_params(const std::string& name, const ParamMap& params) {
    const BuiltinInfo& info = builtin_info(name);
    ParamMap out;
    for (const auto& schema : info.params) out[schema.name] = schema.default_value;
    for (const auto& [key, value] : params) {
        auto it = out.find(key);
        if (it == out.end()) throw InvalidParameter("built-in '" + name + "' has no parameter '" + key + "'");
        if (value.index() != it->second.index())
            throw InvalidParameter("parameter '" + key + "' of '" + name + "' has the wrong type");
        it->second = value;
    }
    return out;
}

namespace {

double number(const ParamMap& params, const std::string& key) { return std::get<double>(params.at(key)); }

std::string text(const ParamMap& params, const std::string& key) { return std::get<std::string>(params.at(key)); }

void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidParameter(message);
}

int dimension_of(const ParamMap& params) {
    const double d = number(params, "dimension");
    require(d == 1.0 || d == 2.0, "dimension must be 1 or 2");
    return static_cast<int>(d);
}

NonlocalDensity kernel_power_density(const std::string& name, const ParamMap& params, bool periodic) {
    const double p = number(params, "p");
    require(p > 1.0, "p must be > 1");
    auto kernel = std::make_shared<const KernelSpec>(KernelSpec::builtin(text(params, "kernel"), dimension_of(params)));

    NonlocalDensity f;
    f.name = name;
    f.kernel = kernel;
    f.p = p;
    f.periodic = periodic;

    NonlocalDensity::Weight weight;
    if (periodic) {
        const double b_min = number(params, "b_min");
        const double b_max = number(params, "b_max");
        require(b_min > 0.0 && b_max >= b_min, "need 0 < b_min <= b_max");
        const int d = kernel->dimension();
        weight = [b_min, b_max, d](const Vec& x) { return b_min + (b_max - b_min) * periodic_profile(x, d); };
        f.C0 = b_min;
        f.C1 = b_max;
    } else {
        f.C0 = 1.0;
        f.C1 = 1.0;
    }

    f.value = [kernel, p, weight](const Vec& x, const Vec& y, const Vec& z, double tau) {
        const double r = norm(z);
        if (r == 0.0) return 0.0;
        const double psi = kernel->profile(r);
        if (psi == 0.0) return 0.0;
        const double c = weight ? 0.5 * (weight(x) + weight(y)) : 1.0;
        return c * psi * abs_pow(tau, p) / abs_pow(r, p);
    };
    f.d_tau = [kernel, p, weight](const Vec& x, const Vec& y, const Vec& z, double tau) {
        const double r = norm(z);
        if (r == 0.0) return 0.0;
        const double psi = kernel->profile(r);
        if (psi == 0.0) return 0.0;
        const double c = weight ? 0.5 * (weight(x) + weight(y)) : 1.0;
        return c * psi * abs_pow_derivative(tau, p) / abs_pow(r, p);
    };
    f.kernel_power = NonlocalDensity::KernelPowerForm{weight};
    return f;
}

}  // namespace

LocalDensity builtin_local(const std::string& name, const ParamMap& raw) {
    const ParamMap params = resolve_params(name, raw);
    LocalDensity g;
    g.name = name;
    if (name == "quadratic-local") {
        const double c = number(params, "coefficient");
        require(c > 0.0, "coefficient must be > 0");
        g.value = [c](const Vec&, const Vec& xi) { return c * dot(xi, xi); };
        g.gradient = [c](const Vec&, const Vec& xi) { return scaled(xi, 2.0 * c); };
        g.difference = [c](const Vec&, const Vec& xi, const Vec& dxi) { return c * norm_pow_change(xi, dxi, 2.0); };
        g.p = 2.0;
        g.c0 = c;
        g.c1 = c;
        g.a0 = 0.0;
        return g;
    }
    if (name == "double-well-1d") {
        const double delta = number(params, "delta");
        require(delta > 0.0, "delta must be > 0");
        g.value = [delta](const Vec&, const Vec& xi) {
            const double r = norm(xi);
            return (r - 1.0) * (r - 1.0) + delta * r * r;
        };
        g.gradient = [delta](const Vec&, const Vec& xi) {
            const double r = norm(xi);
            // At xi = 0 both wells tie; the symmetric choice of subgradient is 0.
            const double radial = r > 0.0 ? 2.0 * (r - 1.0) / r : 0.0;
            return scaled(xi, radial + 2.0 * delta);
        };
        g.difference = [delta](const Vec&, const Vec& xi, const Vec& dxi) {
            // g = (1 + delta) r^2 - 2 r + 1.
            const double sq = norm_pow_change(xi, dxi, 2.0);
            const double sum = norm(xi) + norm(xi + dxi);
            const double dr = sum > 0.0 ? sq / sum : 0.0;
            return (1.0 + delta) * sq - 2.0 * dr;
        };
        g.p = 2.0;
        g.c0 = delta;
        g.c1 = 1.0 + delta;
        g.a0 = 1.0;
        return g;
    }
    if (name == "periodic-coefficient-local") {
        const double a_min = number(params, "a_min");
        const double a_max = number(params, "a_max");
        const double p = number(params, "p");
        require(a_min > 0.0 && a_max >= a_min, "need 0 < a_min <= a_max");
        require(p > 1.0, "p must be > 1");
        auto a = [a_min, a_max](const Vec& x) { return a_min + (a_max - a_min) * periodic_profile(x, 2); };
        g.value = [a, p](const Vec& x, const Vec& xi) { return a(x) * abs_pow(norm(xi), p); };
        g.gradient = [a, p](const Vec& x, const Vec& xi) {
            const double r = norm(xi);
            if (r == 0.0) return Vec{0.0, 0.0};
            return scaled(xi, a(x) * abs_pow_derivative(r, p) / r);
        };
        g.difference = [a, p](const Vec& x, const Vec& xi, const Vec& dxi) {
            return a(x) * norm_pow_change(xi, dxi, p);
        };
        g.p = p;
        g.c0 = a_min;
        g.c1 = a_max;
        g.a0 = 0.0;
        g.periodic = true;
        return g;
    }
    throw InvalidParameter("'" + name + "' is not a built-in local density");
}

NonlocalDensity builtin_nonlocal(const std::string& name, const ParamMap& raw) {
    const ParamMap params = resolve_params(name, raw);
    if (name == "kernel-p-difference") return kernel_power_density(name, params, false);
    if (name == "periodic-kernel-p-difference") return kernel_power_density(name, params, true);
    throw InvalidParameter("'" + name + "' is not a built-in nonlocal density");
}

Density builtin_density(const std::string& name, const ParamMap& params) {
    const BuiltinInfo& info = builtin_info(name);
    if (info.kind == "local") return builtin_local(name, params);
    if (info.kind == "nonlocal") return builtin_nonlocal(name, params);
    throw InvalidParameter("'" + name + "' is a kernel, not a density");
}

}  // namespace gammalab
