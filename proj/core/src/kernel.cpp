#include "gammalab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gammalab/error.hpp"
#include "gammalab/quadrature.hpp"

namespace gammalab {

namespace {

void check_dimension(int d) {
    if (d != 1 && d != 2) throw InvalidParameter("kernel dimension must be 1 or 2, got " + std::to_string(d));
}

}  // namespace

KernelSpec::KernelSpec(std::string name, int dimension, Profile profile, double nominal_mass)
    : name_(std::move(name)), dimension_(dimension), profile_(std::move(profile)), nominal_mass_(nominal_mass) {
    check_dimension(dimension);
    if (!profile_) throw InvalidParameter("kernel '" + name_ + "' has no profile");
    constexpr int kProbe = 2048;
    for (int i = 0; i <= kProbe; ++i) {
        const double v = profile_(static_cast<double>(i) / kProbe);
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidParameter("kernel '" + name_ + "' profile must be finite and nonnegative on [0, 1]");
        sup_ = std::max(sup_, v);
    }
    const double mass = kernel_mass(*this);
    if (std::abs(mass - nominal_mass_) > 1e-6 * std::max(1.0, std::abs(nominal_mass_)))
        throw InvalidParameter("kernel '" + name_ + "' mass " + std::to_string(mass) +
                               " differs from nominal mass " + std::to_string(nominal_mass_));
}

KernelSpec KernelSpec::tabulated(std::vector<double> samples, int dimension, bool normalize) {
    check_dimension(dimension);
    if (samples.size() < 2) throw InvalidParameter("tabulated kernel needs at least two samples");
    for (double s : samples)
        if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidParameter("tabulated kernel samples must be finite and >= 0");

    auto interp = [](const std::vector<double>& table) {
        return [table](double r) {
            const double pos = r * static_cast<double>(table.size() - 1);
            const auto i = std::min(static_cast<std::size_t>(pos), table.size() - 2);
            const double t = pos - static_cast<double>(i);
            return table[i] + t * (table[i + 1] - table[i]);
        };
    };

    // Mass of the raw table, evaluated with the same ball rule the checks use.
    const QuadratureRule rule = ball_rule(dimension);
    auto raw = interp(samples);
    double mass = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) mass += rule.weights[q] * raw(norm(rule.nodes[q]));
    if (!(mass > 0.0)) throw InvalidParameter("tabulated kernel has zero mass");
    if (normalize) {
        for (double& s : samples) s /= mass;
        mass = 1.0;
    }
    KernelSpec spec("tabulated", dimension, interp(samples), normalize ? 1.0 : mass);
    spec.samples_ = std::move(samples);
    return spec;
}

KernelSpec KernelSpec::builtin(const std::string& name, int dimension) {
    check_dimension(dimension);
    using std::numbers::pi;
    if (name == "uniform") {
        const double c = dimension == 1 ? 0.5 : 1.0 / pi;
        return KernelSpec(name, dimension, [c](double) { return c; });
    }
    if (name == "triangle") {
        const double c = dimension == 1 ? 1.0 : 3.0 / pi;
        return KernelSpec(name, dimension, [c](double r) { return c * (1.0 - r); });
    }
    if (name == "epanechnikov") {
        const double c = dimension == 1 ? 0.75 : 2.0 / pi;
        return KernelSpec(name, dimension, [c](double r) { return c * (1.0 - r * r); });
    }
    throw InvalidParameter("unknown kernel '" + name + "'");
}

const std::vector<std::string>& KernelSpec::builtin_names() {
    static const std::vector<std::string> names{"uniform", "triangle", "epanechnikov"};
    return names;
}

double KernelSpec::profile(double r) const {
    if (r < 0.0) return 0.0;
    if (r > 1.0) {
        if (r > 1.0 + kSupportSlack) return 0.0;
        r = 1.0;
    }
    return profile_(r);
}

double eval_scaled_kernel(const KernelSpec& kernel, double k, const Vec& z) {
    if (!(k > 0.0) || !std::isfinite(k)) throw InvalidParameter("concentration k must be positive");
    const double kd = kernel.dimension() == 1 ? k : k * k;
    return kd * kernel(scaled(z, k));
}

}  // namespace gammalab
