#include "gammalab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gammalab/error.hpp"

namespace gammalab {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw InvalidParameter("Gauss-Legendre order must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

double ball_volume(int dimension) {
    if (dimension == 1) return 2.0;
    if (dimension == 2) return std::numbers::pi;
    throw InvalidParameter("dimension must be 1 or 2");
}

QuadratureRule ball_rule(int dimension, int radial_order, int angular_order) {
    std::vector<double> gx, gw;
    gauss_legendre(radial_order, gx, gw);
    QuadratureRule rule;
    rule.dimension = dimension;
    rule.order = radial_order;
    if (dimension == 1) {
        rule.scheme = "gauss-legendre";
        for (int side = -1; side <= 1; side += 2) {
            for (int i = 0; i < radial_order; ++i) {
                const double r = 0.5 * (gx[i] + 1.0);
                rule.nodes.push_back({side * r, 0.0});
                rule.weights.push_back(0.5 * gw[i]);
            }
        }
        return rule;
    }
    if (dimension == 2) {
        if (angular_order < 1) throw InvalidParameter("angular order must be >= 1");
        rule.scheme = "product-polar";
        const double dtheta = 2.0 * std::numbers::pi / angular_order;
        for (int i = 0; i < radial_order; ++i) {
            const double r = 0.5 * (gx[i] + 1.0);
            const double wr = 0.5 * gw[i] * r;
            for (int j = 0; j < angular_order; ++j) {
                // Half-step offset keeps nodes off the coordinate axes.
                const double theta = (j + 0.5) * dtheta;
                rule.nodes.push_back({r * std::cos(theta), r * std::sin(theta)});
                rule.weights.push_back(wr * dtheta);
            }
        }
        return rule;
    }
    throw InvalidParameter("dimension must be 1 or 2");
}

namespace {

const QuadratureRule& default_rule(int dimension) {
    static const QuadratureRule rule1 = ball_rule(1);
    static const QuadratureRule rule2 = ball_rule(2);
    return dimension == 1 ? rule1 : rule2;
}

}  // namespace

double kernel_mass(const KernelSpec& kernel) {
    const QuadratureRule& rule = default_rule(kernel.dimension());
    double mass = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) mass += rule.weights[q] * kernel(rule.nodes[q]);
    return mass;
}

double f0_of_xi(const KernelSpec& kernel, double p, const Vec& xi, const QuadratureRule& rule) {
    if (!(p > 1.0)) throw InvalidParameter("p must be > 1");
    if (rule.dimension != kernel.dimension()) throw InvalidParameter("rule and kernel dimensions differ");
    if (xi[0] == 0.0 && xi[1] == 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const Vec& z = rule.nodes[q];
        const double r = norm(z);
        sum += rule.weights[q] * kernel(z) * abs_pow(dot(xi, z) / r, p);
    }
    return sum;
}

double f0_of_xi(const KernelSpec& kernel, double p, const Vec& xi) {
    return f0_of_xi(kernel, p, xi, default_rule(kernel.dimension()));
}

MonteCarloEstimate f0_monte_carlo_oracle(const KernelSpec& kernel, double p, const Vec& xi,
                                         std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1000) throw InvalidParameter("Monte Carlo oracle needs at least 1000 samples");
    if (!(p > 1.0)) throw InvalidParameter("p must be > 1");
    if (xi[0] == 0.0 && xi[1] == 0.0) return {0.0, 0.0};
    const int d = kernel.dimension();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    // Uniform samples on the ball by rejection from the cube; the estimator is
    // volume * mean(integrand) with the sample standard error.
    double mean = 0.0, m2 = 0.0;
    std::size_t accepted = 0;
    while (accepted < n_samples) {
        Vec z{unit(rng), d == 2 ? unit(rng) : 0.0};
        const double r = norm(z);
        if (r > 1.0 || r == 0.0) continue;
        const double value = kernel(z) * std::pow(std::abs(xi[0] * z[0] + xi[1] * z[1]) / r, p);
        ++accepted;
        const double delta = value - mean;
        mean += delta / static_cast<double>(accepted);
        m2 += delta * (value - mean);
    }
    const double volume = ball_volume(d);
    const double variance = m2 / static_cast<double>(accepted - 1);
    return {volume * mean, volume * std::sqrt(variance / static_cast<double>(accepted))};
}

}  // namespace gammalab
