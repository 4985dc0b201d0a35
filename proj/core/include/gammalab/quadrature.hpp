#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gammalab/kernel.hpp"
#include "gammalab/vec.hpp"

namespace gammalab {

/// Nodes and positive weights on the unit ball of R^d. Weights sum to the ball volume.
struct QuadratureRule {
    std::vector<Vec> nodes;
    std::vector<double> weights;
    std::string scheme;
    int order = 0;
    int dimension = 1;
};

/// n-point Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Ball rule: Gauss-Legendre on each half of [-1, 1] in 1D (the origin is never a node);
/// Gauss-Legendre in r times periodic trapezoid in theta in 2D.
QuadratureRule ball_rule(int dimension, int radial_order = 64, int angular_order = 128);

/// Volume of the unit ball: 2 in 1D, pi in 2D.
double ball_volume(int dimension);

/// Integral of psi over R^d.
double kernel_mass(const KernelSpec& kernel);

/// f0(xi) = integral of psi(z) |xi . z|^p / |z|^p over the unit ball.
double f0_of_xi(const KernelSpec& kernel, double p, const Vec& xi);
double f0_of_xi(const KernelSpec& kernel, double p, const Vec& xi, const QuadratureRule& rule);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Rejection-sampled estimate of the same integral as f0_of_xi. Independent of the
/// deterministic rule; used as a cross-check. Requires n_samples >= 1000.
MonteCarloEstimate f0_monte_carlo_oracle(const KernelSpec& kernel, double p, const Vec& xi,
                                         std::size_t n_samples, std::uint64_t seed);

}  // namespace gammalab
