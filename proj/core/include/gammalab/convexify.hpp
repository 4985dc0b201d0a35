#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gammalab/vec.hpp"

namespace gammalab {

/// Samples of a function of one variable on a strictly increasing grid.
/// Beyond the grid the function is taken to be +infinity.
struct SampledFunction1D {
    std::vector<double> xs;
    std::vector<double> values;

    SampledFunction1D() = default;
    SampledFunction1D(std::vector<double> xs, std::vector<double> values);

    static SampledFunction1D sample(const std::function<double(double)>& f, double lo, double hi,
                                    std::size_t count);

    std::size_t size() const noexcept { return xs.size(); }
    /// Throws InvalidParameter unless xs is strictly increasing, sizes match and values are finite.
    void validate() const;
};

/// Indices of the vertices of the lower convex hull of the samples, left to right.
/// Points lying on (or within rounding of) a hull edge are not vertices.
std::vector<std::size_t> lower_hull(const SampledFunction1D& f);

/// Discrete Legendre-Fenchel conjugate s -> max_i (s x_i - f(x_i)) on a sorted dual grid.
///
/// Linear time: the lower hull is built once, then the maximizing vertex is advanced
/// monotonically as s increases. Ties resolve to the smallest index.
SampledFunction1D legendre_transform(const SampledFunction1D& f, std::span<const double> dual_grid);

/// Dual grid [-L, L] with L the largest finite-difference slope padded by 10%.
std::vector<double> default_dual_grid(const SampledFunction1D& f, std::size_t count);

/// Convex envelope restricted to the sample grid, computed as the double conjugate
/// over the exact breakpoints of the conjugate (the hull edge slopes). Pointwise <= f
/// and idempotent.
SampledFunction1D convex_envelope(const SampledFunction1D& f);

/// Evaluates the double conjugate of the samples at an arbitrary point inside the grid.
double convex_envelope_at(const SampledFunction1D& f, double x);

/// Samples on a rectangular grid, values row-major with x0 fastest.
struct SampledFunction2D {
    std::vector<double> x0;
    std::vector<double> x1;
    std::vector<double> values;

    static SampledFunction2D sample(const std::function<double(const Vec&)>& f, double lo,
                                    double hi, std::size_t count);

    double at(std::size_t i, std::size_t j) const { return values[i + x0.size() * j]; }
    std::size_t size() const noexcept { return values.size(); }
    void validate() const;
};

struct Envelope2DOptions {
    /// Points per axis of the rectangular dual grid.
    std::size_t dual_points = 0;  // 0: use 2 * (primal points per axis) + 1
    /// Add the finite-difference gradient at each node to the dual set.
    bool include_node_slopes = true;
};

/// 2D convex envelope by double conjugation over a 2D dual set:
/// g*(s) = max over nodes of (<s, x> - f(x)), then f**(x) = max over s of (<s, x> - g*(s)).
/// The dual set is a rectangular grid on [-L, L]^2 plus, optionally, the discrete
/// gradients at the nodes. Exact up to dual-set resolution.
SampledFunction2D convex_envelope_2d(const SampledFunction2D& f, const Envelope2DOptions& opts = {});

/// Double conjugate of the 2D samples evaluated at an arbitrary point.
double convex_envelope_2d_at(const SampledFunction2D& f, const Vec& x,
                             const Envelope2DOptions& opts = {});

/// Grid indices whose envelope value lies within one cell of the sample boundary
/// and may depend on values outside the sampled window.
std::vector<bool> untrusted_boundary_mask(std::size_t count);

}  // namespace gammalab
