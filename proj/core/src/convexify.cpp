#include "gammalab/convexify.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "gammalab/error.hpp"

namespace gammalab {

SampledFunction1D::SampledFunction1D(std::vector<double> x, std::vector<double> v)
    : xs(std::move(x)), values(std::move(v)) {
    validate();
}

SampledFunction1D SampledFunction1D::sample(const std::function<double(double)>& f, double lo, double hi,
                                            std::size_t count) {
    if (count < 2 || !(hi > lo)) throw InvalidParameter("sampling needs count >= 2 and hi > lo");
    std::vector<double> xs(count), values(count);
    for (std::size_t i = 0; i < count; ++i) {
        xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        values[i] = f(xs[i]);
    }
    return SampledFunction1D(std::move(xs), std::move(values));
}

void SampledFunction1D::validate() const {
    if (xs.size() != values.size()) throw InvalidParameter("sample grid and values differ in length");
    if (xs.empty()) throw InvalidParameter("empty sample grid");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(values[i])) throw InvalidParameter("non-finite sample");
        if (i > 0 && !(xs[i] > xs[i - 1])) throw InvalidParameter("sample grid is not strictly increasing");
    }
}

namespace {

/// True when point m lies on or above the chord from a to c, up to rounding.
bool on_or_above_chord(double xa, double fa, double xm, double fm, double xc, double fc) {
    const double chord = fa + (fc - fa) * ((xm - xa) / (xc - xa));
    const double tol = 64.0 * DBL_EPSILON * (std::abs(fa) + std::abs(fm) + std::abs(fc));
    return fm >= chord - tol;
}

std::vector<std::size_t> hull_of(std::span<const double> xs, std::span<const double> values) {
    std::vector<std::size_t> hull;
    hull.reserve(xs.size());
    for (std::size_t c = 0; c < xs.size(); ++c) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t m = hull.back();
            if (!on_or_above_chord(xs[a], values[a], xs[m], values[m], xs[c], values[c])) break;
            hull.pop_back();
        }
        hull.push_back(c);
    }
    return hull;
}

struct ConjugateSample {
    double value;
    std::size_t argmax;
};

/// Conjugate over a sorted dual grid together with the maximizing primal index.
std::vector<ConjugateSample> conjugate_with_argmax(std::span<const double> xs, std::span<const double> values,
                                                   std::span<const double> dual) {
    for (std::size_t i = 1; i < dual.size(); ++i)
        if (!(dual[i] > dual[i - 1])) throw InvalidParameter("dual grid is not strictly increasing");
    const std::vector<std::size_t> hull = hull_of(xs, values);
    std::vector<ConjugateSample> out(dual.size());
    std::size_t m = 0;
    for (std::size_t q = 0; q < dual.size(); ++q) {
        const double s = dual[q];
        // The maximizer moves right while the next hull edge is strictly less steep than s.
        while (m + 1 < hull.size()) {
            const std::size_t a = hull[m], b = hull[m + 1];
            const double edge = (values[b] - values[a]) / (xs[b] - xs[a]);
            if (!(edge < s)) break;
            ++m;
        }
        const std::size_t v = hull[m];
        out[q] = {s * xs[v] - values[v], v};
    }
    return out;
}

}  // namespace

std::vector<std::size_t> lower_hull(const SampledFunction1D& f) {
    f.validate();
    return hull_of(f.xs, f.values);
}

SampledFunction1D legendre_transform(const SampledFunction1D& f, std::span<const double> dual_grid) {
    f.validate();
    const auto conj = conjugate_with_argmax(f.xs, f.values, dual_grid);
    SampledFunction1D out;
    out.xs.assign(dual_grid.begin(), dual_grid.end());
    out.values.resize(conj.size());
    for (std::size_t q = 0; q < conj.size(); ++q) out.values[q] = conj[q].value;
    return out;
}

std::vector<double> default_dual_grid(const SampledFunction1D& f, std::size_t count) {
    f.validate();
    if (count < 2) throw InvalidParameter("dual grid needs at least two points");
    double slope = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i)
        slope = std::max(slope, std::abs((f.values[i] - f.values[i - 1]) / (f.xs[i] - f.xs[i - 1])));
    const double L = slope > 0.0 ? 1.1 * slope : 1.0;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = -L + 2.0 * L * static_cast<double>(i) / static_cast<double>(count - 1);
    return grid;
}

SampledFunction1D convex_envelope(const SampledFunction1D& f) {
    f.validate();
    const std::vector<std::size_t> hull = hull_of(f.xs, f.values);
    // Breakpoints of the conjugate are the hull edge slopes. The double conjugate at x
    // is attained at the slope of the edge containing x, with the conjugate's argmax at
    // the edge's left vertex a: f**(x) = s x - (s x_a - f_a) = f_a + s (x - x_a).
    SampledFunction1D out;
    out.xs = f.xs;
    out.values = f.values;
    for (std::size_t m = 0; m + 1 < hull.size(); ++m) {
        const std::size_t a = hull[m], b = hull[m + 1];
        const double s = (f.values[b] - f.values[a]) / (f.xs[b] - f.xs[a]);
        for (std::size_t j = a + 1; j < b; ++j)
            out.values[j] = std::min(f.values[j], f.values[a] + s * (f.xs[j] - f.xs[a]));
    }
    return out;
}

double convex_envelope_at(const SampledFunction1D& f, double x) {
    f.validate();
    if (x < f.xs.front() || x > f.xs.back()) return std::numeric_limits<double>::infinity();
    const std::vector<std::size_t> hull = hull_of(f.xs, f.values);
    if (hull.size() == 1) return f.values[hull[0]];
    auto it = std::upper_bound(hull.begin(), hull.end(), x,
                               [&](double value, std::size_t idx) { return value < f.xs[idx]; });
    if (it == hull.end()) return f.values[hull.back()];
    if (it == hull.begin()) return f.values[hull.front()];
    const std::size_t b = *it, a = *(it - 1);
    const double s = (f.values[b] - f.values[a]) / (f.xs[b] - f.xs[a]);
    return f.values[a] + s * (x - f.xs[a]);
}

SampledFunction2D SampledFunction2D::sample(const std::function<double(const Vec&)>& f, double lo, double hi,
                                            std::size_t count) {
    if (count < 2 || !(hi > lo)) throw InvalidParameter("sampling needs count >= 2 and hi > lo");
    SampledFunction2D out;
    out.x0.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        out.x0[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    out.x1 = out.x0;
    out.values.resize(count * count);
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t i = 0; i < count; ++i) out.values[i + count * j] = f({out.x0[i], out.x1[j]});
    return out;
}

void SampledFunction2D::validate() const {
    if (x0.size() < 2 || x1.size() < 2) throw InvalidParameter("2D samples need at least two points per axis");
    if (values.size() != x0.size() * x1.size()) throw InvalidParameter("2D sample values have the wrong size");
    for (const auto* axis : {&x0, &x1})
        for (std::size_t i = 1; i < axis->size(); ++i)
            if (!((*axis)[i] > (*axis)[i - 1])) throw InvalidParameter("2D sample axis is not strictly increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidParameter("non-finite 2D sample");
}

namespace {

/// Conjugate of 2D samples on a dual set, stored as (slope, argmax node).
struct DualSet {
    std::vector<Vec> slopes;
    std::vector<std::size_t> argmax;
};

std::vector<double> uniform_axis(double L, std::size_t count) {
    std::vector<double> axis(count);
    for (std::size_t i = 0; i < count; ++i)
        axis[i] = -L + 2.0 * L * static_cast<double>(i) / static_cast<double>(count - 1);
    return axis;
}

DualSet conjugate_2d(const SampledFunction2D& f, const Envelope2DOptions& opts) {
    f.validate();
    const std::size_t n0 = f.x0.size(), n1 = f.x1.size();
    double L0 = 0.0, L1 = 0.0;
    for (std::size_t j = 0; j < n1; ++j)
        for (std::size_t i = 0; i < n0; ++i) {
            if (i + 1 < n0) L0 = std::max(L0, std::abs((f.at(i + 1, j) - f.at(i, j)) / (f.x0[i + 1] - f.x0[i])));
            if (j + 1 < n1) L1 = std::max(L1, std::abs((f.at(i, j + 1) - f.at(i, j)) / (f.x1[j + 1] - f.x1[j])));
        }
    L0 = L0 > 0.0 ? 1.1 * L0 : 1.0;
    L1 = L1 > 0.0 ? 1.1 * L1 : 1.0;
    std::size_t ns = opts.dual_points != 0 ? opts.dual_points : 2 * std::max(n0, n1) + 1;
    if (ns < 2) ns = 2;
    const std::vector<double> s0 = uniform_axis(L0, ns);
    const std::vector<double> s1 = uniform_axis(L1, ns);

    DualSet dual;
    // Rectangular part by nested 1D conjugates: first along x0 for every row, then along
    // x1 for every dual s0. Both passes are the linear-time transform.
    std::vector<ConjugateSample> rows(n1 * ns);
    for (std::size_t j = 0; j < n1; ++j) {
        const std::span<const double> row(&f.values[n0 * j], n0);
        const auto conj = conjugate_with_argmax(f.x0, row, s0);
        std::copy(conj.begin(), conj.end(), rows.begin() + static_cast<std::ptrdiff_t>(ns * j));
    }
    std::vector<double> column(n1);
    for (std::size_t q0 = 0; q0 < ns; ++q0) {
        for (std::size_t j = 0; j < n1; ++j) column[j] = -rows[q0 + ns * j].value;
        const auto conj = conjugate_with_argmax(f.x1, column, s1);
        for (std::size_t q1 = 0; q1 < ns; ++q1) {
            const std::size_t j = conj[q1].argmax;
            dual.slopes.push_back({s0[q0], s1[q1]});
            dual.argmax.push_back(rows[q0 + ns * j].argmax + n0 * j);
        }
    }

    if (opts.include_node_slopes) {
        for (std::size_t j = 0; j < n1; ++j)
            for (std::size_t i = 0; i < n0; ++i) {
                const std::size_t il = i == 0 ? 0 : i - 1, ir = i + 1 == n0 ? i : i + 1;
                const std::size_t jl = j == 0 ? 0 : j - 1, jr = j + 1 == n1 ? j : j + 1;
                const Vec s{(f.at(ir, j) - f.at(il, j)) / (f.x0[ir] - f.x0[il]),
                            (f.at(i, jr) - f.at(i, jl)) / (f.x1[jr] - f.x1[jl])};
                double best = -std::numeric_limits<double>::infinity();
                std::size_t arg = 0;
                for (std::size_t m = 0; m < f.values.size(); ++m) {
                    const double v = s[0] * f.x0[m % n0] + s[1] * f.x1[m / n0] - f.values[m];
                    if (v > best) {
                        best = v;
                        arg = m;
                    }
                }
                dual.slopes.push_back(s);
                dual.argmax.push_back(arg);
            }
    }
    return dual;
}

/// max over the dual set of s . x - f*(s), written as f(x_a) + s . (x - x_a) with
/// x_a the conjugate's maximizer.
double double_conjugate(const SampledFunction2D& f, const DualSet& dual, const Vec& x) {
    const std::size_t n0 = f.x0.size();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < dual.slopes.size(); ++q) {
        const std::size_t a = dual.argmax[q];
        const Vec xa{f.x0[a % n0], f.x1[a / n0]};
        const double v = f.values[a] + dot(dual.slopes[q], x - xa);
        best = std::max(best, v);
    }
    return best;
}

}  // namespace

SampledFunction2D convex_envelope_2d(const SampledFunction2D& f, const Envelope2DOptions& opts) {
    const DualSet dual = conjugate_2d(f, opts);
    SampledFunction2D out = f;
    const std::size_t n0 = f.x0.size();
    for (std::size_t m = 0; m < f.values.size(); ++m) {
        const Vec x{f.x0[m % n0], f.x1[m / n0]};
        out.values[m] = std::min(f.values[m], double_conjugate(f, dual, x));
    }
    return out;
}

double convex_envelope_2d_at(const SampledFunction2D& f, const Vec& x, const Envelope2DOptions& opts) {
    if (x[0] < f.x0.front() || x[0] > f.x0.back() || x[1] < f.x1.front() || x[1] > f.x1.back())
        return std::numeric_limits<double>::infinity();
    const DualSet dual = conjugate_2d(f, opts);
    return double_conjugate(f, dual, x);
}

std::vector<bool> untrusted_boundary_mask(std::size_t count) {
    std::vector<bool> mask(count, false);
    if (count > 0) {
        mask.front() = true;
        mask.back() = true;
    }
    return mask;
}

}  // namespace gammalab
