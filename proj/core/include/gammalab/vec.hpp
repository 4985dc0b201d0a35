#pragma once

#include <array>
#include <cmath>

namespace gammalab {

/// Point or vector in R^d for d <= 2. In one dimension the second component is zero.
using Vec = std::array<double, 2>;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }

inline double norm(const Vec& a) { return std::hypot(a[0], a[1]); }

inline Vec scaled(const Vec& a, double s) { return {a[0] * s, a[1] * s}; }

inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }

/// |t|^p with exact fast paths for the exponents used in experiments.
inline double abs_pow(double t, double p) {
    const double a = std::abs(t);
    if (p == 2.0) return a * a;
    if (p == 4.0) {
        const double s = a * a;
        return s * s;
    }
    if (p == 1.0) return a;
    return std::pow(a, p);
}

/// d/dt |t|^p = p |t|^(p-2) t, continuous at t = 0 for p > 1.
inline double abs_pow_derivative(double t, double p) {
    if (p == 2.0) return 2.0 * t;
    if (p == 4.0) return 4.0 * t * t * t;
    if (t == 0.0) return 0.0;
    return p * std::pow(std::abs(t), p - 1.0) * (t > 0.0 ? 1.0 : -1.0);
}

/// b^p - a^p for a, b >= 0 given d = b - a, accurate when b is close to a.
inline double pow_difference(double a, double d, double p) {
    const double b = a + d;
    if (p == 2.0) return d * (a + b);
    if (p == 4.0) return d * (a + b) * (a * a + b * b);
    if (a == 0.0) return std::pow(b, p);
    return std::pow(a, p) * std::expm1(p * std::log1p(d / a));
}

/// |t + dt|^p - |t|^p, accurate when dt is small.
inline double abs_pow_change(double t, double dt, double p) {
    const double s = t + dt;
    if (p == 2.0) return dt * (t + s);
    if (p == 4.0) return dt * (t + s) * (t * t + s * s);
    // Same sign: |s| - |t| = +-dt exactly; otherwise no cancellation occurs.
    if ((t >= 0.0) == (s >= 0.0)) return pow_difference(std::abs(t), t >= 0.0 ? dt : -dt, p);
    return abs_pow(s, p) - abs_pow(t, p);
}

/// |xi + dxi|^p - |xi|^p for vectors.
inline double norm_pow_change(const Vec& xi, const Vec& dxi, double p) {
    const Vec nxi = xi + dxi;
    // |xi + dxi|^2 - |xi|^2 = dxi . (2 xi + dxi).
    const double sq = dot(dxi, xi + nxi);
    if (p == 2.0) return sq;
    const double a = norm(xi), b = norm(nxi);
    if (p == 4.0) return sq * (a * a + b * b);
    if (a + b == 0.0) return 0.0;
    return pow_difference(a, sq / (a + b), p);
}

}  // namespace gammalab
