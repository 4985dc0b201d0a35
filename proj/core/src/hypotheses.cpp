#include "gammalab/hypotheses.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "gammalab/grid.hpp"

namespace gammalab {

bool HypothesisReport::all_pass() const {
    for (const auto& c : conditions)
        if (!c.pass) return false;
    return true;
}

const ConditionResult* HypothesisReport::find(const std::string& name) const {
    for (const auto& c : conditions)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

std::string fmt_vec(const Vec& v, int d) {
    return d == 1 ? format_double(v[0]) : "(" + format_double(v[0]) + ", " + format_double(v[1]) + ")";
}

/// Tracks one inequality `lhs <= rhs` over the samples.
class Check {
public:
    Check(std::string name, std::string statement, double rel_tol)
        : rel_tol_(rel_tol) {
        result_.name = std::move(name);
        result_.statement = std::move(statement);
    }

    template <class Describe>
    void le(double lhs, double rhs, Describe&& describe) {
        const double excess = lhs - rhs;
        const double slack = rel_tol_ * (1.0 + std::abs(lhs) + std::abs(rhs));
        if (!(excess <= slack)) {
            ++result_.violations;
            result_.pass = false;
            const double magnitude = std::isfinite(excess) ? excess : INFINITY;
            // Later samples must exceed the current worst beyond rounding to replace it.
            if (result_.violations == 1 || magnitude > result_.violation + slack) {
                result_.violation = magnitude;
                result_.worst_sample = describe();
            }
        }
    }

    ConditionResult take() { return std::move(result_); }

private:
    double rel_tol_;
    ConditionResult result_;
};

struct Sampler {
    explicit Sampler(const SamplingPlan& plan) : plan(plan), rng(plan.seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

    Vec box(double lo, double hi) {
        Vec v{uniform(lo, hi), 0.0};
        if (plan.dimension == 2) v[1] = uniform(lo, hi);
        return v;
    }

    Vec ball(double radius) {
        if (plan.dimension == 1) return {uniform(-radius, radius), 0.0};
        while (true) {
            Vec v{uniform(-radius, radius), uniform(-radius, radius)};
            if (norm(v) <= radius) return v;
        }
    }

    const SamplingPlan& plan;
    std::mt19937_64 rng;
};

}  // namespace

HypothesisReport validate_growth(const LocalDensity& g, const SamplingPlan& plan) {
    const int d = plan.dimension;
    Check nonneg("nonnegativity", "g(x, xi) >= 0", plan.rel_tol);
    Check lower("growth-lower", "c0 |xi|^p <= g(x, xi)", plan.rel_tol);
    Check upper("growth-upper", "g(x, xi) <= c1 |xi|^p + a0", plan.rel_tol);
    Check period("periodicity", "g(x + e_j, xi) = g(x, xi)", plan.rel_tol);
    Check consts("constants", "0 < c0 <= c1, a0 >= 0, p > 1", 0.0);

    consts.le(0.0, g.c0 > 0.0 && g.c1 >= g.c0 && g.a0 >= 0.0 && g.p > 1.0 ? 0.0 : 1.0,
              [&] { return "c0=" + format_double(g.c0) + ", c1=" + format_double(g.c1); });

    Sampler s(plan);
    const std::size_t count = std::max<std::size_t>(plan.count, 1);
    for (std::size_t n = 0; n < count; ++n) {
        // The first sample is the origin, where additive offsets are most visible.
        const Vec x = n == 0 ? Vec{0.0, 0.0} : s.box(0.0, plan.x_extent);
        const Vec xi = n == 0 ? Vec{0.0, 0.0} : s.box(-plan.xi_range, plan.xi_range);
        const double value = g(x, xi);
        const double growth = abs_pow(norm(xi), g.p);
        auto describe = [&] { return "x=" + fmt_vec(x, d) + ", xi=" + fmt_vec(xi, d) + ", g=" + format_double(value); };
        nonneg.le(0.0, value, describe);
        lower.le(g.c0 * growth, value, describe);
        upper.le(value, g.c1 * growth + g.a0, describe);
        if (g.periodic) {
            for (int c = 0; c < d; ++c) {
                Vec shifted = x;
                shifted[c] += 1.0;
                const double other = g(shifted, xi);
                period.le(std::abs(other - value) / (1.0 + std::abs(value)), 0.0, describe);
            }
        }
    }

    HypothesisReport report;
    report.density = g.name;
    report.sample_count = count;
    report.conditions.push_back(consts.take());
    report.conditions.push_back(nonneg.take());
    report.conditions.push_back(lower.take());
    report.conditions.push_back(upper.take());
    if (g.periodic) report.conditions.push_back(period.take());
    return report;
}

HypothesisReport validate_growth(const NonlocalDensity& f, const SamplingPlan& plan) {
    const int d = plan.dimension;
    Check consts("constants", "0 < C0 <= C1, p > 1, kernel present", 0.0);
    Check nonneg("nonnegativity", "f(x, y, z, tau) >= 0", plan.rel_tol);
    Check lower("kernel-comparison-lower", "C0 psi(z) |tau|^p / |z|^p <= f(x, y, z, tau), 0 < |z| <= 1", plan.rel_tol);
    Check upper("kernel-comparison-upper", "f(x, y, z, tau) <= C1 psi(z) |tau|^p / |z|^p, 0 < |z| <= 1", plan.rel_tol);
    Check support("compact-support", "f(x, y, z, tau) = 0 for |z| > 1", plan.rel_tol);
    Check period("periodicity", "f(x + e_j, y + e_j, z, tau) = f(x, y, z, tau)", plan.rel_tol);

    consts.le(0.0, f.C0 > 0.0 && f.C1 >= f.C0 && f.p > 1.0 && f.kernel ? 0.0 : 1.0,
              [&] { return "C0=" + format_double(f.C0) + ", C1=" + format_double(f.C1); });

    Sampler s(plan);
    const std::size_t count = std::max<std::size_t>(plan.count, 1);
    for (std::size_t n = 0; n < count; ++n) {
        const Vec x = s.box(0.0, plan.x_extent);
        const Vec y = s.box(0.0, plan.x_extent);
        Vec z = s.ball(plan.z_radius);
        if (norm(z) == 0.0) z[0] = 0.5;
        const double tau = s.uniform(-plan.tau_range, plan.tau_range);
        const double value = f(x, y, z, tau);
        auto describe = [&] {
            return "x=" + fmt_vec(x, d) + ", y=" + fmt_vec(y, d) + ", z=" + fmt_vec(z, d) +
                   ", tau=" + format_double(tau) + ", f=" + format_double(value);
        };
        nonneg.le(0.0, value, describe);
        const double r = norm(z);
        if (r <= 1.0) {
            if (f.kernel) {
                const double reference = (*f.kernel)(z) * abs_pow(tau, f.p) / abs_pow(r, f.p);
                lower.le(f.C0 * reference, value, describe);
                upper.le(value, f.C1 * reference, describe);
            }
        } else {
            support.le(std::abs(value), 0.0, describe);
        }
        if (f.periodic) {
            for (int c = 0; c < d; ++c) {
                Vec xs = x, ys = y;
                xs[c] += 1.0;
                ys[c] += 1.0;
                period.le(std::abs(f(xs, ys, z, tau) - value) / (1.0 + std::abs(value)), 0.0, describe);
            }
        }
    }

    HypothesisReport report;
    report.density = f.name;
    report.sample_count = count;
    report.conditions.push_back(consts.take());
    report.conditions.push_back(nonneg.take());
    report.conditions.push_back(lower.take());
    report.conditions.push_back(upper.take());
    report.conditions.push_back(support.take());
    if (f.periodic) report.conditions.push_back(period.take());
    return report;
}

HypothesisReport validate_growth(const Density& density, const SamplingPlan& plan) {
    return std::visit([&](const auto& d) { return validate_growth(d, plan); }, density);
}

}  // namespace gammalab
