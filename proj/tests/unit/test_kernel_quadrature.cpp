#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gammalab/error.hpp"
#include "gammalab/kernel.hpp"
#include "gammalab/quadrature.hpp"

using namespace gammalab;
using std::numbers::pi;

namespace {

// Midpoint sum of the kernel mass: 1D over [-1, 1], 2D in polar coordinates.
double midpoint_mass(const KernelSpec& k, int cells = 200000) {
    double sum = 0.0;
    const double dr = 1.0 / cells;
    for (int i = 0; i < cells; ++i) {
        const double r = (i + 0.5) * dr;
        sum += k.dimension() == 1 ? 2.0 * k.profile(r) * dr : 2.0 * pi * r * k.profile(r) * dr;
    }
    return sum;
}

// Integral of |cos t|^p over one period, divided by 2 pi.
double mean_abs_cos_pow(double p) { return std::tgamma((p + 1) / 2) / (std::sqrt(pi) * std::tgamma(p / 2 + 1)); }

}  // namespace

TEST_CASE("gauss-legendre integrates polynomials up to degree 2n-1 exactly") {
    for (int n : {1, 2, 5, 16, 64}) {
        std::vector<double> x, w;
        gauss_legendre(n, x, w);
        REQUIRE(x.size() == static_cast<std::size_t>(n));
        for (int m = 0; m <= 2 * n - 1 && m <= 40; ++m) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += w[i] * std::pow(x[i], m);
            const double exact = m % 2 == 1 ? 0.0 : 2.0 / (m + 1);
            CHECK(sum == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
    std::vector<double> x, w;
    CHECK_THROWS_AS(gauss_legendre(0, x, w), InvalidParameter);
}

TEST_CASE("ball rules integrate the ball volume") {
    for (int d : {1, 2}) {
        const QuadratureRule rule = ball_rule(d);
        double sum = 0.0;
        for (double w : rule.weights) {
            CHECK(w > 0.0);
            sum += w;
        }
        CHECK(sum == doctest::Approx(ball_volume(d)).epsilon(1e-13));
        for (const Vec& z : rule.nodes) {
            CHECK(norm(z) <= 1.0);
            CHECK(norm(z) > 0.0);
        }
    }
    CHECK(ball_volume(1) == 2.0);
    CHECK(ball_volume(2) == doctest::Approx(pi));
}

TEST_CASE("built-in kernels have unit mass") {
    for (int d : {1, 2})
        for (const auto& name : KernelSpec::builtin_names()) {
            const KernelSpec k = KernelSpec::builtin(name, d);
            CAPTURE(name);
            CAPTURE(d);
            CHECK(kernel_mass(k) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(midpoint_mass(k) == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(k.profile(1.5) == 0.0);
            CHECK(k.profile(-0.1) == 0.0);
        }
}

TEST_CASE("tabulated kernels are normalized and piecewise linear") {
    const KernelSpec k = KernelSpec::tabulated({3.0, 2.0, 1.0, 0.0}, 1, true);
    CHECK(kernel_mass(k) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(midpoint_mass(k) == doctest::Approx(1.0).epsilon(1e-8));
    // Halfway between the first two samples.
    CHECK(k.profile(1.0 / 6.0) / k.profile(0.0) == doctest::Approx(2.5 / 3.0));
    CHECK_THROWS_AS(KernelSpec::tabulated({1.0}, 1), InvalidParameter);
    CHECK_THROWS_AS(KernelSpec::tabulated({1.0, -1.0}, 1), InvalidParameter);
    CHECK_THROWS_AS(KernelSpec::builtin("gaussian", 1), InvalidParameter);
}

TEST_CASE("scaled kernel concentrates with k") {
    CHECK(eval_scaled_kernel(KernelSpec::builtin("uniform", 1), 4.0, Vec{0.1, 0.0}) == doctest::Approx(2.0));
    CHECK(eval_scaled_kernel(KernelSpec::builtin("uniform", 2), 2.0, Vec{0.1, 0.2}) == doctest::Approx(4.0 / pi));
    const KernelSpec k = KernelSpec::builtin("triangle", 1);
    CHECK(eval_scaled_kernel(k, 4.0, Vec{0.1, 0.0}) == doctest::Approx(4.0 * k.profile(0.4)));
    CHECK(eval_scaled_kernel(k, 4.0, Vec{0.3, 0.0}) == 0.0);
    CHECK_THROWS_AS(eval_scaled_kernel(k, 0.0, Vec{0.1, 0.0}), InvalidParameter);
}

TEST_CASE("f0 matches the analytic values of the uniform kernel") {
    const KernelSpec u1 = KernelSpec::builtin("uniform", 1);
    const KernelSpec u2 = KernelSpec::builtin("uniform", 2);
    for (double xi : {0.0, 1.0, 2.0, 3.0, -1.5}) CHECK(f0_of_xi(u1, 2.0, Vec{xi, 0.0}) == doctest::Approx(xi * xi).epsilon(1e-10));
    CHECK(f0_of_xi(u1, 3.5, Vec{1.7, 0.0}) == doctest::Approx(std::pow(1.7, 3.5)).epsilon(1e-10));
    for (Vec xi : {Vec{1.0, 0.0}, Vec{0.3, -2.0}, Vec{1.0, 1.0}})
        CHECK(f0_of_xi(u2, 2.0, xi) == doctest::Approx(dot(xi, xi) / 2.0).epsilon(1e-10));
    // Odd and fractional exponents limit the smoothness of |cos|^p and thus the angular rule.
    CHECK(f0_of_xi(u2, 4.0, Vec{0.6, 0.8}) == doctest::Approx(mean_abs_cos_pow(4.0)).epsilon(1e-10));
    CHECK(f0_of_xi(u2, 3.0, Vec{0.6, 0.8}) == doctest::Approx(mean_abs_cos_pow(3.0)).epsilon(1e-7));
    CHECK(f0_of_xi(u2, 1.5, Vec{0.6, 0.8}) == doctest::Approx(mean_abs_cos_pow(1.5)).epsilon(1e-4));
    CHECK(f0_of_xi(u1, 2.0, Vec{3.0, 0.0}) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(f0_of_xi(u2, 2.0, Vec{1.0, 0.0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f0_of_xi(u2, 2.0, Vec{0.0, 0.0}) == 0.0);
}

TEST_CASE("f0 is p-homogeneous, even and midpoint convex in xi") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int d : {1, 2})
        for (const auto& name : KernelSpec::builtin_names()) {
            const KernelSpec k = KernelSpec::builtin(name, d);
            for (double p : {1.5, 2.0, 3.3}) {
                const Vec xi{u(rng), d == 2 ? u(rng) : 0.0};
                const double base = f0_of_xi(k, p, xi);
                for (double lambda : {0.5, 2.0, 10.0})
                    CHECK(f0_of_xi(k, p, scaled(xi, lambda)) ==
                          doctest::Approx(std::pow(lambda, p) * base).epsilon(1e-8));
                CHECK(f0_of_xi(k, p, scaled(xi, -1.0)) == doctest::Approx(base).epsilon(1e-10));
                CHECK(f0_of_xi(k, p, Vec{0.0, 0.0}) == 0.0);
                for (int t = 0; t < 10; ++t) {
                    const Vec a{u(rng), d == 2 ? u(rng) : 0.0}, b{u(rng), d == 2 ? u(rng) : 0.0};
                    const double mid = f0_of_xi(k, p, scaled(a + b, 0.5));
                    CHECK(mid <= 0.5 * f0_of_xi(k, p, a) + 0.5 * f0_of_xi(k, p, b) + 1e-8);
                }
            }
        }
    CHECK_THROWS_AS(f0_of_xi(KernelSpec::builtin("uniform", 1), 1.0, Vec{1.0, 0.0}), InvalidParameter);
}

TEST_CASE("Monte Carlo oracle examples") {
    const auto a = f0_monte_carlo_oracle(KernelSpec::builtin("uniform", 1), 2.0, Vec{1.0, 0.0}, 100000, 7);
    CHECK(std::abs(a.estimate - 1.0) <= 3.0 * a.std_error + 1e-12);
    const auto b = f0_monte_carlo_oracle(KernelSpec::builtin("uniform", 2), 2.0, Vec{0.0, 2.0}, 100000, 7);
    CHECK(std::abs(b.estimate - 2.0) <= 3.0 * b.std_error);
    CHECK(b.std_error > 0.0);
    const auto c = f0_monte_carlo_oracle(KernelSpec::builtin("triangle", 2), 3.0, Vec{0.0, 0.0}, 1000, 7);
    CHECK(c.estimate == 0.0);
}

TEST_CASE("kernel mass of the unit-coefficient triangle profile") {
    const KernelSpec k("triangle-c1", 1, [](double r) { return 1.0 - r; });
    CHECK(kernel_mass(k) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Monte Carlo oracle agrees with the quadrature within three standard errors") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    std::uniform_real_distribution<double> exponent(1.2, 4.0);
    const auto& names = KernelSpec::builtin_names();
    for (int c = 0; c < 20; ++c) {
        const int d = 1 + c % 2;
        const KernelSpec k = KernelSpec::builtin(names[c % names.size()], d);
        const double p = exponent(rng);
        const Vec xi{unit(rng), d == 2 ? unit(rng) : 0.0};
        const double q = f0_of_xi(k, p, xi);
        const MonteCarloEstimate mc = f0_monte_carlo_oracle(k, p, xi, 200000, 100 + c);
        CAPTURE(c);
        CHECK(std::abs(mc.estimate - q) <= 3.0 * mc.std_error + 1e-12 * std::abs(q));
    }
    CHECK_THROWS_AS(f0_monte_carlo_oracle(KernelSpec::builtin("uniform", 1), 2.0, Vec{1.0, 0.0}, 10, 1),
                    InvalidParameter);
}

TEST_CASE("scaled kernel obeys the scaling identity and keeps its mass") {
    for (int d : {1, 2})
        for (const auto& name : KernelSpec::builtin_names()) {
            const KernelSpec k = KernelSpec::builtin(name, d);
            for (double kk : {1.0, 3.0, 8.0}) {
                const Vec z{0.37 / kk, d == 2 ? -0.21 / kk : 0.0};
                const double lhs = eval_scaled_kernel(k, kk, z);
                const double rhs = std::pow(kk, d) * eval_scaled_kernel(k, 1.0, scaled(z, kk));
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));

                // Lattice sum with step <= 1/(8k), shifted off the origin.
                const int per_radius = d == 1 ? 64 : 256;
                const double h = 1.0 / (per_radius * kk);
                const int m = per_radius + 1;
                double sum = 0.0;
                for (int i = -m; i < m; ++i)
                    for (int j = (d == 2 ? -m : 0); j < (d == 2 ? m : 1); ++j)
                        sum += eval_scaled_kernel(k, kk, Vec{(i + 0.5) * h, d == 2 ? (j + 0.5) * h : 0.0});
                CAPTURE(name);
                CHECK(std::abs(sum * std::pow(h, d) - 1.0) <= 1e-3);
            }
        }
}
