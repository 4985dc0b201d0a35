#include <doctest.h>

#include <cmath>
#include <random>

#include "gammalab/densities.hpp"
#include "gammalab/error.hpp"
#include "gammalab/hypotheses.hpp"

using namespace gammalab;

TEST_CASE("built-in local densities evaluate as documented") {
    const LocalDensity dw = builtin_local("double-well-1d", {{"delta", 0.1}});
    CHECK(dw(Vec{0.0, 0.0}, Vec{1.0, 0.0}) == doctest::Approx(0.1));
    CHECK(dw(Vec{0.0, 0.0}, Vec{-1.0, 0.0}) == doctest::Approx(0.1));
    CHECK(dw(Vec{0.0, 0.0}, Vec{0.0, 0.0}) == 1.0);
    for (double xi : {-2.3, -0.4, 0.2, 0.9, 3.0}) {
        const double direct = std::min((xi - 1) * (xi - 1), (xi + 1) * (xi + 1)) + 0.1 * xi * xi;
        CHECK(dw(Vec{0.3, 0.0}, Vec{xi, 0.0}) == doctest::Approx(direct).epsilon(1e-14));
    }
    CHECK(dw.c0 == 0.1);
    CHECK(dw.p == 2.0);

    const LocalDensity q = builtin_local("quadratic-local");
    CHECK(q(Vec{0.5, 0.5}, Vec{0.0, 0.0}) == 0.0);
    CHECK(q(Vec{0.5, 0.5}, Vec{3.0, 4.0}) == doctest::Approx(25.0));

    const LocalDensity a = builtin_local("periodic-coefficient-local", {{"a_min", 1.0}, {"a_max", 2.0}});
    CHECK(a.periodic);
    CHECK(a(Vec{0.0, 0.0}, Vec{1.0, 0.0}) == doctest::Approx(2.0));
    CHECK(a(Vec{0.5, 0.0}, Vec{1.0, 0.0}) == doctest::Approx(1.0));
    CHECK(a(Vec{1.25, 0.0}, Vec{2.0, 0.0}) == doctest::Approx(a(Vec{0.25, 0.0}, Vec{2.0, 0.0})));
}

TEST_CASE("kernel-p-difference matches the prototype value") {
    const NonlocalDensity f = builtin_nonlocal("kernel-p-difference", {{"kernel", std::string("uniform")}, {"p", 2.0}});
    CHECK(f(Vec{0.0, 0.0}, Vec{0.5, 0.0}, Vec{0.5, 0.0}, 1.0) == doctest::Approx(2.0));
    CHECK(f(Vec{0.0, 0.0}, Vec{1.5, 0.0}, Vec{1.5, 0.0}, 1.0) == 0.0);
    CHECK(f.kernel_power.has_value());
    CHECK_FALSE(f.periodic);

    const NonlocalDensity fp = builtin_nonlocal("periodic-kernel-p-difference", {{"b_min", 1.0}, {"b_max", 3.0}});
    CHECK(fp.periodic);
    // Weight (b(x) + b(y)) / 2 with b(0) = 3 and b(1/2) = 1.
    CHECK(fp(Vec{0.0, 0.0}, Vec{0.5, 0.0}, Vec{0.5, 0.0}, 1.0) == doctest::Approx(2.0 * 2.0));
}

TEST_CASE("parameter handling rejects unknown names, keys and types") {
    CHECK_THROWS_AS(builtin_density("no-such-density"), InvalidParameter);
    CHECK_THROWS_AS(builtin_local("double-well-1d", {{"gamma", 1.0}}), InvalidParameter);
    CHECK_THROWS_AS(builtin_local("double-well-1d", {{"delta", std::string("x")}}), InvalidParameter);
    CHECK_THROWS_AS(builtin_local("double-well-1d", {{"delta", 0.0}}), InvalidParameter);
    CHECK_THROWS_AS(builtin_local("kernel-p-difference"), InvalidParameter);
    CHECK_THROWS_AS(builtin_density("uniform"), InvalidParameter);
    CHECK_THROWS_AS(builtin_nonlocal("kernel-p-difference", {{"p", 1.0}}), InvalidParameter);
    CHECK_THROWS_AS(builtin_nonlocal("kernel-p-difference", {{"dimension", 3.0}}), InvalidParameter);
    const ParamMap resolved = resolve_params("periodic-coefficient-local", {{"a_max", 5.0}});
    CHECK(std::get<double>(resolved.at("a_min")) == 1.0);
    CHECK(std::get<double>(resolved.at("a_max")) == 5.0);
    CHECK(std::get<double>(resolved.at("p")) == 2.0);
}

TEST_CASE("catalog lists every built-in with its parameter schema") {
    const BuiltinInfo& pc = builtin_info("periodic-coefficient-local");
    std::vector<std::string> names;
    for (const auto& s : pc.params) names.push_back(s.name);
    CHECK(std::find(names.begin(), names.end(), "a_min") != names.end());
    CHECK(std::find(names.begin(), names.end(), "a_max") != names.end());
    for (const char* n : {"quadratic-local", "double-well-1d", "periodic-coefficient-local", "kernel-p-difference",
                          "periodic-kernel-p-difference", "uniform", "triangle", "epanechnikov"})
        CHECK_NOTHROW(builtin_info(n));
}

TEST_CASE("difference callbacks agree with plain differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const char* name : {"quadratic-local", "double-well-1d", "periodic-coefficient-local"}) {
        const LocalDensity g = builtin_local(name, {});
        for (int i = 0; i < 200; ++i) {
            const Vec x{u(rng), u(rng)}, xi{u(rng), u(rng)}, dxi{u(rng), u(rng)};
            const double plain = g(x, xi + dxi) - g(x, xi);
            CHECK(g.change(x, xi, dxi) == doctest::Approx(plain).epsilon(1e-10).scale(1.0 + std::abs(g(x, xi))));
        }
        // Tiny increments keep their relative accuracy.
        const Vec xi{1.3, 0.0}, dxi{1e-9, 0.0};
        const Vec grad = g.grad_xi(Vec{0.2, 0.0}, xi);
        CHECK(g.change(Vec{0.2, 0.0}, xi, dxi) == doctest::Approx(grad[0] * 1e-9).epsilon(1e-6));
    }
}

TEST_CASE("vector power helpers are cancellation free") {
    CHECK(abs_pow_change(1.0, 1e-12, 2.0) == doctest::Approx(2e-12).epsilon(1e-9));
    CHECK(abs_pow_change(-2.0, 0.5, 3.0) == doctest::Approx(std::pow(1.5, 3) - 8.0).epsilon(1e-14));
    CHECK(pow_difference(2.0, 1e-10, 2.5) == doctest::Approx(2.5 * std::pow(2.0, 1.5) * 1e-10).epsilon(1e-8));
    CHECK(norm_pow_change(Vec{3.0, 4.0}, Vec{0.0, 0.0}, 2.0) == 0.0);
    CHECK(norm_pow_change(Vec{3.0, 4.0}, Vec{-3.0, -4.0}, 1.5) == doctest::Approx(-std::pow(5.0, 1.5)));
}

TEST_CASE("every built-in passes its own growth hypotheses") {
    for (int d : {1, 2})
        for (const auto& info : builtin_catalog()) {
            if (info.kind == "kernel") continue;
            ParamMap params;
            if (info.kind == "nonlocal") params["dimension"] = static_cast<double>(d);
            SamplingPlan plan;
            plan.dimension = d;
            plan.count = 10000;
            const HypothesisReport r = validate_growth(builtin_density(info.name, params), plan);
            CAPTURE(info.name);
            CAPTURE(d);
            CHECK(r.all_pass());
            CHECK(r.sample_count == 10000);
            for (const auto& c : r.conditions) {
                CHECK(c.violations == 0);
                CHECK(c.worst_sample.empty());
            }
        }
}

TEST_CASE("a density without coercivity fails the lower growth bound") {
    LocalDensity broken;
    broken.name = "xi^2 - 1";
    broken.value = [](const Vec&, const Vec& xi) { return dot(xi, xi) - 1.0; };
    broken.p = 2.0;
    broken.c0 = 1.0;
    broken.c1 = 1.0;
    broken.a0 = 0.0;
    SamplingPlan plan;
    const HypothesisReport r = validate_growth(broken, plan);
    CHECK_FALSE(r.all_pass());
    const ConditionResult* lower = r.find("growth-lower");
    REQUIRE(lower != nullptr);
    CHECK_FALSE(lower->pass);
    CHECK(lower->violations > 0);
    CHECK_FALSE(lower->worst_sample.empty());
    // The worst violation is attained at xi = 0 where g = -1 < 0.
    CHECK(lower->violation == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lower->worst_sample.find("xi=0") != std::string::npos);
}

TEST_CASE("nonlocal validator catches support and comparison violations") {
    NonlocalDensity f = builtin_nonlocal("kernel-p-difference");
    const auto base = f.value;
    f.value = [base](const Vec& x, const Vec& y, const Vec& z, double tau) {
        return norm(z) > 1.0 ? 1.0 : 0.5 * base(x, y, z, tau);
    };
    const HypothesisReport r = validate_growth(f, SamplingPlan{});
    CHECK_FALSE(r.find("compact-support")->pass);
    CHECK_FALSE(r.find("kernel-comparison-lower")->pass);
    CHECK(r.find("kernel-comparison-upper")->pass);
}

TEST_CASE("validation is deterministic for a fixed seed") {
    const Density d = builtin_density("double-well-1d");
    SamplingPlan plan;
    plan.seed = 42;
    const HypothesisReport a = validate_growth(d, plan);
    const HypothesisReport b = validate_growth(d, plan);
    REQUIRE(a.conditions.size() == b.conditions.size());
    for (std::size_t i = 0; i < a.conditions.size(); ++i) CHECK(a.conditions[i].violation == b.conditions[i].violation);
}
