#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "gammalab/densities.hpp"
#include "gammalab/energy.hpp"
#include "gammalab/error.hpp"
#include "gammalab/minimize.hpp"

using namespace gammalab;

namespace {

struct Oracle {
    double nonlocal = 0.0;
    double local = 0.0;
};

// Straightforward double loop over every ordered pair and every cell.
Oracle brute_force(const Grid& grid, std::span<const double> u, double k, const std::optional<NonlocalDensity>& f,
                   const std::optional<LocalDensity>& g, std::optional<double> eps) {
    const int d = grid.dimension();
    const double h = grid.h();
    const double hd = std::pow(h, d);
    Oracle out;
    if (f) {
        const double s = f->periodic ? 1.0 / *eps : 1.0;
        for (std::size_t i = 0; i < grid.node_count(); ++i)
            for (std::size_t j = 0; j < grid.node_count(); ++j) {
                if (i == j) continue;
                const Vec x = grid.position(i), y = grid.position(j);
                out.nonlocal += std::pow(k, d) * (*f)(scaled(x, s), scaled(y, s), scaled(x - y, k), k * (u[i] - u[j]));
            }
        out.nonlocal *= hd * hd;
    }
    if (g) {
        const double s = g->periodic ? 1.0 / *eps : 1.0;
        const std::size_t n = grid.n();
        if (d == 1) {
            for (std::size_t c = 0; c + 1 < n; ++c)
                out.local += (*g)(Vec{(c + 0.5) * h * s, 0.0}, Vec{(u[c + 1] - u[c]) / h, 0.0});
        } else {
            for (std::size_t j = 0; j + 1 < n; ++j)
                for (std::size_t i = 0; i + 1 < n; ++i) {
                    const std::size_t a = grid.index(i, j);
                    out.local += (*g)(Vec{(i + 0.5) * h * s, (j + 0.5) * h * s},
                                      Vec{(u[a + 1] - u[a]) / h, (u[a + n] - u[a]) / h});
                }
        }
        out.local *= hd;
    }
    return out;
}

std::vector<double> random_field(std::size_t count, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(count);
    for (double& x : v) x = u(rng);
    return v;
}

NonlocalDensity kernel_density(const std::string& kernel, int d, double p) {
    return builtin_nonlocal("kernel-p-difference", {{"kernel", kernel}, {"dimension", double(d)}, {"p", p}});
}

// The same prototype without the kernel-power shortcut, forcing the generic pair loop.
NonlocalDensity generic(NonlocalDensity f) {
    f.kernel_power.reset();
    return f;
}

}  // namespace

TEST_CASE("grid geometry") {
    const Grid g(1, 11);
    CHECK(g.h() * 10 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.position(3)[0] == doctest::Approx(0.3));
    const Grid g2(2, 5);
    CHECK(g2.node_count() == 25);
    CHECK(g2.cell_count() == 16);
    CHECK(g2.ix(7) == 2);
    CHECK(g2.iy(7) == 1);
    CHECK(g2.boundary_distance(g2.index(1, 2)) == doctest::Approx(0.25));
    CHECK_THROWS_AS(Grid(1, 2), InvalidParameter);
    CHECK_THROWS_AS(Grid(3, 5), InvalidParameter);
}

TEST_CASE("energy matches the brute-force pair sum") {
    struct Case {
        int d;
        std::size_t n;
        double k;
        std::string kernel;
        double p;
    };
    for (const Case& c : {Case{1, 17, 4.0, "uniform", 2.0}, Case{1, 33, 3.0, "triangle", 3.0},
                          Case{1, 65, 8.0, "epanechnikov", 1.5}, Case{2, 9, 2.0, "uniform", 2.0},
                          Case{2, 13, 3.0, "triangle", 4.0}, Case{2, 11, 4.0, "epanechnikov", 2.5}}) {
        const Grid grid(c.d, c.n);
        const auto u = random_field(grid.node_count(), 7 + c.n);
        const NonlocalDensity f = kernel_density(c.kernel, c.d, c.p);
        const LocalDensity g = builtin_local("double-well-1d");
        const Oracle o = brute_force(grid, u, c.k, f, g, std::nullopt);
        for (const auto& ff : {f, generic(f)}) {
            const DiscreteEnergy e(grid, ff, g, {c.k, std::nullopt});
            const EnergyBreakdown b = e.energy(u);
            CAPTURE(c.d);
            CAPTURE(c.n);
            CHECK(b.nonlocal == doctest::Approx(o.nonlocal).epsilon(1e-12));
            CHECK(b.local == doctest::Approx(o.local).epsilon(1e-12));
            CHECK(b.total == doctest::Approx(b.nonlocal + b.local).epsilon(1e-15));
            CHECK(b.density == b.total);
        }
    }
}

TEST_CASE("periodic densities see the fast variable") {
    for (int d : {1, 2}) {
        const Grid grid(d, d == 1 ? 33 : 9);
        const auto u = random_field(grid.node_count(), 3);
        const NonlocalDensity f = builtin_nonlocal("periodic-kernel-p-difference", {{"dimension", double(d)}, {"b_max", 3.0}});
        const LocalDensity g = builtin_local("periodic-coefficient-local", {{"a_max", 4.0}});
        const double k = 4.0, eps = 0.25;
        const Oracle o = brute_force(grid, u, k, f, g, eps);
        for (const auto& ff : {f, generic(f)}) {
            const DiscreteEnergy e(grid, ff, g, {k, eps});
            const EnergyBreakdown b = e.energy(u);
            CHECK(b.nonlocal == doctest::Approx(o.nonlocal).epsilon(1e-12));
            CHECK(b.local == doctest::Approx(o.local).epsilon(1e-12));
        }
        CHECK_THROWS_AS(DiscreteEnergy(grid, f, g, {k, std::nullopt}), InvalidParameter);
    }
}

TEST_CASE("hat function in 1D matches a hand-computed double sum") {
    // n = 5, h = 1/4, u = hat at x = 1/2, uniform kernel k = 2 (pairs with |z| <= 1/2).
    const Grid grid(1, 5);
    const std::vector<double> u{0.0, 0.0, 1.0, 0.0, 0.0};
    const NonlocalDensity f = kernel_density("uniform", 1, 2.0);
    const DiscreteEnergy e(grid, f, std::nullopt, {2.0, std::nullopt});
    // Ordered pairs touching node 2 with |z| <= 1/2: partners 0, 1, 3, 4 at distances 1/2, 1/4, 1/4, 1/2.
    // Each contributes k psi(k z) (k tau)^2 / (k z)^2 = 2 * 1/2 * 1 / z^2 twice (both orders).
    const double h2 = 1.0 / 16.0;
    const double expected = h2 * 2.0 * (1.0 / 0.25 + 1.0 / 0.0625 + 1.0 / 0.0625 + 1.0 / 0.25);
    CHECK(e.energy(u).nonlocal == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("constant fields have zero energy and gradient") {
    for (int d : {1, 2}) {
        const Grid grid(d, 9);
        const std::vector<double> u(grid.node_count(), 0.7);
        const NonlocalDensity f = kernel_density("uniform", d, 2.0);
        const LocalDensity g = builtin_local("quadratic-local");
        const DiscreteEnergy e(grid, f, g, {3.0, std::nullopt});
        std::vector<double> grad(u.size());
        const EnergyBreakdown b = e.energy_and_gradient(u, grad);
        CHECK(b.nonlocal == 0.0);
        CHECK(b.local == 0.0);
        for (double v : grad) CHECK(v == 0.0);
    }
}

TEST_CASE("nonlocal term is translation invariant and nonnegative") {
    for (int d : {1, 2}) {
        const Grid grid(d, d == 1 ? 41 : 11);
        // Dyadic values keep the shifted differences exact.
        std::vector<double> u(grid.node_count());
        std::mt19937_64 rng(9);
        for (double& v : u) v = std::ldexp(static_cast<double>(rng() % 1024), -8);
        std::vector<double> shifted(u);
        for (double& v : shifted) v += 3.0;
        for (const auto& f : {kernel_density("triangle", d, 2.0), generic(kernel_density("triangle", d, 3.0))}) {
            const DiscreteEnergy e(grid, f, std::nullopt, {4.0, std::nullopt});
            CHECK(e.energy(u).nonlocal == e.energy(shifted).nonlocal);
            CHECK(e.energy(u).nonlocal >= 0.0);
        }
    }
}

TEST_CASE("ordered pair sum is twice the unordered sum") {
    const Grid grid(1, 33);
    const auto u = random_field(grid.node_count(), 5);
    const NonlocalDensity f = kernel_density("uniform", 1, 2.0);
    const double k = 4.0;
    double unordered = 0.0;
    for (std::size_t i = 0; i < grid.node_count(); ++i)
        for (std::size_t j = i + 1; j < grid.node_count(); ++j)
            unordered += k * f(grid.position(i), grid.position(j), scaled(grid.position(i) - grid.position(j), k),
                               k * (u[i] - u[j]));
    const double h2 = grid.h() * grid.h();
    const DiscreteEnergy e(grid, f, std::nullopt, {k, std::nullopt});
    CHECK(e.energy(u).nonlocal == doctest::Approx(2.0 * h2 * unordered).epsilon(1e-13));
}

TEST_CASE("analytic gradient matches central differences") {
    for (int d : {1, 2}) {
        const Grid grid(d, d == 1 ? 17 : 9);
        for (const char* local : {"quadratic-local", "double-well-1d"}) {
            const NonlocalDensity f = kernel_density("uniform", d, 2.0);
            const LocalDensity g = builtin_local(local);
            for (const auto& ff : {f, generic(f)}) {
                const DiscreteEnergy e(grid, ff, g, {2.0, std::nullopt});
                const Problem problem{e, ConstraintMask::none(grid.node_count())};
                CAPTURE(local);
                CAPTURE(d);
                CHECK(gradient_check(problem, 20, 1) <= 1e-6);
            }
        }
        const DiscreteEnergy p4(grid, kernel_density("epanechnikov", d, 4.0), std::nullopt, {3.0, std::nullopt});
        CHECK(gradient_check(Problem{p4, ConstraintMask::none(grid.node_count())}, 5, 2) <= 1e-6);
    }
}

TEST_CASE("gradient is linear in the quadratic case") {
    for (int d : {1, 2}) {
        const Grid grid(d, d == 1 ? 17 : 7);
        const DiscreteEnergy e(grid, kernel_density("uniform", d, 2.0), builtin_local("quadratic-local"),
                               {2.0, std::nullopt});
        const auto u = random_field(grid.node_count(), 1), v = random_field(grid.node_count(), 2);
        std::vector<double> w(u.size()), zero(u.size(), 0.0);
        for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] + v[i];
        std::vector<double> gu(u.size()), gv(u.size()), gw(u.size()), g0(u.size());
        e.energy_and_gradient(u, gu);
        e.energy_and_gradient(v, gv);
        e.energy_and_gradient(w, gw);
        e.energy_and_gradient(zero, g0);
        for (std::size_t i = 0; i < u.size(); ++i) CHECK(gw[i] == doctest::Approx(gu[i] + gv[i] - g0[i]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("energy change equals the difference of energies") {
    for (int d : {1, 2}) {
        const Grid grid(d, d == 1 ? 33 : 9);
        const auto u = random_field(grid.node_count(), 4);
        auto v = u;
        std::mt19937_64 rng(8);
        for (double& x : v) x += 1e-3 * (static_cast<double>(rng() % 1000) / 1000.0 - 0.5);
        const LocalDensity g = builtin_local("double-well-1d");
        for (const auto& f : {kernel_density("triangle", d, 2.0), kernel_density("uniform", d, 3.0),
                              generic(kernel_density("uniform", d, 2.0))}) {
            const DiscreteEnergy e(grid, f, g, {3.0, std::nullopt});
            const double plain = e.energy(v).total - e.energy(u).total;
            CHECK(e.energy_change(u, v) == doctest::Approx(plain).epsilon(1e-8));
            CHECK(e.energy_change(u, u) == 0.0);
        }
    }
}

TEST_CASE("assembly reproduces bit-identical results") {
    const Grid grid(2, 15);
    const auto u = random_field(grid.node_count(), 12);
    const DiscreteEnergy e(grid, kernel_density("uniform", 2, 2.0), builtin_local("double-well-1d"), {4.0, std::nullopt});
    std::vector<double> g1(u.size()), g2(u.size());
    const auto a = e.energy_and_gradient(u, g1);
    const auto b = e.energy_and_gradient(u, g2);
    CHECK(a.total == b.total);
    CHECK(g1 == g2);
    const Field fu(grid, u);
    CHECK(assemble_energy(fu, 4.0, kernel_density("uniform", 2, 2.0), builtin_local("double-well-1d")).total == a.total);
    CHECK(assemble_gradient(fu, 4.0, kernel_density("uniform", 2, 2.0), builtin_local("double-well-1d")).values == g1);
}

TEST_CASE("invalid inputs are rejected") {
    const Grid grid(1, 9);
    const DiscreteEnergy e(grid, kernel_density("uniform", 1, 2.0), std::nullopt, {2.0, std::nullopt});
    std::vector<double> u(9, 0.0);
    u[3] = NAN;
    CHECK_THROWS_AS(e.energy(u), InvalidInput);
    CHECK_THROWS_AS(e.energy(std::vector<double>(8, 0.0)), InvalidInput);
    CHECK_THROWS_AS(DiscreteEnergy(grid, kernel_density("uniform", 1, 2.0), std::nullopt, {0.0, std::nullopt}),
                    InvalidParameter);
    CHECK_THROWS_AS(DiscreteEnergy(grid, kernel_density("uniform", 2, 2.0), std::nullopt, {2.0, std::nullopt}),
                    InvalidParameter);
}

TEST_CASE("boundary layer masks") {
    const AffineFunction w{{2.0, -1.0}, 0.5};
    const ConstraintMask m0 = boundary_layer_mask(Grid(1, 11), w, 0.0);
    CHECK(m0.pinned_count() == 2);
    CHECK(m0.is_pinned(0));
    CHECK(m0.is_pinned(10));
    CHECK(m0.values[10] == doctest::Approx(2.5));
    const ConstraintMask m1 = boundary_layer_mask(Grid(1, 11), w, 0.15);
    for (std::size_t i = 0; i < 11; ++i) CHECK(m1.is_pinned(i) == (i <= 1 || i >= 9));
    const ConstraintMask m2 = boundary_layer_mask(Grid(2, 5), w, 0.0);
    CHECK(m2.pinned_count() == 16);
    CHECK(m2.free_count() == 9);
    // A node at exactly the layer distance is pinned.
    const ConstraintMask m3 = boundary_layer_mask(Grid(1, 9), w, 0.25);
    CHECK(m3.pinned_count() == 6);
    CHECK_THROWS_AS(boundary_layer_mask(Grid(1, 11), w, 0.5), InvalidParameter);
    CHECK_THROWS_AS(boundary_layer_mask(Grid(1, 11), w, -0.1), InvalidParameter);
}

TEST_CASE("diagonal bound") {
    const NonlocalDensity f = kernel_density("uniform", 1, 2.0);
    const Grid grid(1, 65);
    const Field constant(grid, std::vector<double>(65, 1.0));
    const DiagonalBound c = diagonal_bound_check(constant, 8.0, f);
    CHECK(c.lhs == 0.0);
    CHECK(c.rhs == 0.0);
    CHECK(c.pass);
    Field affine(grid);
    for (std::size_t i = 0; i < 65; ++i) affine[i] = 2.0 * grid.position(i)[0];
    const DiagonalBound a = diagonal_bound_check(affine, 8.0, f);
    CHECK(a.pass);
    CHECK(a.lhs > 0.0);
    CHECK(a.lhs <= a.rhs);
    CHECK_THROWS_AS(diagonal_bound_check(affine, 8.0, builtin_nonlocal("periodic-kernel-p-difference")),
                    InvalidParameter);
}

TEST_CASE("field CSV round trip is bit exact") {
    for (int d : {1, 2}) {
        const Grid grid(d, 7);
        Field f(grid, random_field(grid.node_count(), 21, 1e3));
        f[0] = 1.0 / 3.0;
        f[1] = -0.0;
        f[2] = 5e-310;
        std::stringstream s;
        write_field_csv(s, f);
        const Field back = read_field_csv(s);
        CHECK(back.grid == grid);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::memcmp(&back.values[i], &f.values[i], sizeof(double)) == 0);
    }
    std::stringstream bad("i,x,value\n0,0,1\n1,zz,2\n");
    CHECK_THROWS_AS(read_field_csv(bad), InvalidInput);
    CHECK(format_double(0.1) == "0.10000000000000001");
}
