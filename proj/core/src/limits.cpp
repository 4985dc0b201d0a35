#include "gammalab/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "gammalab/convexify.hpp"
#include "gammalab/error.hpp"
#include "gammalab/parallel.hpp"
#include "gammalab/quadrature.hpp"

namespace gammalab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRelativeTolerance = 0.05;
constexpr double kAbsoluteTolerance = 1e-6;

bool fits(const GridRule& rule, std::size_t cells, std::size_t reach) {
    const double n = static_cast<double>(cells + 1);
    const double nodes = rule.dimension == 1 ? n : n * n;
    // Interacting offsets per node: the lattice half-ball of radius `reach`.
    const double r = static_cast<double>(reach);
    const double per_node = rule.dimension == 1 ? r : 0.5 * std::numbers::pi * r * r;
    return nodes <= static_cast<double>(rule.max_nodes) && nodes * per_node <= static_cast<double>(rule.max_pairs);
}

bool within_tolerance(double gap, double value) {
    return gap <= kRelativeTolerance * std::abs(value) || gap <= kAbsoluteTolerance;
}

}  // namespace

void GridRule::validate() const {
    if (dimension != 1 && dimension != 2) throw InvalidParameter("dimension must be 1 or 2");
    if (cells_per_unit < 1) throw InvalidParameter("cells_per_unit must be >= 1");
    if (!(refinement >= 0.0) || !std::isfinite(refinement)) throw InvalidParameter("refinement must be >= 0");
}

std::size_t GridRule::cells_per_radius(double k) const {
    return static_cast<std::size_t>(std::max(1LL, std::llround(cells_per_unit * std::pow(k, refinement))));
}

Grid GridRule::sweep_grid(double k) const {
    validate();
    if (!(k > 0.0)) throw InvalidParameter("k must be positive");
    if (!sweep_feasible(k)) throw InvalidParameter("grid exceeds the node or pair cap");
    const auto cells = static_cast<std::size_t>(std::llround(static_cast<double>(cells_per_radius(k)) * k));
    return Grid(dimension, std::max<std::size_t>(cells, 2) + 1);
}

Grid GridRule::cell_grid(int T) const {
    validate();
    if (T < 1) throw InvalidParameter("cell size T must be a positive integer");
    if (!cell_feasible(T)) throw InvalidParameter("grid exceeds the node or pair cap");
    return Grid(dimension, static_cast<std::size_t>(cells_per_unit) * static_cast<std::size_t>(T) + 1);
}

double GridRule::micro_scale(double k) const { return 8.0 / (static_cast<double>(cells_per_radius(k)) * k); }

bool GridRule::sweep_feasible(double k) const {
    const std::size_t reach = cells_per_radius(k);
    return fits(*this, static_cast<std::size_t>(std::llround(static_cast<double>(reach) * k)), reach);
}

bool GridRule::cell_feasible(int T) const {
    const auto reach = static_cast<std::size_t>(cells_per_unit);
    return fits(*this, reach * static_cast<std::size_t>(std::max(T, 1)), reach);
}

const char* to_string(LayerMode mode) { return mode == LayerMode::trace ? "trace" : "layer"; }

LayerMode layer_mode_from_string(const std::string& name) {
    if (name == "trace") return LayerMode::trace;
    if (name == "layer") return LayerMode::layer;
    throw InvalidParameter("layer mode must be 'trace' or 'layer', got '" + name + "'");
}

std::vector<double> SweepReport::parameters() const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.parameter);
    return out;
}

std::vector<double> SweepReport::densities() const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.energy.density);
    return out;
}

std::vector<double> SweepReport::gaps() const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.gap);
    return out;
}

double relaxed_local_density(const LocalDensity& g0, const Vec& xi, int dimension) {
    if (g0.periodic) throw InvalidParameter("relaxed density needs an x-independent local density");
    const Vec origin{0.0, 0.0};
    if (dimension == 1) {
        // Dyadic spacing puts dyadic slopes exactly on sample points.
        constexpr double per_unit = 512.0;
        const double window = std::ceil(std::max(4.0, 2.0 * std::abs(xi[0]) + 2.0));
        const auto count = static_cast<std::size_t>(2.0 * per_unit * window) + 1;
        const auto f = SampledFunction1D::sample([&](double t) { return g0(origin, {t, 0.0}); }, -window, window,
                                                 count);
        return convex_envelope_at(f, xi[0]);
    }
    if (dimension == 2) {
        constexpr double per_unit = 16.0;
        const double window = std::ceil(std::max(2.0, 1.5 * norm(xi) + 1.0));
        const auto count = static_cast<std::size_t>(2.0 * per_unit * window) + 1;
        const auto f = SampledFunction2D::sample([&](const Vec& t) { return g0(origin, t); }, -window, window, count);
        return convex_envelope_2d_at(f, xi);
    }
    throw InvalidParameter("dimension must be 1 or 2");
}

double separation_density(const KernelSpec& kernel, double p, const LocalDensity& g0, const Vec& xi) {
    return f0_of_xi(kernel, p, xi) + relaxed_local_density(g0, xi, kernel.dimension());
}

std::optional<double> predicted_separation_limit(const SweepSetup& setup) {
    if (!setup.f && !setup.g) return std::nullopt;
    double out = 0.0;
    if (setup.f) {
        const NonlocalDensity& f = *setup.f;
        if (f.periodic || !f.kernel_power || f.kernel_power->weight || !f.kernel) return std::nullopt;
        out += f0_of_xi(*f.kernel, f.p, setup.xi);
    }
    if (setup.g) {
        if (setup.g->periodic) return std::nullopt;
        out += relaxed_local_density(*setup.g, setup.xi, setup.rule.dimension);
    }
    return out;
}

namespace {

void check_setup(const SweepSetup& setup) {
    if (!setup.f && !setup.g) throw InvalidParameter("sweep needs at least one density");
    if (setup.rule.dimension != 1 && setup.rule.dimension != 2) throw InvalidParameter("dimension must be 1 or 2");
    if (setup.f && setup.f->kernel && setup.f->kernel->dimension() != setup.rule.dimension)
        throw InvalidParameter("kernel dimension differs from the grid dimension");
    setup.solver.validate();
}

bool any_periodic(const SweepSetup& setup) {
    return (setup.f && setup.f->periodic) || (setup.g && setup.g->periodic);
}

std::string failure(const std::exception& e) { return std::string("failed: ") + e.what(); }

struct Solved {
    MinResult min;
    double affine_density;
};

Solved solve(const SweepSetup& setup, const Grid& grid, double k, std::optional<double> eps_period,
             double layer) {
    const DiscreteEnergy energy(grid, setup.f, setup.g, {k, eps_period});
    const AffineFunction w{setup.xi, 0.0};
    Problem problem{energy, boundary_layer_mask(grid, w, layer)};
    Field affine(grid);
    for (std::size_t i = 0; i < grid.node_count(); ++i) affine[i] = w(grid.position(i));
    const double affine_density = energy.energy(affine.values).density;
    return {minimize(problem, setup.solver), affine_density};
}

void fill_point(SweepPoint& point, Solved&& solved, bool keep_field) {
    point.nodes = solved.min.field.size();
    point.energy = solved.min.energy;
    point.converged = solved.min.converged;
    point.iterations = solved.min.iterations;
    point.affine_density = solved.affine_density;
    point.restart_energies = solved.min.restart_energies;
    point.inconclusive = solved.min.restart_spread() > kRelativeTolerance;
    if (keep_field) point.field = std::move(solved.min.field);
}

std::optional<double> extrapolate_tail(const std::vector<SweepPoint>& points) {
    std::vector<double> t, v;
    for (const auto& p : points) {
        if (!p.ok()) continue;
        t.push_back(1.0 / p.parameter);
        v.push_back(p.energy.density);
    }
    if (t.size() < 3) return std::nullopt;
    return richardson_extrapolate(std::span(t).last(3), std::span(v).last(3));
}

}  // namespace

SweepReport epsilon_sweep(const SweepSetup& setup, std::span<const double> k_list) {
    check_setup(setup);
    if (k_list.empty()) throw InvalidParameter("k_list is empty");
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        if (!(k_list[i] > 0.0) || !std::isfinite(k_list[i])) throw InvalidParameter("k values must be positive");
        if (i > 0 && !(k_list[i] > k_list[i - 1])) throw InvalidParameter("k_list must be increasing");
    }
    setup.rule.validate();
    if (setup.rule.two_scale) {
        for (double k : k_list)
            if (setup.rule.cells_per_radius(k) < 64)
                throw InvalidParameter("two-scale resolution needs >= 64 cells per kernel radius "
                                       "(h <= eps_micro/8, eps_micro <= 1/(8k)) at k = " + format_double(k));
    }

    SweepReport report;
    report.parameter_name = "k";
    report.mode = std::string("sweep-eps/") + to_string(setup.layer);
    report.xi = setup.xi;
    report.predicted_limit = predicted_separation_limit(setup);
    report.points.resize(k_list.size());

    std::optional<double> largest_feasible;
    bool truncated = false;
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        report.points[i].parameter = k_list[i];
        if (truncated || !setup.rule.sweep_feasible(k_list[i])) {
            truncated = true;
            report.points[i].status = "truncated";
        } else {
            largest_feasible = k_list[i];
        }
    }

    parallel_for(k_list.size(), setup.jobs, [&](std::size_t i) {
        SweepPoint& point = report.points[i];
        if (point.status == "truncated") return;
        const double k = point.parameter;
        try {
            const Grid grid = setup.rule.sweep_grid(k);
            const std::optional<double> eps = any_periodic(setup) ? std::optional<double>(1.0 / k) : std::nullopt;
            const double layer = setup.layer == LayerMode::trace ? 0.0 : 1.0 / k;
            fill_point(point, solve(setup, grid, k, eps, layer), setup.keep_fields);
        } catch (const Error& e) {
            point.status = failure(e);
        }
        point.alternate_density = kNaN;
        point.gap = report.predicted_limit ? std::abs(point.energy.density - *report.predicted_limit) : kNaN;
    });

    report.extrapolated_value = extrapolate_tail(report.points);

    // Convergent: no failures and the gaps (or successive differences without a
    // prediction) do not grow over the last three computed points.
    std::vector<double> tail;
    bool failed = false;
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        const SweepPoint& p = report.points[i];
        if (p.status.rfind("failed", 0) == 0) failed = true;
        if (!p.ok()) continue;
        if (report.predicted_limit) tail.push_back(p.gap);
        else if (i > 0 && report.points[i - 1].ok())
            tail.push_back(std::abs(p.energy.density - report.points[i - 1].energy.density));
    }
    if (tail.size() > 3) tail.erase(tail.begin(), tail.end() - 3);
    bool decreasing = tail.size() >= 2;
    for (std::size_t i = 1; i < tail.size(); ++i)
        decreasing = decreasing && (tail[i] < tail[i - 1] || tail[i] <= kAbsoluteTolerance);
    report.convergent = !failed && decreasing;

    if (failed) report.verdict = "not convergent: a sweep point failed";
    else if (!decreasing) report.verdict = "not convergent: gaps do not decrease on the tail";
    else report.verdict = "convergent";
    if (truncated) {
        report.verdict += largest_feasible ? "; truncated, largest feasible k = " + format_double(*largest_feasible)
                                           : "; truncated, no feasible k";
    }
    return report;
}

CellResult cell_problem(const SweepSetup& setup, int T, LayerMode layer) {
    check_setup(setup);
    if (T < 1) throw InvalidParameter("cell size T must be a positive integer");
    if (setup.rule.cells_per_unit < 8) throw InvalidParameter("cell problems need >= 8 cells per period");
    const double units = static_cast<double>(T);
    const Grid grid = setup.rule.cell_grid(T);
    const std::optional<double> eps = any_periodic(setup) ? std::optional<double>(1.0 / units) : std::nullopt;
    const double width = layer == LayerMode::trace ? 0.0 : 1.0 / units;
    Solved solved = solve(setup, grid, units, eps, width);
    return {units, std::move(solved.min), solved.affine_density};
}

double cell_energy(const SweepSetup& setup, int T, LayerMode layer) {
    return cell_problem(setup, T, layer).min.energy.density;
}

SweepReport g_hom_estimate(const SweepSetup& setup, std::span<const int> T_list) {
    check_setup(setup);
    if (T_list.size() < 3) throw InvalidParameter("T_list needs at least three values");
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        if (T_list[i] < 1) throw InvalidParameter("T values must be positive integers");
        if (i > 0 && T_list[i] <= T_list[i - 1]) throw InvalidParameter("T_list must be increasing");
    }

    SweepReport report;
    report.parameter_name = "T";
    report.mode = "cell";
    report.xi = setup.xi;
    report.predicted_limit = predicted_separation_limit(setup);
    report.points.resize(T_list.size());

    // Both boundary variants of every T are independent jobs.
    std::vector<std::string> alternate_status(T_list.size());
    parallel_for(2 * T_list.size(), setup.jobs, [&](std::size_t job) {
        const std::size_t i = job / 2;
        const bool trace = job % 2 == 0;
        SweepPoint& point = report.points[i];
        try {
            CellResult cell = cell_problem(setup, T_list[i], trace ? LayerMode::trace : LayerMode::layer);
            if (trace) {
                point.parameter = cell.T;
                fill_point(point, {std::move(cell.min), cell.affine_density}, setup.keep_fields);
            } else {
                point.alternate_density = cell.min.energy.density;
            }
        } catch (const Error& e) {
            if (trace) {
                point.parameter = T_list[i];
                point.status = failure(e);
            } else {
                point.alternate_density = kNaN;
                alternate_status[i] = e.what();
            }
        }
    });
    for (auto& point : report.points)
        point.gap = report.predicted_limit ? std::abs(point.energy.density - *report.predicted_limit) : kNaN;

    bool failed = false;
    for (const auto& p : report.points) failed = failed || !p.ok();
    for (std::size_t i = 1; i < report.points.size(); ++i)
        report.cauchy_gaps.push_back(std::abs(report.points[i].energy.density - report.points[i - 1].energy.density));
    report.extrapolated_value = extrapolate_tail(report.points);

    const SweepPoint& last = report.points.back();
    const bool cauchy = !failed && within_tolerance(report.cauchy_gaps.back(), last.energy.density);
    const bool variants = std::isfinite(last.alternate_density) &&
                          within_tolerance(std::abs(last.alternate_density - last.energy.density), last.energy.density);
    report.convergent = cauchy && variants;
    if (failed) report.verdict = "not convergent: a cell problem failed";
    else if (!cauchy) report.verdict = "not convergent: last Cauchy gap exceeds tolerance";
    else if (!variants)
        report.verdict = alternate_status.back().empty()
                             ? "not convergent: trace and layer variants disagree"
                             : "not convergent: layer variant failed: " + alternate_status.back();
    else report.verdict = "convergent";
    return report;
}

namespace {

std::string csv_safe(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    return text;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
    out << report.parameter_name
        << ",nodes,nonlocal,local,total,density,gap,affine_density,alternate_density,converged,inconclusive,"
           "iterations,status\n";
    for (const auto& p : report.points) {
        out << format_double(p.parameter) << ',' << p.nodes << ',' << format_double(p.energy.nonlocal) << ','
            << format_double(p.energy.local) << ',' << format_double(p.energy.total) << ','
            << format_double(p.energy.density) << ',' << format_double(p.gap) << ','
            << format_double(p.affine_density) << ',' << format_double(p.alternate_density) << ','
            << (p.converged ? 1 : 0) << ',' << (p.inconclusive ? 1 : 0) << ',' << p.iterations << ','
            << csv_safe(p.status) << '\n';
    }
}

double richardson_extrapolate(std::span<const double> t, std::span<const double> v) {
    if (t.size() != 3 || v.size() != 3) throw InvalidParameter("extrapolation needs exactly three points");
    if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2]) throw InvalidParameter("extrapolation abscissae must differ");
    // Lagrange form of the interpolating quadratic evaluated at t = 0.
    const double l0 = t[1] * t[2] / ((t[0] - t[1]) * (t[0] - t[2]));
    const double l1 = t[0] * t[2] / ((t[1] - t[0]) * (t[1] - t[2]));
    const double l2 = t[0] * t[1] / ((t[2] - t[0]) * (t[2] - t[1]));
    return v[0] * l0 + v[1] * l1 + v[2] * l2;
}

}  // namespace gammalab
