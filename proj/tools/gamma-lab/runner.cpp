#include "runner.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gammalab/convexify.hpp"
#include "gammalab/error.hpp"
#include "gammalab/grid.hpp"
#include "gammalab/hypotheses.hpp"
#include "gammalab/quadrature.hpp"

#ifndef GAMMALAB_VERSION
#define GAMMALAB_VERSION "unknown"
#endif

namespace gammalab::cli {

using nlohmann::ordered_json;

std::string tool_version() { return GAMMALAB_VERSION; }

namespace {

// Non-finite values are not representable in JSON; they become null.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json vec_json(const Vec& v, int dimension) {
    ordered_json out = ordered_json::array();
    for (int i = 0; i < dimension; ++i) out.push_back(number(v[i]));
    return out;
}

ordered_json energy_json(const EnergyBreakdown& e) {
    return {{"nonlocal", number(e.nonlocal)}, {"local", number(e.local)}, {"total", number(e.total)},
            {"density", number(e.density)}};
}

ordered_json params_json(const ParamMap& params) {
    ordered_json out = ordered_json::object();
    for (const auto& [key, value] : params) {
        if (std::holds_alternative<double>(value)) out[key] = std::get<double>(value);
        else out[key] = std::get<std::string>(value);
    }
    return out;
}

ordered_json config_json(const ExperimentConfig& c) {
    ordered_json out;
    out["experiment"] = c.experiment;
    out["seed"] = c.seed;
    out["jobs"] = c.jobs;
    out["output"] = c.output;
    out["dimension"] = c.dimension;
    if (c.nonlocal) out["nonlocal"] = {{"name", c.nonlocal->name}, {"params", params_json(c.nonlocal->params)}};
    if (c.local) out["local"] = {{"name", c.local->name}, {"params", params_json(c.local->params)}};
    out["xi"] = vec_json(c.xi, c.dimension);
    out["layer"] = to_string(c.layer);
    out["k_list"] = c.k_list;
    out["T_list"] = c.T_list;
    out["T"] = c.T;
    out["dump_fields"] = c.dump_fields;
    out["grid"] = {{"cells_per_unit", c.grid.cells_per_unit}, {"refinement", c.grid.refinement},
                   {"two_scale", c.grid.two_scale},           {"max_nodes", c.grid.max_nodes},
                   {"max_pairs", c.grid.max_pairs}};
    out["solver"] = {{"max_iters", c.solver.max_iters},
                     {"grad_tol", c.solver.grad_tol},
                     {"grad_tol_floor", c.solver.grad_tol_floor},
                     {"step_init", c.solver.step_init},
                     {"armijo_c", c.solver.armijo_c},
                     {"backtrack_factor", c.solver.backtrack_factor},
                     {"restarts", c.solver.restarts},
                     {"perturbation", c.solver.perturbation},
                     {"perturbation_decay", c.solver.perturbation_decay}};
    ordered_json xis = ordered_json::array();
    for (const Vec& v : c.f0.xi) xis.push_back(vec_json(v, c.dimension));
    out["f0"] = {{"kernel", c.f0.kernel}, {"p", c.f0.p}, {"xi", xis},
                 {"monte_carlo_samples", c.f0.monte_carlo_samples}};
    out["envelope"] = {{"lo", c.envelope.lo}, {"hi", c.envelope.hi}, {"count", c.envelope.count}};
    out["validate"] = {{"samples", c.validate.samples},     {"x_extent", c.validate.x_extent},
                       {"xi_range", c.validate.xi_range},   {"tau_range", c.validate.tau_range},
                       {"z_radius", c.validate.z_radius}};
    out["minimize"] = {{"k", c.minimize.k},
                       {"nodes", c.minimize.nodes},
                       {"layer_width", c.minimize.layer_width},
                       {"eps_period", c.minimize.eps_period ? number(*c.minimize.eps_period) : ordered_json(nullptr)}};
    return out;
}

class Output {
public:
    explicit Output(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_))
            throw Error("cannot create output directory '" + dir_.string() + "'");
    }

    void write(const std::string& name, const std::string& content) {
        const std::filesystem::path path = dir_ / name;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out) throw Error("cannot write '" + path.string() + "'");
        files.push_back(name);
    }

    void field(const std::string& name, const Field& f) {
        std::ostringstream text;
        write_field_csv(text, f);
        write(name, text.str());
    }

    std::vector<std::string> files;

private:
    std::filesystem::path dir_;
};

std::string csv_vec_header(const std::string& base, int dimension) {
    return dimension == 1 ? base : base + "_1," + base + "_2";
}

std::string csv_vec(const Vec& v, int dimension) {
    return dimension == 1 ? format_double(v[0]) : format_double(v[0]) + "," + format_double(v[1]);
}

const LocalDensity& need_local(const std::optional<LocalDensity>& g, const std::string& what) {
    if (!g) throw InvalidParameter(what + " needs a local density");
    return *g;
}

SamplingPlan sampling_plan(const ExperimentConfig& c) {
    SamplingPlan plan;
    plan.count = c.validate.samples;
    plan.x_extent = c.validate.x_extent;
    plan.xi_range = c.validate.xi_range;
    plan.tau_range = c.validate.tau_range;
    plan.z_radius = c.validate.z_radius;
    plan.dimension = c.dimension;
    plan.seed = c.seed;
    return plan;
}

ordered_json run_validate(const ExperimentConfig& c, Output& out) {
    std::vector<HypothesisReport> reports;
    const SamplingPlan plan = sampling_plan(c);
    if (auto f = make_nonlocal(c)) reports.push_back(validate_growth(*f, plan));
    if (auto g = make_local(c)) reports.push_back(validate_growth(*g, plan));
    if (reports.empty()) {
        // Without declarations every built-in density is checked with its defaults.
        for (const auto& info : builtin_catalog()) {
            if (info.kind == "kernel") continue;
            ParamMap params;
            if (info.kind == "nonlocal") params["dimension"] = static_cast<double>(c.dimension);
            reports.push_back(validate_growth(builtin_density(info.name, params), plan));
        }
    }

    std::string csv = "density,condition,pass,violations,violation,worst_sample\n";
    ordered_json densities = ordered_json::array();
    bool all = true;
    for (const auto& r : reports) {
        ordered_json conditions = ordered_json::array();
        for (const auto& cond : r.conditions) {
            csv += r.density + "," + cond.name + "," + (cond.pass ? "1" : "0") + "," +
                   std::to_string(cond.violations) + "," + format_double(cond.violation) + ",\"" +
                   cond.worst_sample + "\"\n";
            conditions.push_back({{"name", cond.name},
                                  {"statement", cond.statement},
                                  {"pass", cond.pass},
                                  {"violations", cond.violations},
                                  {"violation", number(cond.violation)},
                                  {"worst_sample", cond.worst_sample}});
        }
        all = all && r.all_pass();
        densities.push_back(
            {{"density", r.density}, {"samples", r.sample_count}, {"all_pass", r.all_pass()}, {"conditions", conditions}});
    }
    out.write("validate.csv", csv);
    return {{"all_pass", all}, {"densities", densities}};
}

ordered_json run_f0(const ExperimentConfig& c, Output& out) {
    const KernelSpec kernel = KernelSpec::builtin(c.f0.kernel, c.dimension);
    std::vector<Vec> xis = c.f0.xi;
    if (xis.empty()) xis.push_back(c.xi);
    const QuadratureRule rule = ball_rule(c.dimension);
    const bool mc = c.f0.monte_carlo_samples > 0;

    std::string csv = csv_vec_header("xi", c.dimension) + ",f0" + (mc ? ",monte_carlo,std_error" : "") + "\n";
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < xis.size(); ++i) {
        const double value = f0_of_xi(kernel, c.f0.p, xis[i], rule);
        csv += csv_vec(xis[i], c.dimension) + "," + format_double(value);
        ordered_json row{{"xi", vec_json(xis[i], c.dimension)}, {"f0", number(value)}};
        if (mc) {
            const auto est = f0_monte_carlo_oracle(kernel, c.f0.p, xis[i], c.f0.monte_carlo_samples, c.seed + i);
            csv += "," + format_double(est.estimate) + "," + format_double(est.std_error);
            row["monte_carlo"] = number(est.estimate);
            row["std_error"] = number(est.std_error);
        }
        csv += "\n";
        rows.push_back(row);
    }
    out.write("f0.csv", csv);
    return {{"kernel", kernel.name()}, {"kernel_mass", number(kernel_mass(kernel))}, {"rows", rows}};
}

ordered_json run_envelope(const ExperimentConfig& c, Output& out) {
    if (c.dimension != 1) throw InvalidParameter("envelope runs in one dimension");
    const LocalDensity g = need_local(make_local(c), "envelope");
    const SampledFunction1D samples = SampledFunction1D::sample(
        [&](double xi) { return g(Vec{0.0, 0.0}, Vec{xi, 0.0}); }, c.envelope.lo, c.envelope.hi, c.envelope.count);
    const SampledFunction1D hull = convex_envelope(samples);
    const std::vector<std::size_t> vertices = lower_hull(samples);

    std::string csv = "xi,g,envelope\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
        csv += format_double(samples.xs[i]) + "," + format_double(samples.values[i]) + "," +
               format_double(hull.values[i]) + "\n";
    out.write("envelope.csv", csv);
    ordered_json hull_xs = ordered_json::array();
    for (std::size_t v : vertices) hull_xs.push_back(samples.xs[v]);
    return {{"density", g.name},
            {"hull_vertices", hull_xs},
            {"envelope_at_xi", number(convex_envelope_at(samples, c.xi[0]))}};
}

ordered_json run_minimize(const ExperimentConfig& c, Output& out) {
    const auto f = make_nonlocal(c);
    const auto g = make_local(c);
    if (!f && !g) throw InvalidParameter("minimize needs at least one density");
    const Grid grid(c.dimension, c.minimize.nodes);
    std::optional<double> eps = c.minimize.eps_period;
    const bool periodic = (f && f->periodic) || (g && g->periodic);
    if (periodic && !eps) eps = 1.0 / c.minimize.k;
    const DiscreteEnergy energy(grid, f, g, {c.minimize.k, eps});
    const AffineFunction w{c.xi, 0.0};
    const Problem problem{energy, boundary_layer_mask(grid, w, c.minimize.layer_width)};
    const MinResult result = minimize(problem, c.solver);

    std::string csv = "iteration,energy\n";
    for (std::size_t i = 0; i < result.history.size(); ++i)
        csv += std::to_string(i) + "," + format_double(result.history[i]) + "\n";
    out.write("minimize.csv", csv);
    if (c.dump_fields) out.field("fields/minimize.csv", result.field);

    ordered_json restarts = ordered_json::array();
    for (double e : result.restart_energies) restarts.push_back(number(e));
    return {{"nodes", grid.node_count()},
            {"pairs", energy.pair_count()},
            {"energy", energy_json(result.energy)},
            {"iterations", result.iterations},
            {"grad_norm", number(result.grad_norm)},
            {"converged", result.converged},
            {"stalled", result.stalled},
            {"restart_energies", restarts},
            {"restart_spread", number(result.restart_spread())}};
}

ordered_json sweep_json(const SweepReport& r, int dimension) {
    ordered_json points = ordered_json::array();
    for (const auto& p : r.points) {
        ordered_json restarts = ordered_json::array();
        for (double e : p.restart_energies) restarts.push_back(number(e));
        points.push_back({{r.parameter_name, p.parameter},
                          {"status", p.status},
                          {"nodes", p.nodes},
                          {"energy", energy_json(p.energy)},
                          {"gap", number(p.gap)},
                          {"affine_density", number(p.affine_density)},
                          {"alternate_density", number(p.alternate_density)},
                          {"converged", p.converged},
                          {"inconclusive", p.inconclusive},
                          {"iterations", p.iterations},
                          {"restart_energies", restarts}});
    }
    ordered_json gaps = ordered_json::array();
    for (double g : r.cauchy_gaps) gaps.push_back(number(g));
    return {{"parameter", r.parameter_name},
            {"mode", r.mode},
            {"xi", vec_json(r.xi, dimension)},
            {"predicted_limit", r.predicted_limit ? number(*r.predicted_limit) : ordered_json(nullptr)},
            {"extrapolated_value", r.extrapolated_value ? number(*r.extrapolated_value) : ordered_json(nullptr)},
            {"cauchy_gaps", gaps},
            {"convergent", r.convergent},
            {"verdict", r.verdict},
            {"points", points}};
}

ordered_json write_sweep(const SweepReport& r, const std::string& csv_name, const std::string& field_prefix,
                         int dimension, Output& out) {
    std::ostringstream csv;
    write_sweep_csv(csv, r);
    out.write(csv_name, csv.str());
    for (const auto& p : r.points)
        if (p.field) out.field("fields/" + field_prefix + format_double(p.parameter) + ".csv", *p.field);
    return sweep_json(r, dimension);
}

}  // namespace

SweepSetup make_sweep_setup(const ExperimentConfig& c) {
    SweepSetup setup;
    setup.f = make_nonlocal(c);
    setup.g = make_local(c);
    setup.xi = c.xi;
    setup.rule = c.grid;
    setup.layer = c.layer;
    setup.solver = c.solver;
    // Parallelism is confined to the sweep-point fan-out.
    setup.solver.jobs = 1;
    setup.jobs = c.jobs;
    setup.keep_fields = c.dump_fields;
    return setup;
}

RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    if (config.experiment.empty()) throw InvalidParameter("no experiment named in the configuration");
    Output out(out_dir);
    RunResult result;
    result.experiment = config.experiment;

    ordered_json results;
    const std::string& e = config.experiment;
    if (e == "validate") {
        results = run_validate(config, out);
    } else if (e == "f0") {
        results = run_f0(config, out);
    } else if (e == "envelope") {
        results = run_envelope(config, out);
    } else if (e == "minimize") {
        results = run_minimize(config, out);
    } else if (e == "sweep-eps") {
        if (config.k_list.empty()) throw InvalidParameter("sweep-eps needs a k_list");
        result.sweep = epsilon_sweep(make_sweep_setup(config), config.k_list);
        results = write_sweep(*result.sweep, "sweep.csv", "k_", config.dimension, out);
    } else if (e == "cell" || e == "sweep-T") {
        const SweepSetup setup = make_sweep_setup(config);
        const std::vector<int> T_list = e == "cell" ? std::vector<int>{config.T} : config.T_list;
        if (T_list.empty()) throw InvalidParameter("sweep-T needs a T_list");
        result.sweep = g_hom_estimate(setup, T_list);
        results = write_sweep(*result.sweep, e == "cell" ? "cell.csv" : "sweep.csv", "T_", config.dimension, out);
    } else {
        throw InvalidParameter("unknown experiment '" + e + "'");
    }

    ordered_json report;
    report["tool"] = "gamma-lab";
    report["version"] = tool_version();
    report["experiment"] = e;
    report["config"] = config_json(config);
    report["results"] = std::move(results);
    report["files"] = out.files;
    result.report = report.dump(2) + "\n";
    out.write("report.json", result.report);
    result.files = out.files;
    return result;
}

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

std::string builtin_catalog_text() {
    std::string text;
    for (const auto& info : builtin_catalog()) {
        text += info.name + " (" + info.kind + ")\n    " + info.formula + "\n";
        for (const auto& param : info.params) {
            const std::string def = std::holds_alternative<double>(param.default_value)
                                        ? shortest(std::get<double>(param.default_value))
                                        : std::get<std::string>(param.default_value);
            text += "    " + param.name + " = " + def + "  " + param.description + "\n";
        }
    }
    return text;
}

}  // namespace gammalab::cli
