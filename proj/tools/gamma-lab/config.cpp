#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "gammalab/error.hpp"
#include "gammalab/grid.hpp"

namespace gammalab::cli {

namespace {

std::string where(const std::string& source, const YAML::Node& node) {
    const YAML::Mark mark = node.Mark();
    if (mark.is_null()) return source;
    return source + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
}

std::optional<double> to_number(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc() || result.ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

/// A YAML mapping whose keys must all be consumed.
class Section {
public:
    Section(YAML::Node node, std::string path, const std::string& source)
        : node_(std::move(node)), path_(std::move(path)), source_(source) {
        if (node_ && node_.IsNull()) node_ = YAML::Node(YAML::NodeType::Map);
        if (node_ && !node_.IsMap()) fail(node_, "expected a mapping");
    }

    [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
        throw ConfigError(where(source_, at) + ": " + (path_.empty() ? "" : "'" + path_ + "': ") + message);
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return lookup(key).IsDefined(); }

    YAML::Node take(const std::string& key) {
        used_.insert(key);
        return lookup(key);
    }

    Section child(const std::string& key) { return Section(take(key), key_path(key), source_); }

    [[noreturn]] void bad(const YAML::Node& at, const std::string& key, const std::string& message) const {
        throw ConfigError(where(source_, at) + ": key '" + key_path(key) + "': " + message);
    }

    std::string scalar(const YAML::Node& n, const std::string& key) const {
        if (!n.IsScalar()) bad(n, key, "expected a scalar");
        return n.Scalar();
    }

    double number(const YAML::Node& n, const std::string& key) const {
        const auto v = to_number(scalar(n, key));
        if (!v) bad(n, key, "expected a finite number, got '" + n.Scalar() + "'");
        return *v;
    }

    long long integer(const YAML::Node& n, const std::string& key) const {
        const std::string text = scalar(n, key);
        long long value = 0;
        const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
        if (result.ec != std::errc() || result.ptr != text.data() + text.size())
            bad(n, key, "expected an integer, got '" + text + "'");
        return value;
    }

    void get(const std::string& key, double& out) {
        if (const auto n = take(key)) out = number(n, key);
    }

    void get(const std::string& key, std::optional<double>& out) {
        if (const auto n = take(key)) {
            if (n.IsNull()) out.reset();
            else out = number(n, key);
        }
    }

    void get(const std::string& key, std::string& out) {
        if (const auto n = take(key)) out = scalar(n, key);
    }

    void get(const std::string& key, bool& out) {
        if (const auto n = take(key)) {
            const std::string text = scalar(n, key);
            if (text == "true") out = true;
            else if (text == "false") out = false;
            else bad(n, key, "expected true or false, got '" + text + "'");
        }
    }

    template <class Int>
    void get_int(const std::string& key, Int& out, long long lo, long long hi) {
        if (const auto n = take(key)) {
            const long long v = integer(n, key);
            if (v < lo || v > hi) bad(n, key, "value " + std::to_string(v) + " is out of range");
            out = static_cast<Int>(v);
        }
    }

    void get(const std::string& key, Vec& out, int dimension) {
        if (const auto n = take(key)) out = vec(n, key, dimension);
    }

    Vec vec(const YAML::Node& n, const std::string& key, int dimension) const {
        if (n.IsScalar()) {
            if (dimension != 1) bad(n, key, "expected a list of " + std::to_string(dimension) + " numbers");
            return {number(n, key), 0.0};
        }
        if (!n.IsSequence() || n.size() != static_cast<std::size_t>(dimension))
            bad(n, key, "expected a list of " + std::to_string(dimension) + " numbers");
        Vec v{0.0, 0.0};
        for (std::size_t i = 0; i < n.size(); ++i) v[i] = number(n[i], key);
        return v;
    }

    /// Rejects keys that were never taken.
    void finish() const {
        if (!node_) return;
        for (const auto& entry : node_) {
            const std::string key = entry.first.Scalar();
            if (!used_.count(key)) throw ConfigError(where(source_, entry.first) + ": unknown key '" + key_path(key) + "'");
        }
    }

private:
    // Const access so that missing keys are not inserted.
    YAML::Node lookup(const std::string& key) const {
        const YAML::Node& node = node_;
        if (!node.IsDefined() || !node.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
        return node[key];
    }

    YAML::Node node_;
    std::string path_;
    const std::string& source_;
    std::set<std::string> used_;
};

DensityDecl read_density(Section& parent, const std::string& key) {
    Section s = parent.child(key);
    DensityDecl decl;
    const YAML::Node name = s.take("name");
    if (!name) s.fail(YAML::Node(), "missing 'name'");
    decl.name = s.scalar(name, "name");
    if (const YAML::Node params = s.take("params")) {
        if (!params.IsMap()) s.bad(params, "params", "expected a mapping");
        for (const auto& entry : params) {
            const std::string pkey = entry.first.Scalar();
            if (!entry.second.IsScalar()) s.bad(entry.second, "params." + pkey, "expected a scalar");
            const std::string text = entry.second.Scalar();
            if (const auto v = to_number(text)) decl.params[pkey] = *v;
            else decl.params[pkey] = text;
        }
    }
    s.finish();
    return decl;
}

void check(bool ok, const std::string& source, const std::string& key, const std::string& message) {
    if (!ok) throw ConfigError(source + ": key '" + key + "': " + message);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                          ": parse error: " + e.msg);
    }
    if (!root || root.IsNull()) throw ConfigError(source + ": empty configuration");
    Section top(root, "", source);

    ExperimentConfig c;
    c.experiment = "";
    top.get("experiment", c.experiment);
    if (!c.experiment.empty()) {
        const auto& names = experiment_names();
        check(std::find(names.begin(), names.end(), c.experiment) != names.end(), source, "experiment",
              "unknown experiment '" + c.experiment + "'");
    }
    top.get_int("seed", c.seed, 0, std::numeric_limits<long long>::max());
    top.get_int("jobs", c.jobs, 0, 1024);
    top.get("output", c.output);
    top.get_int("dimension", c.dimension, 1, 2);
    if (top.has("nonlocal")) c.nonlocal = read_density(top, "nonlocal");
    if (top.has("local")) c.local = read_density(top, "local");
    top.get("xi", c.xi, c.dimension);
    if (const auto n = top.take("layer")) {
        try {
            c.layer = layer_mode_from_string(top.scalar(n, "layer"));
        } catch (const Error& e) {
            top.bad(n, "layer", e.what());
        }
    }
    if (const auto n = top.take("k_list")) {
        if (!n.IsSequence()) top.bad(n, "k_list", "expected a list");
        for (const auto& item : n) c.k_list.push_back(top.number(item, "k_list"));
    }
    if (const auto n = top.take("T_list")) {
        if (!n.IsSequence()) top.bad(n, "T_list", "expected a list");
        for (const auto& item : n) {
            const long long T = top.integer(item, "T_list");
            if (T < 1 || T > 1000000) top.bad(item, "T_list", "T must be a positive integer");
            c.T_list.push_back(static_cast<int>(T));
        }
    }
    top.get_int("T", c.T, 1, 1000000);
    top.get("dump_fields", c.dump_fields);

    {
        Section g = top.child("grid");
        g.get_int("cells_per_unit", c.grid.cells_per_unit, 1, 1 << 20);
        g.get("refinement", c.grid.refinement);
        g.get("two_scale", c.grid.two_scale);
        g.get_int("max_nodes", c.grid.max_nodes, 3, std::numeric_limits<long long>::max());
        g.get_int("max_pairs", c.grid.max_pairs, 1, std::numeric_limits<long long>::max());
        g.finish();
    }
    c.grid.dimension = c.dimension;
    {
        Section s = top.child("solver");
        s.get_int("max_iters", c.solver.max_iters, 1, std::numeric_limits<int>::max());
        s.get("grad_tol", c.solver.grad_tol);
        s.get("grad_tol_floor", c.solver.grad_tol_floor);
        s.get("step_init", c.solver.step_init);
        s.get("armijo_c", c.solver.armijo_c);
        s.get("backtrack_factor", c.solver.backtrack_factor);
        s.get_int("restarts", c.solver.restarts, 1, 100000);
        s.get("perturbation", c.solver.perturbation);
        s.get("perturbation_decay", c.solver.perturbation_decay);
        s.finish();
    }
    c.solver.seed = c.seed;
    c.solver.jobs = c.jobs;
    {
        Section s = top.child("f0");
        s.get("kernel", c.f0.kernel);
        s.get("p", c.f0.p);
        if (const auto n = s.take("xi")) {
            if (!n.IsSequence()) s.bad(n, "xi", "expected a list");
            for (const auto& item : n) c.f0.xi.push_back(s.vec(item, "xi", c.dimension));
        }
        s.get_int("monte_carlo_samples", c.f0.monte_carlo_samples, 0, 1LL << 40);
        s.finish();
    }
    {
        Section s = top.child("envelope");
        s.get("lo", c.envelope.lo);
        s.get("hi", c.envelope.hi);
        s.get_int("count", c.envelope.count, 2, 1 << 24);
        s.finish();
    }
    {
        Section s = top.child("validate");
        s.get_int("samples", c.validate.samples, 1, 1LL << 40);
        s.get("x_extent", c.validate.x_extent);
        s.get("xi_range", c.validate.xi_range);
        s.get("tau_range", c.validate.tau_range);
        s.get("z_radius", c.validate.z_radius);
        s.finish();
    }
    {
        Section s = top.child("minimize");
        s.get("k", c.minimize.k);
        s.get_int("nodes", c.minimize.nodes, 3, 1LL << 32);
        s.get("layer_width", c.minimize.layer_width);
        s.get("eps_period", c.minimize.eps_period);
        s.finish();
    }
    top.finish();

    // Range checks that need the module preconditions.
    // Module messages start with the offending field name.
    auto module_check = [&](const char* section, auto&& validate) {
        try {
            validate();
        } catch (const Error& e) {
            const std::string what = e.what();
            throw ConfigError(source + ": key '" + section + "." + what.substr(0, what.find(' ')) + "': " + what);
        }
    };
    module_check("solver", [&] { c.solver.validate(); });
    module_check("grid", [&] { c.grid.validate(); });
    check(c.envelope.hi > c.envelope.lo, source, "envelope", "hi must exceed lo");
    check(c.f0.p > 1.0, source, "f0.p", "p must be > 1");
    check(c.minimize.k > 0.0, source, "minimize.k", "k must be positive");
    check(c.minimize.layer_width >= 0.0 && c.minimize.layer_width < 0.5, source, "minimize.layer_width",
          "layer width must lie in [0, 1/2)");
    check(c.f0.monte_carlo_samples == 0 || c.f0.monte_carlo_samples >= 1000, source, "f0.monte_carlo_samples",
          "Monte Carlo needs at least 1000 samples");
    for (std::size_t i = 0; i < c.k_list.size(); ++i)
        check(c.k_list[i] > 0.0 && (i == 0 || c.k_list[i] > c.k_list[i - 1]), source, "k_list",
              "k values must be positive and increasing");
    for (std::size_t i = 1; i < c.T_list.size(); ++i)
        check(c.T_list[i] > c.T_list[i - 1], source, "T_list", "T values must be increasing");

    // Resolve and check the densities now so errors name the config key.
    auto resolve = [&](std::optional<DensityDecl>& decl, const std::string& key) {
        if (!decl) return;
        const BuiltinInfo* info = nullptr;
        try {
            info = &builtin_info(decl->name);
        } catch (const Error& e) {
            throw ConfigError(source + ": key '" + key + ".name': " + e.what());
        }
        const bool want_local = key == "local";
        check(info->kind == (want_local ? "local" : "nonlocal"), source, key + ".name",
              "'" + decl->name + "' is not a " + (want_local ? "local" : "nonlocal") + " density");
        if (info->kind == "nonlocal") {
            const auto it = decl->params.find("dimension");
            if (it == decl->params.end()) decl->params["dimension"] = static_cast<double>(c.dimension);
            else
                check(std::holds_alternative<double>(it->second) &&
                          std::get<double>(it->second) == static_cast<double>(c.dimension),
                      source, key + ".params.dimension", "must match the top-level dimension");
        }
        try {
            decl->params = resolve_params(decl->name, decl->params);
            builtin_density(decl->name, decl->params);
        } catch (const Error& e) {
            throw ConfigError(source + ": key '" + key + ".params': " + e.what());
        }
    };
    resolve(c.nonlocal, "nonlocal");
    resolve(c.local, "local");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot read configuration file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

namespace {

void emit_number(YAML::Emitter& out, double v) { out << format_double(v); }

void emit_vec(YAML::Emitter& out, const Vec& v, int dimension) {
    out << YAML::Flow << YAML::BeginSeq;
    for (int i = 0; i < dimension; ++i) emit_number(out, v[i]);
    out << YAML::EndSeq;
}

void emit_density(YAML::Emitter& out, const std::string& key, const DensityDecl& decl) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << decl.name;
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : decl.params) {
        out << YAML::Key << k << YAML::Value;
        if (std::holds_alternative<double>(v)) emit_number(out, std::get<double>(v));
        else out << YAML::DoubleQuoted << std::get<std::string>(v);
    }
    out << YAML::EndMap << YAML::EndMap;
}

}  // namespace

std::string emit_config(const ExperimentConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "experiment" << YAML::Value << c.experiment;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "jobs" << YAML::Value << c.jobs;
    out << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << c.output;
    out << YAML::Key << "dimension" << YAML::Value << c.dimension;
    if (c.nonlocal) emit_density(out, "nonlocal", *c.nonlocal);
    if (c.local) emit_density(out, "local", *c.local);
    out << YAML::Key << "xi" << YAML::Value;
    emit_vec(out, c.xi, c.dimension);
    out << YAML::Key << "layer" << YAML::Value << to_string(c.layer);
    out << YAML::Key << "k_list" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double k : c.k_list) emit_number(out, k);
    out << YAML::EndSeq;
    out << YAML::Key << "T_list" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int T : c.T_list) out << T;
    out << YAML::EndSeq;
    out << YAML::Key << "T" << YAML::Value << c.T;
    out << YAML::Key << "dump_fields" << YAML::Value << (c.dump_fields ? "true" : "false");

    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "cells_per_unit" << YAML::Value << c.grid.cells_per_unit;
    out << YAML::Key << "refinement" << YAML::Value;
    emit_number(out, c.grid.refinement);
    out << YAML::Key << "two_scale" << YAML::Value << (c.grid.two_scale ? "true" : "false");
    out << YAML::Key << "max_nodes" << YAML::Value << c.grid.max_nodes;
    out << YAML::Key << "max_pairs" << YAML::Value << c.grid.max_pairs;
    out << YAML::EndMap;

    out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "max_iters" << YAML::Value << c.solver.max_iters;
    out << YAML::Key << "grad_tol" << YAML::Value;
    emit_number(out, c.solver.grad_tol);
    out << YAML::Key << "grad_tol_floor" << YAML::Value;
    emit_number(out, c.solver.grad_tol_floor);
    out << YAML::Key << "step_init" << YAML::Value;
    emit_number(out, c.solver.step_init);
    out << YAML::Key << "armijo_c" << YAML::Value;
    emit_number(out, c.solver.armijo_c);
    out << YAML::Key << "backtrack_factor" << YAML::Value;
    emit_number(out, c.solver.backtrack_factor);
    out << YAML::Key << "restarts" << YAML::Value << c.solver.restarts;
    out << YAML::Key << "perturbation" << YAML::Value;
    emit_number(out, c.solver.perturbation);
    out << YAML::Key << "perturbation_decay" << YAML::Value;
    emit_number(out, c.solver.perturbation_decay);
    out << YAML::EndMap;

    out << YAML::Key << "f0" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kernel" << YAML::Value << c.f0.kernel;
    out << YAML::Key << "p" << YAML::Value;
    emit_number(out, c.f0.p);
    out << YAML::Key << "xi" << YAML::Value << YAML::BeginSeq;
    for (const Vec& v : c.f0.xi) emit_vec(out, v, c.dimension);
    out << YAML::EndSeq;
    out << YAML::Key << "monte_carlo_samples" << YAML::Value << c.f0.monte_carlo_samples;
    out << YAML::EndMap;

    out << YAML::Key << "envelope" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lo" << YAML::Value;
    emit_number(out, c.envelope.lo);
    out << YAML::Key << "hi" << YAML::Value;
    emit_number(out, c.envelope.hi);
    out << YAML::Key << "count" << YAML::Value << c.envelope.count;
    out << YAML::EndMap;

    out << YAML::Key << "validate" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "samples" << YAML::Value << c.validate.samples;
    out << YAML::Key << "x_extent" << YAML::Value;
    emit_number(out, c.validate.x_extent);
    out << YAML::Key << "xi_range" << YAML::Value;
    emit_number(out, c.validate.xi_range);
    out << YAML::Key << "tau_range" << YAML::Value;
    emit_number(out, c.validate.tau_range);
    out << YAML::Key << "z_radius" << YAML::Value;
    emit_number(out, c.validate.z_radius);
    out << YAML::EndMap;

    out << YAML::Key << "minimize" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "k" << YAML::Value;
    emit_number(out, c.minimize.k);
    out << YAML::Key << "nodes" << YAML::Value << c.minimize.nodes;
    out << YAML::Key << "layer_width" << YAML::Value;
    emit_number(out, c.minimize.layer_width);
    out << YAML::Key << "eps_period" << YAML::Value;
    if (c.minimize.eps_period) emit_number(out, *c.minimize.eps_period);
    else out << YAML::Null;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::optional<NonlocalDensity> make_nonlocal(const ExperimentConfig& config) {
    if (!config.nonlocal) return std::nullopt;
    return builtin_nonlocal(config.nonlocal->name, config.nonlocal->params);
}

std::optional<LocalDensity> make_local(const ExperimentConfig& config) {
    if (!config.local) return std::nullopt;
    return builtin_local(config.local->name, config.local->params);
}

}  // namespace gammalab::cli
