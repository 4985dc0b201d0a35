#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gammalab/densities.hpp"
#include "gammalab/hypotheses.hpp"
#include "gammalab/limits.hpp"
#include "gammalab/minimize.hpp"

namespace gammalab::cli {

/// Malformed or inconsistent configuration. The message carries the source name,
/// line/column where available, and the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"validate", "f0", "envelope", "minimize", "sweep-eps", "cell", "sweep-T"};
    return names;
}

struct DensityDecl {
    std::string name;
    ParamMap params;

    bool operator==(const DensityDecl&) const = default;
};

struct F0Section {
    std::string kernel = "uniform";
    double p = 2.0;
    std::vector<Vec> xi;
    /// Adds a Monte Carlo column when positive (>= 1000).
    std::size_t monte_carlo_samples = 0;

    bool operator==(const F0Section&) const = default;
};

struct EnvelopeSection {
    double lo = -2.0;
    double hi = 2.0;
    std::size_t count = 201;

    bool operator==(const EnvelopeSection&) const = default;
};

struct ValidateSection {
    std::size_t samples = 10000;
    double x_extent = 2.0;
    double xi_range = 5.0;
    double tau_range = 5.0;
    double z_radius = 1.5;

    bool operator==(const ValidateSection&) const = default;
};

struct MinimizeSection {
    double k = 8.0;
    std::size_t nodes = 33;
    double layer_width = 0.0;
    std::optional<double> eps_period;

    bool operator==(const MinimizeSection&) const = default;
};

/// Fully resolved experiment configuration (defaults filled in).
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    /// Worker threads for sweep points and restarts; 0 uses the available parallelism.
    unsigned jobs = 0;
    std::string output = "out";
    int dimension = 1;
    std::optional<DensityDecl> nonlocal;
    std::optional<DensityDecl> local;
    Vec xi{0.0, 0.0};
    LayerMode layer = LayerMode::trace;
    std::vector<double> k_list;
    std::vector<int> T_list;
    int T = 8;
    GridRule grid;
    MinimizeOptions solver;
    bool dump_fields = false;
    F0Section f0;
    EnvelopeSection envelope;
    ValidateSection validate;
    MinimizeSection minimize;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses a YAML document. Unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the key and its line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Emits the resolved configuration as YAML; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

/// Instantiated densities of a configuration.
std::optional<NonlocalDensity> make_nonlocal(const ExperimentConfig& config);
std::optional<LocalDensity> make_local(const ExperimentConfig& config);

}  // namespace gammalab::cli
