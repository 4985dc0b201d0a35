#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gammalab/densities.hpp"
#include "gammalab/energy.hpp"
#include "gammalab/minimize.hpp"

namespace gammalab {

/// Grid resolution for sweeps and cell problems.
///
/// In a concentration sweep the grid has cells_per_radius(k) cells per kernel radius
/// 1/k, i.e. h = 1/(cells_per_radius(k) k), with
/// cells_per_radius(k) = round(cells_per_unit * k^refinement). A positive refinement
/// lets the oscillation scale eps_micro = 8 h vanish faster than 1/k. The two-scale
/// rule h <= eps_micro / 8, eps_micro <= 1/(8k) requires cells_per_radius(k) >= 64.
/// In a cell problem cells_per_unit counts cells per period (at least 8).
struct GridRule {
    int dimension = 1;
    int cells_per_unit = 64;
    double refinement = 0.0;
    bool two_scale = true;
    std::size_t max_nodes = 200000;
    std::size_t max_pairs = 50000000;

    std::size_t cells_per_radius(double k) const;
    /// Grid of a concentration sweep point.
    Grid sweep_grid(double k) const;
    /// Grid of the cell problem on Q_T, rescaled to the unit box.
    Grid cell_grid(int T) const;
    /// Oscillation scale eps_micro = 8 h resolved by the sweep grid at concentration k.
    double micro_scale(double k) const;
    /// True when the grid stays within both caps.
    bool sweep_feasible(double k) const;
    bool cell_feasible(int T) const;
    /// Throws InvalidParameter when the rule itself is malformed.
    void validate() const;

    bool operator==(const GridRule&) const = default;
};

/// Boundary constraint of a sweep point.
enum class LayerMode {
    /// u = w on the boundary only.
    trace,
    /// u = w within distance 1/k of the boundary (one period in cell problems).
    layer,
};

const char* to_string(LayerMode mode);
LayerMode layer_mode_from_string(const std::string& name);

/// Densities, boundary slope and solver settings shared by every sweep point.
struct SweepSetup {
    std::optional<NonlocalDensity> f;
    std::optional<LocalDensity> g;
    Vec xi{0.0, 0.0};
    GridRule rule;
    LayerMode layer = LayerMode::layer;
    MinimizeOptions solver;
    /// Sweep points evaluated concurrently (0: hardware concurrency).
    unsigned jobs = 1;
    /// Keep the minimizing field of every point in the report.
    bool keep_fields = false;
};

struct SweepPoint {
    double parameter = 0.0;
    std::size_t nodes = 0;
    EnergyBreakdown energy;
    /// |density - predicted_limit|, NaN without a prediction.
    double gap = 0.0;
    bool converged = false;
    /// Restart energies spread by more than 5%.
    bool inconclusive = false;
    int iterations = 0;
    /// Energy density of the affine test function u = xi . x (upper bound of the minimum).
    double affine_density = 0.0;
    /// Density of the alternative boundary variant (cell problems), NaN otherwise.
    double alternate_density = 0.0;
    std::vector<double> restart_energies;
    /// "ok", "failed: <reason>" or "truncated".
    std::string status = "ok";
    std::optional<Field> field;

    bool ok() const { return status == "ok"; }
};

struct SweepReport {
    std::string parameter_name;
    std::string mode;
    Vec xi{0.0, 0.0};
    std::vector<SweepPoint> points;
    std::optional<double> predicted_limit;
    /// Quadratic extrapolation in 1/parameter over the last three successful points.
    std::optional<double> extrapolated_value;
    /// Cauchy gaps |v_{i+1} - v_i| (T sweeps only).
    std::vector<double> cauchy_gaps;
    bool convergent = false;
    std::string verdict;

    std::vector<double> parameters() const;
    std::vector<double> densities() const;
    std::vector<double> gaps() const;
};

/// Convex envelope of an x-independent local density evaluated at xi, from samples on
/// a window around the origin and xi.
double relaxed_local_density(const LocalDensity& g0, const Vec& xi, int dimension);

/// Predicted limit density f0(xi) + g0**(xi).
double separation_density(const KernelSpec& kernel, double p, const LocalDensity& g0, const Vec& xi);

/// Prediction for a sweep setup when both densities are x-independent: f0 from the
/// kernel-power form of f (zero without f) plus the envelope of g (zero without g).
/// Empty when a density is periodic or f is not of kernel-power form.
std::optional<double> predicted_separation_limit(const SweepSetup& setup);

/// Minimizes at each concentration k with w(x) = xi . x pinned on the boundary layer
/// of width 1/k (or on the boundary in trace mode) and reports energy densities.
SweepReport epsilon_sweep(const SweepSetup& setup, std::span<const double> k_list);

/// Result of one cell problem.
struct CellResult {
    double T = 0.0;
    MinResult min;
    double affine_density = 0.0;
};

/// Cell problem on Q_T with u = xi . x pinned on the boundary (trace) or within
/// distance 1 of it (layer), divided by T^d. Solved on the unit box with k = T and
/// eps_period = 1/T, which is the same discrete problem after rescaling.
CellResult cell_problem(const SweepSetup& setup, int T, LayerMode layer);

double cell_energy(const SweepSetup& setup, int T, LayerMode layer = LayerMode::trace);

/// Runs the cell problem for every T in both boundary variants and reports the
/// trace-variant values, their Cauchy gaps and the variant agreement.
SweepReport g_hom_estimate(const SweepSetup& setup, std::span<const int> T_list);

/// Writes one CSV row per sweep point.
void write_sweep_csv(std::ostream& out, const SweepReport& report);

/// Quadratic extrapolation to t = 0 through three (t, v) points.
double richardson_extrapolate(std::span<const double> t, std::span<const double> v);

}  // namespace gammalab
