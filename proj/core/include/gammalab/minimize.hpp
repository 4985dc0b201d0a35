#pragma once

#include <cstdint>
#include <vector>

#include "gammalab/energy.hpp"

namespace gammalab {

struct MinimizeOptions {
    int max_iters = 50000;
    /// Stationarity threshold relative to the initial projected-gradient sup-norm.
    double grad_tol = 1e-8;
    /// Absolute floor of the stationarity threshold.
    double grad_tol_floor = 1e-12;
    /// First trial step moves the steepest node by step_init * h.
    double step_init = 1.0;
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    int restarts = 1;
    std::uint64_t seed = 1;
    /// Amplitude of the first random restart perturbation, in units of h.
    double perturbation = 1.0;
    /// Per-restart decay of the perturbation amplitude.
    double perturbation_decay = 0.7;
    /// Worker threads for restarts (0: hardware concurrency).
    unsigned jobs = 1;

    /// Throws InvalidParameter when an option is out of range.
    void validate() const;

    bool operator==(const MinimizeOptions&) const = default;
};

struct MinResult {
    Field field;
    EnergyBreakdown energy;
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
    /// Set when the line search could no longer resolve an energy decrease.
    bool stalled = false;
    /// Best energy of each restart, in restart order.
    std::vector<double> restart_energies;
    /// Total energy after the start and after every accepted step of the returned run.
    std::vector<double> history;
    /// Energy change of every accepted step, computed from the increments (all < 0).
    /// Totals in `history` may tie once a change drops below their rounding level.
    std::vector<double> step_changes;
    /// Relative spread (max - min) / max(|min|, tiny) of the perturbed restarts
    /// (restart 0 starts at the unperturbed affine fit, which may be a saddle).
    /// Zero with fewer than two perturbed restarts.
    double restart_spread() const;
};

/// An energy together with the pinned-node constraint.
struct Problem {
    const DiscreteEnergy& energy;
    ConstraintMask mask;
};

/// Initial field of restart r: least-squares affine fit of the pinned data plus,
/// for r >= 1, seeded uniform noise of amplitude perturbation * h * decay^(r-1) on free nodes.
Field initial_field(const Problem& problem, const MinimizeOptions& opts, int restart);

/// Projected gradient descent with Armijo backtracking and Barzilai-Borwein step
/// lengths. Accepted steps strictly decrease the energy and pinned nodes never move.
/// Returns the best result over all restarts.
/// Throws InvalidParameter without free nodes and Diverged on non-finite energy.
MinResult minimize(const Problem& problem, const MinimizeOptions& opts);

/// Single descent run from a given starting field.
MinResult minimize_from(const Problem& problem, Field start, const MinimizeOptions& opts);

/// Worst relative error between the analytic gradient and central differences
/// of the energy at `n_probes` random feasible fields. The relative error of a probe is
/// max_i |g_i - fd_i| / max(max_i |fd_i|, tiny).
double gradient_check(const Problem& problem, int n_probes, std::uint64_t seed,
                      double fd_step = 1e-6);

}  // namespace gammalab
