#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gammalab/densities.hpp"
#include "gammalab/grid.hpp"

namespace gammalab {

struct EnergyBreakdown {
    double nonlocal = 0.0;
    double local = 0.0;
    double total = 0.0;
    /// total divided by the domain volume (1 for the unit box).
    double density = 0.0;
};

/// Scaling of the discrete energy.
struct EnergyParams {
    /// Concentration parameter. Pairs interact when |x - y| <= 1/k.
    double k = 1.0;
    /// Periodic densities see the fast variable x / eps_period. Required iff a
    /// density is periodic; ignored otherwise.
    std::optional<double> eps_period;
};

/// Discrete analogue of
///   h^{2d} sum_{i != j, |x_i - x_j| <= 1/k} k^d f(X_i, X_j, k (x_i - x_j), k (u_i - u_j))
/// + h^d sum_cells g(X_c, D_h u)
/// on a uniform grid of the unit box, where X = x / eps_period for periodic densities
/// and X = x otherwise, and D_h is the forward-difference gradient of each cell with
/// the density evaluated at the cell centre.
///
/// For f = psi(z) |tau|^p / |z|^p the nonlocal term is the psi_k-weighted difference
/// quotient energy; for periodic f it is eps^{-d} f(x/eps, y/eps, z/eps, tau/eps) with
/// eps = 1/k.
///
/// Immutable after construction; evaluation is thread-safe. Reductions run in a fixed
/// sequential order so repeated evaluations are bit-identical.
class DiscreteEnergy {
public:
    DiscreteEnergy(Grid grid, std::optional<NonlocalDensity> f, std::optional<LocalDensity> g,
                   EnergyParams params);

    const Grid& grid() const noexcept { return grid_; }
    const EnergyParams& params() const noexcept { return params_; }
    const std::optional<NonlocalDensity>& nonlocal_density() const noexcept { return f_; }
    const std::optional<LocalDensity>& local_density() const noexcept { return g_; }

    /// Number of unordered interacting node pairs.
    std::size_t pair_count() const noexcept;

    EnergyBreakdown energy(std::span<const double> u) const;

    /// Energy and its gradient with respect to every nodal value.
    EnergyBreakdown energy_and_gradient(std::span<const double> u, std::span<double> grad) const;

    /// E(v) - E(u) accumulated term by term from the increments v - u, so that small
    /// changes are resolved far below the rounding level of E itself.
    double energy_change(std::span<const double> u, std::span<const double> v) const;

private:
    struct Offset {
        int dx;
        int dy;
        Vec z;  // x_i - x_j for j = i + offset
    };
    /// Offsets with a common dy form a contiguous dx range.
    struct Row {
        int dy;
        int dx_lo;
        int dx_hi;
        std::size_t first;  // index of (dx_lo, dy) in offsets_
    };

    template <class Body>
    void visit_pairs(Body&& body) const;
    double nonlocal_term(std::span<const double> u, std::span<double> grad) const;
    double local_term(std::span<const double> u, std::span<double> grad) const;
    double nonlocal_change(std::span<const double> u, std::span<const double> v) const;
    double local_change(std::span<const double> u, std::span<const double> v) const;
    void check_input(std::span<const double> u) const;

    Grid grid_;
    std::optional<NonlocalDensity> f_;
    std::optional<LocalDensity> g_;
    EnergyParams params_;
    std::vector<Offset> offsets_;      // half-plane of interacting lattice offsets, sorted by (dy, dx)
    std::vector<Row> rows_;
    std::vector<double> weights_;      // fast path k^d psi(k |z|) / |z|^p per offset
    std::vector<double> node_weight_;  // fast path w(X_i)
    bool fast_ = false;
};

/// Convenience wrappers around DiscreteEnergy.
EnergyBreakdown assemble_energy(const Field& u, double k, const std::optional<NonlocalDensity>& f,
                                const std::optional<LocalDensity>& g,
                                std::optional<double> eps_period = std::nullopt);

Field assemble_gradient(const Field& u, double k, const std::optional<NonlocalDensity>& f,
                        const std::optional<LocalDensity>& g,
                        std::optional<double> eps_period = std::nullopt);

/// Affine boundary datum w(x) = slope . x + offset.
struct AffineFunction {
    Vec slope{0.0, 0.0};
    double offset = 0.0;

    double operator()(const Vec& x) const { return dot(slope, x) + offset; }
};

/// Per-node pinning. Pinned nodes keep `values[i]` during minimization.
struct ConstraintMask {
    std::vector<std::uint8_t> pinned;
    std::vector<double> values;

    std::size_t free_count() const noexcept;
    std::size_t pinned_count() const noexcept { return pinned.size() - free_count(); }
    bool is_pinned(std::size_t i) const noexcept { return pinned[i] != 0; }

    /// No pinned nodes on `size` nodes.
    static ConstraintMask none(std::size_t size);
};

/// Pins every node within distance `layer` of the boundary to w(x). layer = 0 pins
/// exactly the boundary nodes. Throws InvalidParameter when layer >= 1/2 or layer < 0.
ConstraintMask boundary_layer_mask(const Grid& grid, const AffineFunction& w, double layer);

struct DiagonalBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

/// Compares the kernel-weighted near-diagonal energy (pairs with |x - y| <= 1/k)
/// against 2^d omega_d ||psi||_inf times the discrete Dirichlet p-energy, with 10%
/// slack. `f` must carry the kernel-power form with unit weight.
DiagonalBound diagonal_bound_check(const Field& u, double k, const NonlocalDensity& f);

}  // namespace gammalab
