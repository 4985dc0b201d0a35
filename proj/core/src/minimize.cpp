#include "gammalab/minimize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gammalab/error.hpp"
#include "gammalab/parallel.hpp"

namespace gammalab {

void MinimizeOptions::validate() const {
    if (max_iters < 1) throw InvalidParameter("max_iters must be >= 1");
    if (!(grad_tol > 0.0)) throw InvalidParameter("grad_tol must be positive");
    if (!(grad_tol_floor >= 0.0)) throw InvalidParameter("grad_tol_floor must be >= 0");
    if (!(step_init > 0.0)) throw InvalidParameter("step_init must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InvalidParameter("armijo_c must lie in (0, 1)");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
        throw InvalidParameter("backtrack_factor must lie in (0, 1)");
    if (restarts < 1) throw InvalidParameter("restarts must be >= 1");
    if (!(perturbation >= 0.0)) throw InvalidParameter("perturbation must be >= 0");
    if (!(perturbation_decay > 0.0 && perturbation_decay <= 1.0))
        throw InvalidParameter("perturbation_decay must lie in (0, 1]");
}

double MinResult::restart_spread() const {
    if (restart_energies.size() < 3) return 0.0;
    const auto first = restart_energies.begin() + 1;
    const auto [lo, hi] = std::minmax_element(first, restart_energies.end());
    return (*hi - *lo) / std::max(std::abs(*lo), 1e-300);
}

namespace {

void check_problem(const Problem& problem) {
    const std::size_t count = problem.energy.grid().node_count();
    if (problem.mask.pinned.size() != count || problem.mask.values.size() != count)
        throw InvalidParameter("constraint mask does not match the grid");
    if (problem.mask.free_count() == 0) throw InvalidParameter("problem has no free nodes");
    for (std::size_t i = 0; i < count; ++i)
        if (problem.mask.is_pinned(i) && !std::isfinite(problem.mask.values[i]))
            throw InvalidParameter("pinned value is not finite");
}

double masked_sup(const ConstraintMask& mask, std::span<double> grad) {
    double sup = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (mask.is_pinned(i)) grad[i] = 0.0;
        sup = std::max(sup, std::abs(grad[i]));
    }
    return sup;
}

}  // namespace

Field initial_field(const Problem& problem, const MinimizeOptions& opts, int restart) {
    check_problem(problem);
    const Grid& grid = problem.energy.grid();
    const ConstraintMask& mask = problem.mask;
    const int d = grid.dimension();
    const std::size_t pinned = mask.pinned_count();

    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    if (pinned > 0) {
        Eigen::MatrixXd A(static_cast<Eigen::Index>(pinned), d + 1);
        Eigen::VectorXd b(static_cast<Eigen::Index>(pinned));
        Eigen::Index row = 0;
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
            if (!mask.is_pinned(i)) continue;
            const Vec x = grid.position(i);
            A(row, 0) = 1.0;
            A(row, 1) = x[0];
            if (d == 2) A(row, 2) = x[1];
            b(row) = mask.values[i];
            ++row;
        }
        const Eigen::VectorXd c = A.completeOrthogonalDecomposition().solve(b);
        c0 = c(0);
        c1 = c(1);
        if (d == 2) c2 = c(2);
    }

    Field u(grid);
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const Vec x = grid.position(i);
        u[i] = mask.is_pinned(i) ? mask.values[i] : c0 + c1 * x[0] + c2 * x[1];
    }
    if (restart >= 1 && opts.perturbation > 0.0) {
        const double amplitude = opts.perturbation * grid.h() * std::pow(opts.perturbation_decay, restart - 1);
        std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                          static_cast<std::uint32_t>(restart)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> noise(-amplitude, amplitude);
        for (std::size_t i = 0; i < grid.node_count(); ++i)
            if (!mask.is_pinned(i)) u[i] += noise(rng);
    }
    return u;
}

MinResult minimize_from(const Problem& problem, Field start, const MinimizeOptions& opts) {
    opts.validate();
    check_problem(problem);
    const DiscreteEnergy& energy = problem.energy;
    const ConstraintMask& mask = problem.mask;
    if (!(start.grid == energy.grid())) throw InvalidInput("starting field does not match the grid");
    const std::size_t count = start.size();
    for (std::size_t i = 0; i < count; ++i)
        if (mask.is_pinned(i)) start[i] = mask.values[i];
    if (!start.all_finite()) throw InvalidInput("starting field contains non-finite values");

    MinResult result{std::move(start), {}, 0, 0.0, false, false, {}, {}, {}};
    std::vector<double>& u = result.field.values;
    std::vector<double> grad(count), trial(count), trial_grad(count);

    EnergyBreakdown e = energy.energy_and_gradient(u, grad);
    if (!std::isfinite(e.total)) throw Diverged("energy is not finite at the starting field", u);
    double gnorm = masked_sup(mask, grad);
    const double tol = std::max(opts.grad_tol * gnorm, opts.grad_tol_floor);
    result.history.push_back(e.total);

    const double h = energy.grid().h();
    double alpha = gnorm > 0.0 ? opts.step_init * h / gnorm : 0.0;
    constexpr int kMaxBacktracks = 60;

    while (gnorm > tol && result.iterations < opts.max_iters) {
        double gg = 0.0;
        for (std::size_t i = 0; i < count; ++i) gg += grad[i] * grad[i];

        bool accepted = false;
        bool any_finite = false;
        double change = 0.0;
        for (int bt = 0; bt < kMaxBacktracks && !accepted; ++bt) {
            bool finite = true;
            for (std::size_t i = 0; i < count; ++i) {
                trial[i] = u[i] - alpha * grad[i];
                finite = finite && std::isfinite(trial[i]);
            }
            if (finite) {
                change = energy.energy_change(u, trial);
                if (std::isfinite(change)) {
                    any_finite = true;
                    accepted = change < 0.0 && change <= -opts.armijo_c * alpha * gg;
                }
            }
            if (!accepted) alpha *= opts.backtrack_factor;
        }
        if (!accepted) {
            if (!any_finite) throw Diverged("energy is not finite along the descent direction", u);
            result.stalled = true;
            break;
        }
        const EnergyBreakdown et = energy.energy_and_gradient(trial, trial_grad);
        if (!std::isfinite(et.total)) throw Diverged("energy is not finite after an accepted step", u);

        const double trial_gnorm = masked_sup(mask, trial_grad);
        // Barzilai-Borwein step s.s / s.y for the next trial.
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double s = trial[i] - u[i];
            ss += s * s;
            sy += s * (trial_grad[i] - grad[i]);
        }
        u.swap(trial);
        grad.swap(trial_grad);
        e = et;
        gnorm = trial_gnorm;
        ++result.iterations;
        result.history.push_back(e.total);
        result.step_changes.push_back(change);
        if (sy > 0.0 && std::isfinite(ss / sy)) alpha = ss / sy;
        else alpha = gnorm > 0.0 ? opts.step_init * h / gnorm : alpha;
    }

    result.energy = e;
    result.grad_norm = gnorm;
    result.converged = gnorm <= tol;
    result.restart_energies = {e.total};
    return result;
}

MinResult minimize(const Problem& problem, const MinimizeOptions& opts) {
    opts.validate();
    check_problem(problem);
    const auto restarts = static_cast<std::size_t>(opts.restarts);
    std::vector<std::optional<MinResult>> runs(restarts);
    parallel_for(restarts, opts.jobs, [&](std::size_t r) {
        runs[r] = minimize_from(problem, initial_field(problem, opts, static_cast<int>(r)), opts);
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (runs[r]->energy.total < runs[best]->energy.total) best = r;
    MinResult result = std::move(*runs[best]);
    result.restart_energies.clear();
    for (const auto& run : runs) result.restart_energies.push_back(run->energy.total);
    return result;
}

double gradient_check(const Problem& problem, int n_probes, std::uint64_t seed, double fd_step) {
    check_problem(problem);
    if (!(fd_step > 0.0)) throw InvalidParameter("finite-difference step must be positive");
    const DiscreteEnergy& energy = problem.energy;
    const std::size_t count = energy.grid().node_count();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> u(count), grad(count);
    double worst = 0.0;
    for (int probe = 0; probe < n_probes; ++probe) {
        for (std::size_t i = 0; i < count; ++i)
            u[i] = problem.mask.is_pinned(i) ? problem.mask.values[i] : unit(rng);
        energy.energy_and_gradient(u, grad);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            if (problem.mask.is_pinned(i)) continue;
            const double saved = u[i];
            u[i] = saved + fd_step;
            const double ep = energy.energy(u).total;
            u[i] = saved - fd_step;
            const double em = energy.energy(u).total;
            u[i] = saved;
            const double fd = (ep - em) / (2.0 * fd_step);
            err = std::max(err, std::abs(grad[i] - fd));
            scale = std::max(scale, std::abs(fd));
        }
        worst = std::max(worst, err / std::max(scale, std::numeric_limits<double>::min()));
    }
    return worst;
}

}  // namespace gammalab
