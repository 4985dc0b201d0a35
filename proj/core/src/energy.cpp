#include "gammalab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gammalab/error.hpp"

namespace gammalab {

DiscreteEnergy::DiscreteEnergy(Grid grid, std::optional<NonlocalDensity> f, std::optional<LocalDensity> g,
                               EnergyParams params)
    : grid_(grid), f_(std::move(f)), g_(std::move(g)), params_(params) {
    if (!(params_.k > 0.0) || !std::isfinite(params_.k)) throw InvalidParameter("concentration k must be positive");
    const bool periodic = (f_ && f_->periodic) || (g_ && g_->periodic);
    if (periodic && !params_.eps_period)
        throw InvalidParameter("periodic densities need a period scale eps_period");
    if (params_.eps_period && !(*params_.eps_period > 0.0)) throw InvalidParameter("eps_period must be positive");
    if (f_ && !f_->value) throw InvalidParameter("nonlocal density has no value function");
    if (g_ && !g_->value) throw InvalidParameter("local density has no value function");
    if (f_ && f_->kernel && f_->kernel->dimension() != grid_.dimension())
        throw InvalidParameter("kernel dimension differs from grid dimension");
    if (!f_) return;

    const double h = grid_.h();
    const double radius = 1.0 / params_.k;
    const auto reach = static_cast<int>(std::floor(radius / h * (1.0 + kSupportSlack)));
    const int n = static_cast<int>(grid_.n());
    const int dy_max = grid_.dimension() == 2 ? std::min(reach, n - 1) : 0;
    const int dx_max = std::min(reach, n - 1);
    fast_ = f_->kernel_power.has_value() && f_->kernel;
    const double kd = grid_.dimension() == 1 ? params_.k : params_.k * params_.k;

    for (int dy = 0; dy <= dy_max; ++dy) {
        Row row{dy, 0, -1, offsets_.size()};
        for (int dx = -dx_max; dx <= dx_max; ++dx) {
            if (dy == 0 && dx <= 0) continue;
            const double dist = std::hypot(static_cast<double>(dx), static_cast<double>(dy)) * h;
            if (dist > radius * (1.0 + kSupportSlack)) continue;
            if (row.dx_hi < row.dx_lo) row.dx_lo = dx;
            row.dx_hi = dx;
            offsets_.push_back({dx, dy, {-dx * h, -dy * h}});
            if (fast_) weights_.push_back(kd * f_->kernel->profile(params_.k * dist) / abs_pow(dist, f_->p));
        }
        if (row.dx_hi >= row.dx_lo) rows_.push_back(row);
    }

    if (fast_ && f_->kernel_power->weight) {
        node_weight_.resize(grid_.node_count());
        for (std::size_t i = 0; i < node_weight_.size(); ++i) {
            Vec X = grid_.position(i);
            if (f_->periodic) X = scaled(X, 1.0 / *params_.eps_period);
            node_weight_[i] = f_->kernel_power->weight(X);
        }
    }
}

std::size_t DiscreteEnergy::pair_count() const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(grid_.n());
    std::size_t count = 0;
    for (const auto& o : offsets_) {
        const std::ptrdiff_t cx = n - std::abs(o.dx);
        const std::ptrdiff_t cy = grid_.dimension() == 2 ? n - o.dy : 1;
        if (cx > 0 && cy > 0) count += static_cast<std::size_t>(cx * cy);
    }
    return count;
}

void DiscreteEnergy::check_input(std::span<const double> u) const {
    if (u.size() != grid_.node_count()) throw InvalidInput("field size does not match the grid");
    for (double v : u)
        if (!std::isfinite(v)) throw InvalidInput("field contains non-finite values");
}

/// Calls body(i, j0, o0, m) for every node i and every row of offsets clipped to the
/// grid: the partners are j0, j0 + 1, ..., j0 + m - 1 with offsets o0, ..., o0 + m - 1.
/// Visiting order is fixed: nodes ascending, then offsets ascending in (dy, dx).
template <class Body>
void DiscreteEnergy::visit_pairs(Body&& body) const {
    const auto n = static_cast<std::ptrdiff_t>(grid_.n());
    const std::size_t count = grid_.node_count();
    for (std::size_t i = 0; i < count; ++i) {
        const auto ix = static_cast<std::ptrdiff_t>(grid_.ix(i));
        const auto iy = static_cast<std::ptrdiff_t>(grid_.iy(i));
        for (const Row& row : rows_) {
            if (iy + row.dy >= n) break;
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(row.dx_lo, -ix);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(row.dx_hi, n - 1 - ix);
            if (lo > hi) continue;
            const auto j0 = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + lo + n * row.dy);
            body(i, j0, row.first + static_cast<std::size_t>(lo - row.dx_lo), static_cast<std::size_t>(hi - lo + 1));
        }
    }
}

namespace {

enum class Pass { energy, gradient, change };

template <int P>
inline double power(double t, double p) {
    if constexpr (P == 2) return t * t;
    else if constexpr (P == 4) return (t * t) * (t * t);
    else return abs_pow(t, p);
}

template <int P>
inline double power_derivative(double t, double p) {
    if constexpr (P == 2) return 2.0 * t;
    else if constexpr (P == 4) return 4.0 * t * t * t;
    else return abs_pow_derivative(t, p);
}

template <int P>
inline double power_change(double t, double dt, double p) {
    if constexpr (P == 2) return dt * (t + t + dt);
    else return abs_pow_change(t, dt, p);
}

}  // namespace

namespace {

/// Kernel-power pair sums for one exponent specialisation.
template <int P, bool Weighted, Pass Mode>
struct FastPairs {
    std::span<const double> u;
    std::span<const double> v;  // trial field (change pass)
    std::span<double> grad;     // unscaled gradient (gradient pass)
    const double* weights;
    const double* node_weight;
    double p;
    double sum = 0.0;

    void operator()(std::size_t i, std::size_t j0, std::size_t o0, std::size_t m) {
        const double ui = u[i];
        const double* w = weights + o0;
        double gi = 0.0;
        [[maybe_unused]] const double di = Mode == Pass::change ? v[i] - ui : 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            const std::size_t j = j0 + a;
            const double tau = ui - u[j];
            double c = w[a];
            if constexpr (Weighted) c *= 0.5 * (node_weight[i] + node_weight[j]);
            if constexpr (Mode == Pass::change) {
                const double term = c * power_change<P>(tau, di - (v[j] - u[j]), p);
                sum += term + term;
            } else {
                const double term = c * power<P>(tau, p);
                sum += term + term;
                if constexpr (Mode == Pass::gradient) {
                    const double dv = 2.0 * c * power_derivative<P>(tau, p);
                    gi += dv;
                    grad[j] -= dv;
                }
            }
        }
        if constexpr (Mode == Pass::gradient) grad[i] += gi;
    }
};

}  // namespace

namespace {

template <Pass Mode, int P, bool Weighted, class Visit>
double run_fast(Visit&& visit, std::span<const double> u, std::span<const double> v, std::span<double> grad,
                const std::vector<double>& weights, const std::vector<double>& node_weight, double p) {
    FastPairs<P, Weighted, Mode> pairs{u, v, grad, weights.data(), node_weight.data(), p};
    visit(pairs);
    return pairs.sum;
}

template <Pass Mode, class Visit>
double dispatch_fast(Visit&& visit, std::span<const double> u, std::span<const double> v, std::span<double> grad,
                     const std::vector<double>& weights, const std::vector<double>& node_weight, double p) {
    const bool weighted = !node_weight.empty();
    if (p == 2.0) {
        return weighted ? run_fast<Mode, 2, true>(visit, u, v, grad, weights, node_weight, p)
                        : run_fast<Mode, 2, false>(visit, u, v, grad, weights, node_weight, p);
    }
    if (p == 4.0) {
        return weighted ? run_fast<Mode, 4, true>(visit, u, v, grad, weights, node_weight, p)
                        : run_fast<Mode, 4, false>(visit, u, v, grad, weights, node_weight, p);
    }
    return weighted ? run_fast<Mode, 0, true>(visit, u, v, grad, weights, node_weight, p)
                    : run_fast<Mode, 0, false>(visit, u, v, grad, weights, node_weight, p);
}

}  // namespace

double DiscreteEnergy::nonlocal_term(std::span<const double> u, std::span<double> grad) const {
    if (!f_) return 0.0;
    const int d = grid_.dimension();
    const double hd = d == 1 ? grid_.h() : grid_.h() * grid_.h();
    const double h2d = hd * hd;

    // Each unordered pair contributes f_ij + f_ji.
    if (fast_) {
        auto visit = [this](auto& pairs) { visit_pairs(pairs); };
        double sum = 0.0;
        if (grad.empty()) {
            sum = dispatch_fast<Pass::energy>(visit, u, {}, {}, weights_, node_weight_, f_->p);
        } else {
            std::vector<double> raw(grad.size(), 0.0);
            sum = dispatch_fast<Pass::gradient>(visit, u, {}, raw, weights_, node_weight_, f_->p);
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += h2d * raw[i];
        }
        return h2d * sum;
    }

    const bool want_grad = !grad.empty();
    const double k = params_.k;
    const double kd = d == 1 ? k : k * k;
    const double inv_eps = f_->periodic ? 1.0 / *params_.eps_period : 1.0;
    const double gscale = h2d * kd * k;
    double sum = 0.0;
    visit_pairs([&](std::size_t i, std::size_t j0, std::size_t o0, std::size_t m) {
        const Vec Xi = scaled(grid_.position(i), inv_eps);
        for (std::size_t a = 0; a < m; ++a) {
            const std::size_t j = j0 + a;
            const Vec Xj = scaled(grid_.position(j), inv_eps);
            const Vec kz = scaled(offsets_[o0 + a].z, k);
            const double ktau = k * (u[i] - u[j]);
            sum += (*f_)(Xi, Xj, kz, ktau) + (*f_)(Xj, Xi, scaled(kz, -1.0), -ktau);
            if (want_grad) {
                const double dij = f_->derivative_tau(Xi, Xj, kz, ktau);
                const double dji = f_->derivative_tau(Xj, Xi, scaled(kz, -1.0), -ktau);
                grad[i] += gscale * (dij - dji);
                grad[j] += gscale * (dji - dij);
            }
        }
    });
    return h2d * kd * sum;
}

double DiscreteEnergy::nonlocal_change(std::span<const double> u, std::span<const double> v) const {
    if (!f_) return 0.0;
    const int d = grid_.dimension();
    const double hd = d == 1 ? grid_.h() : grid_.h() * grid_.h();
    const double h2d = hd * hd;
    if (fast_) {
        auto visit = [this](auto& pairs) { visit_pairs(pairs); };
        return h2d * dispatch_fast<Pass::change>(visit, u, v, {}, weights_, node_weight_, f_->p);
    }

    const double k = params_.k;
    const double kd = d == 1 ? k : k * k;
    const double inv_eps = f_->periodic ? 1.0 / *params_.eps_period : 1.0;
    double sum = 0.0;
    visit_pairs([&](std::size_t i, std::size_t j0, std::size_t o0, std::size_t m) {
        const Vec Xi = scaled(grid_.position(i), inv_eps);
        for (std::size_t a = 0; a < m; ++a) {
            const std::size_t j = j0 + a;
            const Vec Xj = scaled(grid_.position(j), inv_eps);
            const Vec kz = scaled(offsets_[o0 + a].z, k);
            const Vec mkz = scaled(kz, -1.0);
            const double tau = k * (u[i] - u[j]);
            const double vtau = k * (v[i] - v[j]);
            sum += ((*f_)(Xi, Xj, kz, vtau) - (*f_)(Xi, Xj, kz, tau)) +
                   ((*f_)(Xj, Xi, mkz, -vtau) - (*f_)(Xj, Xi, mkz, -tau));
        }
    });
    return h2d * kd * sum;
}

double DiscreteEnergy::local_term(std::span<const double> u, std::span<double> grad) const {
    if (!g_) return 0.0;
    const bool want_grad = !grad.empty();
    const int d = grid_.dimension();
    const std::size_t n = grid_.n();
    const double h = grid_.h();
    const double hd = d == 1 ? h : h * h;
    const double inv_eps = g_->periodic ? 1.0 / *params_.eps_period : 1.0;
    double sum = 0.0;
    if (d == 1) {
        for (std::size_t c = 0; c + 1 < n; ++c) {
            const Vec X{(static_cast<double>(c) + 0.5) * h * inv_eps, 0.0};
            const Vec D{(u[c + 1] - u[c]) / h, 0.0};
            sum += (*g_)(X, D);
            if (want_grad) {
                const double dg = g_->grad_xi(X, D)[0] * hd / h;
                grad[c + 1] += dg;
                grad[c] -= dg;
            }
        }
        return hd * sum;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t a = i + n * j;
            const Vec X{(static_cast<double>(i) + 0.5) * h * inv_eps, (static_cast<double>(j) + 0.5) * h * inv_eps};
            const Vec D{(u[a + 1] - u[a]) / h, (u[a + n] - u[a]) / h};
            sum += (*g_)(X, D);
            if (want_grad) {
                const Vec dg = scaled(g_->grad_xi(X, D), hd / h);
                grad[a + 1] += dg[0];
                grad[a + n] += dg[1];
                grad[a] -= dg[0] + dg[1];
            }
        }
    }
    return hd * sum;
}

double DiscreteEnergy::local_change(std::span<const double> u, std::span<const double> v) const {
    if (!g_) return 0.0;
    const int d = grid_.dimension();
    const std::size_t n = grid_.n();
    const double h = grid_.h();
    const double hd = d == 1 ? h : h * h;
    const double inv_eps = g_->periodic ? 1.0 / *params_.eps_period : 1.0;
    double sum = 0.0;
    if (d == 1) {
        for (std::size_t c = 0; c + 1 < n; ++c) {
            const Vec X{(static_cast<double>(c) + 0.5) * h * inv_eps, 0.0};
            const Vec D{(u[c + 1] - u[c]) / h, 0.0};
            const Vec dD{((v[c + 1] - u[c + 1]) - (v[c] - u[c])) / h, 0.0};
            sum += g_->change(X, D, dD);
        }
        return hd * sum;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t a = i + n * j;
            const Vec X{(static_cast<double>(i) + 0.5) * h * inv_eps, (static_cast<double>(j) + 0.5) * h * inv_eps};
            const Vec D{(u[a + 1] - u[a]) / h, (u[a + n] - u[a]) / h};
            const double da = v[a] - u[a];
            const Vec dD{((v[a + 1] - u[a + 1]) - da) / h, ((v[a + n] - u[a + n]) - da) / h};
            sum += g_->change(X, D, dD);
        }
    }
    return hd * sum;
}

double DiscreteEnergy::energy_change(std::span<const double> u, std::span<const double> v) const {
    check_input(u);
    check_input(v);
    return nonlocal_change(u, v) + local_change(u, v);
}

EnergyBreakdown DiscreteEnergy::energy(std::span<const double> u) const {
    check_input(u);
    EnergyBreakdown e;
    e.nonlocal = nonlocal_term(u, {});
    e.local = local_term(u, {});
    e.total = e.nonlocal + e.local;
    e.density = e.total;
    return e;
}

EnergyBreakdown DiscreteEnergy::energy_and_gradient(std::span<const double> u, std::span<double> grad) const {
    check_input(u);
    if (grad.size() != u.size()) throw InvalidInput("gradient buffer does not match the field size");
    std::fill(grad.begin(), grad.end(), 0.0);
    EnergyBreakdown e;
    e.nonlocal = nonlocal_term(u, grad);
    e.local = local_term(u, grad);
    e.total = e.nonlocal + e.local;
    e.density = e.total;
    return e;
}

EnergyBreakdown assemble_energy(const Field& u, double k, const std::optional<NonlocalDensity>& f,
                                const std::optional<LocalDensity>& g, std::optional<double> eps_period) {
    return DiscreteEnergy(u.grid, f, g, {k, eps_period}).energy(u.values);
}

Field assemble_gradient(const Field& u, double k, const std::optional<NonlocalDensity>& f,
                        const std::optional<LocalDensity>& g, std::optional<double> eps_period) {
    Field grad(u.grid);
    DiscreteEnergy(u.grid, f, g, {k, eps_period}).energy_and_gradient(u.values, grad.values);
    return grad;
}

std::size_t ConstraintMask::free_count() const noexcept {
    return static_cast<std::size_t>(std::count(pinned.begin(), pinned.end(), std::uint8_t{0}));
}

ConstraintMask ConstraintMask::none(std::size_t size) {
    return {std::vector<std::uint8_t>(size, 0), std::vector<double>(size, 0.0)};
}

ConstraintMask boundary_layer_mask(const Grid& grid, const AffineFunction& w, double layer) {
    if (!(layer >= 0.0)) throw InvalidParameter("boundary layer width must be >= 0");
    if (layer >= 0.5) throw InvalidParameter("boundary layer width >= 1/2 pins every node");
    ConstraintMask mask = ConstraintMask::none(grid.node_count());
    const double limit = layer * (1.0 + kSupportSlack) + 1e-14;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        if (grid.boundary_distance(i) <= limit) {
            mask.pinned[i] = 1;
            mask.values[i] = w(grid.position(i));
        }
    }
    return mask;
}

DiagonalBound diagonal_bound_check(const Field& u, double k, const NonlocalDensity& f) {
    if (!f.kernel_power || f.kernel_power->weight || !f.kernel)
        throw InvalidParameter("diagonal bound needs the unweighted kernel-power density");
    const Grid& grid = u.grid;
    const int d = grid.dimension();
    const double p = f.p;

    DiagonalBound out;
    out.lhs = DiscreteEnergy(grid, f, std::nullopt, {k, std::nullopt}).energy(u.values).nonlocal;

    // Discrete Dirichlet p-energy with forward differences on cells.
    const double h = grid.h();
    const std::size_t n = grid.n();
    double dirichlet = 0.0;
    if (d == 1) {
        for (std::size_t c = 0; c + 1 < n; ++c) dirichlet += abs_pow((u[c + 1] - u[c]) / h, p);
        dirichlet *= h;
    } else {
        for (std::size_t j = 0; j + 1 < n; ++j)
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const std::size_t a = i + n * j;
                dirichlet += abs_pow(std::hypot((u[a + 1] - u[a]) / h, (u[a + n] - u[a]) / h), p);
            }
        dirichlet *= h * h;
    }
    // C delta^d ||psi_k||_inf = 2^d omega_d ||psi||_inf with delta = 1/k.
    const double omega = d == 1 ? 2.0 : std::numbers::pi;
    const double C = (d == 1 ? 2.0 : 4.0) * omega;
    out.rhs = C * f.kernel->sup() * dirichlet;
    out.pass = out.lhs <= out.rhs * 1.1;
    return out;
}

}  // namespace gammalab
