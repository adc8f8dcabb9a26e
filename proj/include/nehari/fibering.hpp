#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "nehari/errors.hpp"
#include "nehari/grid.hpp"
#include "nehari/model.hpp"

namespace nehari {

struct AdmissibilityMargin {
    double delta = 0.0; // int eta u^2 - ||u||^2
    bool in_A = false;  // delta > 0, no tolerance in the predicate
};

struct FiberingResult {
    double t = 0.0;              // the unique scaling with t u on the Nehari set
    double value = 0.0;          // I(t u)
    double slope_residual = 0.0; // |h_u'(t)| at the root
    double t_lo = 0.0;           // bracket with h_u'(t_lo) > 0 > h_u'(t_hi)
    double t_hi = 0.0;
    int iterations = 0;
};

struct GradientResult {
    GridField pointwise;          // r with sum_i r_i v_i vol = I'(u) v
    GridField riesz;              // energy Riesz representative of I'(u)
    double dual_norm = 0.0;       // energy norm of riesz (discrete dual norm)
    double euclidean_norm = 0.0;  // plain 2-norm of the assembled dual vector
};

struct PsiGradient {
    GridField tangent;          // Riesz gradient projected onto {w : q(v,w) = 0}
    double tangent_norm = 0.0;  // its energy norm (tangent dual residual)
    double value = 0.0;         // Psi(v)
    FiberingResult fiber;
};

struct FiberingOptions {
    double tol = 1e-12;        // slope residual tolerance, relative to 1 + t
    double bracket_cap = 1e12; // doubling/halving limits from t = 1
    double bracket_floor = 1e-12;
    int max_iter = 300;
};

/// Discretized energy I(u) = ||u||^2/2 - int F(x,u) with its fibering-map
/// machinery. Immutable after construction; all methods are const and safe
/// for concurrent use on distinct fields.
class Problem {
public:
    Problem(NonlinearModel model, std::shared_ptr<const Grid> grid)
        : model_(std::move(model)), stiffness_(grid), points_(grid->size()) {
        for (std::int64_t i = 0; i < grid->size(); ++i) points_[i] = grid->point(i);
    }

    const NonlinearModel& model() const { return model_; }
    const StiffnessForm& stiffness() const { return stiffness_; }
    const Grid& grid() const { return stiffness_.grid(); }
    const std::shared_ptr<const Grid>& grid_ptr() const { return stiffness_.grid_ptr(); }
    const std::vector<Point>& points() const { return points_; }

    double energy(const GridField& u) const {
        return 0.5 * stiffness_.energy_norm2(u) - integral_F(u, 1.0);
    }

    /// int F(x, t u) dx by the nodal rule.
    double integral_F(const GridField& u, double t) const {
        const double vol = grid().volume_element();
        double s = 0.0;
        for (std::int64_t i = 0; i < u.size(); ++i) s += model_.F(points_[i], t * u[i]);
        return s * vol;
    }

    /// int f(x, t u) u dx by the nodal rule.
    double integral_fu(const GridField& u, double t) const {
        const double vol = grid().volume_element();
        double s = 0.0;
        for (std::int64_t i = 0; i < u.size(); ++i) s += model_.f(points_[i], t * u[i]) * u[i];
        return s * vol;
    }

    /// int eta(x) u^2 dx.
    double integral_eta_u2(const GridField& u) const {
        const double vol = grid().volume_element();
        double s = 0.0;
        for (std::int64_t i = 0; i < u.size(); ++i) s += model_.eta(points_[i]) * u[i] * u[i];
        return s * vol;
    }

    /// int alpha(x) u^2 dx.
    double integral_alpha_u2(const GridField& u) const {
        const double vol = grid().volume_element();
        double s = 0.0;
        for (std::int64_t i = 0; i < u.size(); ++i) s += model_.alpha(points_[i]) * u[i] * u[i];
        return s * vol;
    }

    GradientResult gradient(const GridField& u) const {
        const double vol = grid().volume_element();
        Eigen::VectorXd fu(u.size());
        for (std::int64_t i = 0; i < u.size(); ++i) fu[i] = model_.f(points_[i], u[i]);
        const Eigen::VectorXd dual = stiffness_.apply(u.values()) - vol * fu;
        const Eigen::VectorXd riesz = stiffness_.solve(dual);
        const double dn = std::sqrt(std::max(0.0, dual.dot(riesz)));
        return {GridField(grid_ptr(), dual / vol), GridField(grid_ptr(), riesz), dn,
                dual.norm()};
    }

    AdmissibilityMargin admissibility(const GridField& u) const {
        const double delta = integral_eta_u2(u) - stiffness_.energy_norm2(u);
        return {delta, delta > 0.0};
    }

    /// h_u(t) = I(t u) and h_u'(t) for one scaling.
    double fiber_value(const GridField& u, double q_uu, double t) const {
        return 0.5 * t * t * q_uu - integral_F(u, t);
    }
    double fiber_slope(const GridField& u, double q_uu, double t) const {
        return t * q_uu - integral_fu(u, t);
    }

    /// The unique positive root of h_u'; requires u in the admissible cone.
    FiberingResult project_fiber(const GridField& u, FiberingOptions opts = {}) const {
        const double q_uu = stiffness_.energy_norm2(u);
        if (!(q_uu > 0.0)) throw PreconditionError("project_fiber: zero field");
        const auto adm = admissibility(u);
        if (!adm.in_A)
            throw NotInAError("project_fiber: field is not admissible (delta = " +
                              std::to_string(adm.delta) + " <= 0), no fibering root exists");

        // phi(t) = h'(t)/t is strictly decreasing when f(x,t)/|t| increases.
        auto phi = [&](double t) { return q_uu - integral_fu(u, t) / t; };

        double lo = 1.0, hi = 1.0;
        double phi_lo = phi(1.0), phi_hi = phi_lo;
        int iters = 1;
        if (phi_lo > 0.0) {
            hi = 2.0;
            phi_hi = phi(hi);
            ++iters;
            while (phi_hi > 0.0) {
                lo = hi;
                phi_lo = phi_hi;
                hi *= 2.0;
                if (hi > opts.bracket_cap)
                    throw BracketOverflowError(
                        "project_fiber: no sign change of the fiber slope below t = 1e12; "
                        "the slope of f at infinity may be misestimated");
                phi_hi = phi(hi);
                ++iters;
            }
        } else if (phi_lo < 0.0) {
            lo = 0.5;
            phi_lo = phi(lo);
            ++iters;
            while (phi_lo < 0.0) {
                hi = lo;
                phi_hi = phi_lo;
                lo *= 0.5;
                if (lo < opts.bracket_floor)
                    throw BracketOverflowError(
                        "project_fiber: no sign change of the fiber slope above t = 1e-12; "
                        "the fiber is decreasing from the origin");
                phi_lo = phi(lo);
                ++iters;
            }
        }

        // Bisection with a secant step every other iteration.
        double t = 0.5 * (lo + hi), ph = (phi_lo == 0.0) ? 0.0 : phi(t);
        if (phi_lo == 0.0) {
            t = lo;
            ph = phi_lo;
        }
        for (; iters < opts.max_iter; ++iters) {
            const double slope = t * ph;
            if (std::fabs(slope) <= opts.tol * (1.0 + t)) break;
            if (ph > 0.0) {
                lo = t;
                phi_lo = ph;
            } else {
                hi = t;
                phi_hi = ph;
            }
            double cand;
            if (iters % 2 == 0 && phi_lo != phi_hi) {
                cand = lo + (hi - lo) * phi_lo / (phi_lo - phi_hi);
                const double margin = 0.01 * (hi - lo);
                if (!(cand > lo + margin && cand < hi - margin)) cand = 0.5 * (lo + hi);
            } else {
                cand = 0.5 * (lo + hi);
            }
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
            t = cand;
            ph = phi(t);
        }

        FiberingResult r;
        r.t = t;
        r.slope_residual = std::fabs(t * ph);
        r.value = fiber_value(u, q_uu, t);
        r.t_lo = lo;
        r.t_hi = hi;
        r.iterations = iters;
        return r;
    }

    /// Projection onto the Nehari set along the ray through u.
    GridField nehari_map(const GridField& u, FiberingOptions opts = {}) const {
        const FiberingResult fr = project_fiber(u, opts);
        return GridField(grid_ptr(), fr.t * u.values());
    }

    /// Inverse of the projection restricted to the unit sphere: u / ||u||.
    GridField nehari_inverse(const GridField& u) const {
        const double nrm = stiffness_.norm(u);
        if (!(nrm > 0.0)) throw PreconditionError("nehari_inverse: zero field");
        return GridField(grid_ptr(), u.values() / nrm);
    }

    /// Psi(v) = I(t_v v) for unit-norm admissible v.
    double psi(const GridField& v, FiberingOptions opts = {}) const {
        return project_fiber(v, opts).value;
    }

    /// Value, fibering data and tangent gradient of Psi at unit-norm v.
    /// The gradient is ||m(v)|| times the Riesz field of I'(m(v)), projected
    /// onto the tangent space {w : q(v,w) = 0}.
    PsiGradient psi_grad(const GridField& v, FiberingOptions opts = {}) const {
        const FiberingResult fr = project_fiber(v, opts);
        GridField w(grid_ptr(), fr.t * v.values());
        const GradientResult gr = gradient(w);
        const double norm_w = stiffness_.norm(w);
        Eigen::VectorXd g = norm_w * gr.riesz.values();
        const double radial = v.values().dot(stiffness_.matrix() * g);
        g -= radial * v.values();
        GridField tangent(grid_ptr(), std::move(g));
        const double tn = stiffness_.norm(tangent);
        return {std::move(tangent), tn, fr.value, fr};
    }

    struct LandscapeRow {
        double t;
        double h;       // h_u(t) = I(t u)
        double hprime;  // h_u'(t)
    };

    /// Samples of the fiber map for plotting and sign-pattern diagnosis.
    std::vector<LandscapeRow> landscape(const GridField& u, const std::vector<double>& ts) const {
        const double q_uu = stiffness_.energy_norm2(u);
        if (!(q_uu > 0.0)) throw PreconditionError("landscape: zero field");
        std::vector<LandscapeRow> rows;
        rows.reserve(ts.size());
        for (double t : ts) {
            if (t == 0.0) {
                rows.push_back({0.0, 0.0, 0.0});
                continue;
            }
            rows.push_back({t, fiber_value(u, q_uu, t), fiber_slope(u, q_uu, t)});
        }
        return rows;
    }

private:
    NonlinearModel model_;
    StiffnessForm stiffness_;
    std::vector<Point> points_;
};

} // namespace nehari
