#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nehari/errors.hpp"
#include "nehari/expression.hpp"
#include "nehari/grid.hpp"

namespace nehari {

enum class BetaMode { closed_form, numeric_limit, infinite };

/// Nonlinearity f(x,t) together with its primitive F, the slopes at zero
/// and at infinity, and metadata. Evaluators are immutable; concurrent
/// reads are safe.
struct NonlinearModel {
    std::function<double(const Point&, double)> f;
    std::function<double(const Point&, double)> F;
    std::function<double(const Point&)> alpha; // slope of f(x,t)/t at t -> 0
    std::function<double(const Point&)> eta;   // slope of f(x,t)/t at |t| -> inf
    bool odd = false;
    BetaMode beta_mode = BetaMode::numeric_limit;
    std::optional<double> beta_closed; // closed-form limit when the family has one
    std::string kind;
    std::map<std::string, double> params;
};

/// Adaptive Simpson quadrature; handles b < a with the usual sign convention.
template <typename Fn>
double adaptive_simpson(const Fn& f, double a, double b, double tol = 1e-10) {
    struct Rec {
        const Fn& f;
        double eval(double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) const {
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
                return left + right + delta / 15.0;
            return eval(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
                   eval(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
        }
    };
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec{f}.eval(a, fa, b, fb, m, fm, whole, tol, 48);
}

/// Piecewise family: f(t) = t|t| for |t| <= theta, then a rational tail
/// eta t^5/(a + t^4) with a = theta^3 (eta - theta) chosen so f is continuous.
/// Asymptotic slope eta at infinity, zero slope at the origin, finite beta.
/// Config kind: "section5".
inline NonlinearModel piecewise_model(double theta, double eta) {
    if (!(eta > theta) || !(theta > 0.0))
        throw PreconditionError("piecewise model: need eta > theta > 0 (got theta=" +
                                std::to_string(theta) + ", eta=" + std::to_string(eta) + ")");
    const double a = theta * theta * theta * (eta - theta);
    const double sqrt_a = std::sqrt(a);
    const double F_theta = theta * theta * theta / 3.0;
    const double atan_theta = std::atan(theta * theta / sqrt_a);

    NonlinearModel m;
    m.f = [theta, eta, a](const Point&, double t) {
        const double at = std::fabs(t);
        if (at <= theta) return t * at;
        const double t4 = t * t * t * t;
        return eta * t4 * t / (a + t4);
    };
    m.F = [theta, eta, sqrt_a, F_theta, atan_theta](const Point&, double t) {
        const double at = std::fabs(t);
        if (at <= theta) return at * at * at / 3.0;
        const double t2 = t * t;
        return F_theta +
               0.5 * eta * (t2 - sqrt_a * std::atan(t2 / sqrt_a) -
                            theta * theta + sqrt_a * atan_theta);
    };
    m.alpha = [](const Point&) { return 0.0; };
    m.eta = [eta](const Point&) { return eta; };
    m.odd = true;
    m.beta_mode = BetaMode::closed_form;
    m.beta_closed = 0.5 * eta * theta * theta - 0.5 * eta * sqrt_a * atan_theta -
                    theta * theta * theta / 3.0 + M_PI * eta * sqrt_a / 4.0;
    m.kind = "section5";
    m.params = {{"theta", theta}, {"eta", eta}, {"a", a}};
    return m;
}

/// Smooth odd family f(t) = alpha t + (eta - alpha) t^3/(1+t^2) with
/// strictly increasing f(t)/|t|; its half f t - F grows like a logarithm,
/// so the limit beta is infinite.
inline NonlinearModel rational_model(double alpha, double eta) {
    if (!(eta > alpha) || !(alpha >= 0.0))
        throw PreconditionError("rational model: need eta > alpha >= 0 (got alpha=" +
                                std::to_string(alpha) + ", eta=" + std::to_string(eta) + ")");
    NonlinearModel m;
    m.f = [alpha, eta](const Point&, double t) {
        return alpha * t + (eta - alpha) * t * t * t / (1.0 + t * t);
    };
    m.F = [alpha, eta](const Point&, double t) {
        const double t2 = t * t;
        return 0.5 * alpha * t2 + 0.5 * (eta - alpha) * (t2 - std::log1p(t2));
    };
    m.alpha = [alpha](const Point&) { return alpha; };
    m.eta = [eta](const Point&) { return eta; };
    m.odd = true;
    m.beta_mode = BetaMode::infinite;
    m.kind = "rational";
    m.params = {{"alpha", alpha}, {"eta", eta}};
    return m;
}

/// Odd family f(t) = eta t + (alpha - eta) t/(1+t^2) with slope alpha at the
/// origin larger than the slope eta at infinity; F/t^2 stays bounded, the
/// regime of the coercive minimization path.
inline NonlinearModel coercive_model(double alpha, double eta) {
    if (!(alpha > eta) || !(eta > 0.0))
        throw PreconditionError("coercive model: need alpha > eta > 0 (got alpha=" +
                                std::to_string(alpha) + ", eta=" + std::to_string(eta) + ")");
    NonlinearModel m;
    m.f = [alpha, eta](const Point&, double t) {
        return eta * t + (alpha - eta) * t / (1.0 + t * t);
    };
    m.F = [alpha, eta](const Point&, double t) {
        const double t2 = t * t;
        return 0.5 * eta * t2 + 0.5 * (alpha - eta) * std::log1p(t2);
    };
    m.alpha = [alpha](const Point&) { return alpha; };
    m.eta = [eta](const Point&) { return eta; };
    m.odd = true;
    m.beta_mode = BetaMode::numeric_limit;
    m.kind = "coercive";
    m.params = {{"alpha", alpha}, {"eta", eta}};
    return m;
}

struct ExprModelOptions {
    std::optional<std::string> F_src;   // primitive, if the user has one
    std::optional<double> alpha;        // override for the slope at 0
    std::optional<double> eta;          // override for the slope at infinity
    std::optional<bool> odd;            // override for the symmetry flag
};

/// User-defined f from an expression in x, y, z, t. The primitive falls back
/// to adaptive quadrature, the slopes to numeric limits at t = 1e-6 and 1e6.
inline NonlinearModel parse_model(const std::string& f_src, ExprModelOptions opts = {}) {
    auto fe = std::make_shared<Expression>(Expression::parse(f_src));

    NonlinearModel m;
    m.f = [fe](const Point& x, double t) { return fe->eval(x, t); };

    if (opts.F_src) {
        auto Fe = std::make_shared<Expression>(Expression::parse(*opts.F_src));
        m.F = [Fe](const Point& x, double t) { return Fe->eval(x, t); };
    } else {
        m.F = [fe](const Point& x, double t) {
            return adaptive_simpson([&](double s) { return fe->eval(x, s); }, 0.0, t, 1e-10);
        };
    }

    if (opts.alpha) {
        const double a = *opts.alpha;
        m.alpha = [a](const Point&) { return a; };
    } else {
        m.alpha = [fe](const Point& x) {
            const double t0 = 1e-6;
            return 0.5 * (fe->eval(x, t0) / t0 - fe->eval(x, -t0) / t0);
        };
    }
    if (opts.eta) {
        const double e = *opts.eta;
        m.eta = [e](const Point&) { return e; };
    } else {
        m.eta = [fe](const Point& x) {
            const double T = 1e6;
            return 0.5 * (fe->eval(x, T) / T - fe->eval(x, -T) / T);
        };
    }

    if (opts.odd) {
        m.odd = *opts.odd;
    } else {
        bool odd = true;
        const Point origin{0.0, 0.0, 0.0};
        for (double t : {1e-3, 0.37, 1.0, 42.0, 1e4}) {
            const double fp = fe->eval(origin, t), fn = fe->eval(origin, -t);
            if (std::fabs(fp + fn) > 1e-12 * (1.0 + std::fabs(fp))) {
                odd = false;
                break;
            }
        }
        m.odd = odd;
    }
    m.beta_mode = BetaMode::numeric_limit;
    m.kind = "expr";
    return m;
}

/// Resonance defect g(x,t) = eta(x) t - f(x,t).
inline double resonance_defect(const NonlinearModel& m, const Point& x, double t) {
    return m.eta(x) * t - m.f(x, t);
}

/// Primitive of the defect, G(x,t) = eta(x) t^2/2 - F(x,t).
inline double resonance_defect_primitive(const NonlinearModel& m, const Point& x, double t) {
    return 0.5 * m.eta(x) * t * t - m.F(x, t);
}

struct BetaLimit {
    double value = 0.0; // +-infinity when the tail diverges
    double error = 0.0; // extrapolation error estimate (finite case)
    bool finite() const { return std::isfinite(value); }
};

namespace detail {

struct TailVerdict {
    enum class Kind { finite, diverges_up, diverges_down } kind;
    double value;
    double error;
};

// Classify the tail of b(T_k): converging (extrapolate in 1/T^2), diverging
// (monotone with non-decaying increments or beyond the cap), or oscillatory.
// b(T) is a difference of two O(eta T^2) quantities, so each rung carries a
// cancellation noise floor; rungs whose increments drown in it are dropped
// before classification.
inline TailVerdict classify_tail(std::vector<double> T, std::vector<double> b,
                                 std::vector<double> noise, double cap) {
    while (b.size() > 3) {
        const std::size_t n = b.size();
        if (std::fabs(b[n - 1] - b[n - 2]) > noise[n - 1] + noise[n - 2]) break;
        T.pop_back();
        b.pop_back();
        noise.pop_back();
    }

    const std::size_t n = b.size();
    std::vector<double> d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) d[k] = b[k + 1] - b[k];

    const std::size_t look = std::min<std::size_t>(4, d.size());
    const double floor = std::max(noise.back() + noise[n - 2], 1e-13 * (1.0 + std::fabs(b.back())));

    bool flat = true;
    for (std::size_t k = d.size() - look; k < d.size(); ++k)
        if (std::fabs(d[k]) > floor) flat = false;
    if (flat) return {TailVerdict::Kind::finite, b.back(), floor};

    bool inc = true, dec = true;
    for (std::size_t k = d.size() - look; k < d.size(); ++k) {
        if (d[k] < -floor) inc = false;
        if (d[k] > floor) dec = false;
    }

    if (inc || dec) {
        bool decaying = true;
        for (std::size_t k = d.size() - std::min<std::size_t>(3, d.size() - 1); k < d.size(); ++k)
            if (std::fabs(d[k]) > 0.3 * std::fabs(d[k - 1]) + 1e-300) decaying = false;
        if (!decaying || std::fabs(b.back()) > cap)
            return {inc ? TailVerdict::Kind::diverges_up : TailVerdict::Kind::diverges_down,
                    0.0, 0.0};

        // Richardson step assuming b(T) = beta - c/T^2.
        auto extrap = [&](std::size_t i, std::size_t j) {
            const double xi = 1.0 / (T[i] * T[i]), xj = 1.0 / (T[j] * T[j]);
            return (b[j] * xi - b[i] * xj) / (xi - xj);
        };
        const double est = extrap(n - 2, n - 1);
        const double prev = extrap(n - 3, n - 2);
        return {TailVerdict::Kind::finite, est, std::fabs(est - prev) + noise.back()};
    }

    throw UndecidedError("beta limit: oscillatory tail, refusing to extrapolate");
}

} // namespace detail

struct BetaEvalOptions {
    double cap = 1e8; // |b| beyond this with a monotone tail is declared infinite
};

inline std::vector<double> default_beta_ladder() {
    return {1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
}

/// Limit of b(T) = f(x,T) T / 2 - F(x,T) as |T| -> infinity, evaluated on an
/// ascending ladder. Returns +-infinity for diverging tails; throws
/// UndecidedError on oscillatory ones.
inline BetaLimit beta_eval(const NonlinearModel& m, const Point& x,
                           const std::vector<double>& ladder, BetaEvalOptions opts = {}) {
    if (ladder.size() < 3)
        throw PreconditionError("beta_eval: ladder needs at least 3 entries");
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        if (!(ladder[k] > 0.0) || (k > 0 && !(ladder[k] > ladder[k - 1])))
            throw PreconditionError("beta_eval: ladder must be positive and ascending");
    }
    if (!(ladder.back() >= 1e3))
        throw PreconditionError("beta_eval: ladder must reach at least 1e3");

    auto side = [&](double sign) {
        std::vector<double> b(ladder.size()), noise(ladder.size());
        for (std::size_t k = 0; k < ladder.size(); ++k) {
            const double t = sign * ladder[k];
            const double half_ft = 0.5 * m.f(x, t) * t;
            const double Ft = m.F(x, t);
            b[k] = half_ft - Ft;
            noise[k] = 8.0 * std::numeric_limits<double>::epsilon() *
                       (std::fabs(half_ft) + std::fabs(Ft));
        }
        return detail::classify_tail(ladder, b, noise, opts.cap);
    };

    const auto pos = side(+1.0);
    const auto neg = m.odd ? pos : side(-1.0);

    const double inf = std::numeric_limits<double>::infinity();
    using K = detail::TailVerdict::Kind;
    if (pos.kind != neg.kind)
        throw UndecidedError("beta limit: the two one-sided tails disagree");
    if (pos.kind == K::diverges_up) return {inf, 0.0};
    if (pos.kind == K::diverges_down) return {-inf, 0.0};

    const double err = std::max(pos.error, neg.error);
    if (std::fabs(pos.value - neg.value) > 100.0 * (err + 1e-12))
        throw UndecidedError("beta limit: one-sided limits differ beyond tolerance");
    return {0.5 * (pos.value + neg.value), err + 0.5 * std::fabs(pos.value - neg.value)};
}

inline BetaLimit beta_eval(const NonlinearModel& m, const Point& x) {
    return beta_eval(m, x, default_beta_ladder());
}

} // namespace nehari
