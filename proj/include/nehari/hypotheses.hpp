#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nehari/errors.hpp"
#include "nehari/model.hpp"
#include "nehari/spectrum.hpp"

namespace nehari {

enum class Verdict { pass, fail, undecided };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "undecided";
    }
}

enum class ResonanceClass { non_resonant, resonant, strongly_resonant };

inline const char* to_string(ResonanceClass c) {
    switch (c) {
        case ResonanceClass::non_resonant: return "non_resonant";
        case ResonanceClass::resonant: return "resonant";
        default: return "strongly_resonant";
    }
}

struct ResonanceReport {
    ResonanceClass cls = ResonanceClass::non_resonant;
    int resonant_index = -1;    // 0-based eigenvalue index that hits 1
    double nearest_lambda = 0;  // eigenvalue closest to 1
    double nearest_gap = 0;     // |nearest_lambda - 1|
    bool beta_finite = false;
    bool beta_undecided = false;
    // sampled range of the limit over the node sample, finite case
    double beta_min = std::numeric_limits<double>::infinity();
    double beta_max = -std::numeric_limits<double>::infinity();
};

namespace detail {

inline std::vector<std::int64_t> sample_node_ids(const Grid& g, int wanted) {
    const std::int64_t n = g.size();
    const int k = static_cast<int>(std::min<std::int64_t>(wanted, n));
    std::vector<std::int64_t> ids(k);
    for (int i = 0; i < k; ++i) ids[i] = (i * n) / k;
    return ids;
}

} // namespace detail

/// Resonance of the problem at infinity: does some eigenvalue of the
/// eta-weighted problem sit at 1 (within tol, relative)? Strong resonance
/// additionally requires a finite beta limit on a node sample.
inline ResonanceReport classify_resonance(const NonlinearModel& m, const Spectrum& s_eta,
                                          double tol) {
    ResonanceReport r;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < s_eta.count(); ++j) {
        const double gap = std::fabs(s_eta.lambda(j) - 1.0);
        if (gap < best_gap) {
            best_gap = gap;
            r.nearest_lambda = s_eta.lambda(j);
            r.nearest_gap = gap;
        }
        if (gap <= tol && r.resonant_index < 0) r.resonant_index = j;
    }

    if (r.resonant_index < 0) {
        // Eigenvalues are increasing: non-resonance is decidable only once the
        // computed spectrum has passed 1.
        if (s_eta.lambda(s_eta.count() - 1) <= 1.0 + tol)
            throw PreconditionError(
                "classify_resonance: computed spectrum ends at " +
                std::to_string(s_eta.lambda(s_eta.count() - 1)) +
                " and never passes 1; compute more pairs to decide");
        r.cls = ResonanceClass::non_resonant;
        return r;
    }

    r.cls = ResonanceClass::resonant;
    const auto ids = detail::sample_node_ids(*s_eta.grid_ptr(), 8);
    bool all_finite = true;
    for (auto id : ids) {
        try {
            const BetaLimit b = beta_eval(m, s_eta.grid_ptr()->point(id));
            if (!b.finite()) {
                all_finite = false;
                break;
            }
            r.beta_min = std::min(r.beta_min, b.value);
            r.beta_max = std::max(r.beta_max, b.value);
        } catch (const UndecidedError&) {
            r.beta_undecided = true;
            all_finite = false;
            break;
        }
    }
    r.beta_finite = all_finite;
    if (all_finite) r.cls = ResonanceClass::strongly_resonant;
    return r;
}

struct LatticeOptions {
    int t_count = 64;       // log-spaced |t| values, both signs
    double t_min = 1e-6;
    double t_max = 1e6;
    int node_count = 16;    // spatial sample
};

struct HypothesisReport {
    Verdict f1 = Verdict::undecided;   // f(x,t)/|t| increasing, and positive parts present
    Verdict f2 = Verdict::undecided;   // lambda_m(eta) < 1 < lambda_1(alpha)
    Verdict f1p = Verdict::undecided;  // F(.,t)/t^2 bounded on bounded sets
    Verdict f2p = Verdict::undecided;  // lambda_m(alpha) < 1 < lambda_1(eta)
    Verdict fF = Verdict::undecided;   // half f t - F -> infinity

    // Spectral inputs actually used (infinities encode the vacuous convention).
    double lambda1_eta = std::numeric_limits<double>::quiet_NaN();
    double lambda_m_eta = std::numeric_limits<double>::quiet_NaN();
    double lambda1_alpha = std::numeric_limits<double>::quiet_NaN();
    double lambda_m_alpha = std::numeric_limits<double>::quiet_NaN();
    int m_eta = 0;    // largest distinct-eigenvalue index with lambda_m(eta) < 1
    int m_alpha = 0;  // same for the alpha weight

    bool alpha_plus_zero = false;
    bool eta_plus_zero = false;

    // Consequences of the monotonicity hypothesis, checked on the lattice.
    Verdict b_monotone = Verdict::undecided;      // t -> f t/2 - F away from 0
    Verdict Fq_monotone = Verdict::undecided;     // t -> F/t^2 away from 0
    Verdict slope_gap = Verdict::undecided;       // f/t > 2F/t^2 strictly
    double slope_gap_margin = std::numeric_limits<double>::infinity();
    double f1_margin = std::numeric_limits<double>::infinity(); // tightest increase margin
    double F_over_t2_sup = 0.0;

    std::vector<std::string> witnesses;
    std::vector<std::string> notes;
};

namespace detail {

inline std::vector<double> signed_log_lattice(const LatticeOptions& o) {
    std::vector<double> ts;
    ts.reserve(2 * o.t_count);
    const double ratio = std::log(o.t_max / o.t_min) / (o.t_count - 1);
    for (int k = o.t_count - 1; k >= 0; --k) ts.push_back(-o.t_min * std::exp(k * ratio));
    for (int k = 0; k < o.t_count; ++k) ts.push_back(o.t_min * std::exp(k * ratio));
    return ts;
}

struct MonotoneCheck {
    Verdict verdict = Verdict::pass;
    double margin = std::numeric_limits<double>::infinity();
    bool ties = false;
    std::string witness;
};

// Checks that vals is nondecreasing along ts up to the per-point noise floor;
// a drop beyond the floor is a failure. noise may be empty.
inline void update_monotone(MonotoneCheck& mc, const std::vector<double>& ts,
                            const std::vector<double>& vals, const std::vector<double>& noise,
                            const Point& x, const char* label) {
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double scale = std::max(std::fabs(vals[k]), std::fabs(vals[k + 1]));
        double floor = 1e-12 * (1.0 + scale);
        if (!noise.empty()) floor += noise[k] + noise[k + 1];
        const double d = vals[k + 1] - vals[k];
        if (d < -floor) {
            mc.verdict = Verdict::fail;
            std::ostringstream os;
            os << label << " drops from " << vals[k] << " to " << vals[k + 1]
               << " between t=" << ts[k] << " and t=" << ts[k + 1]
               << " at x=(" << x[0] << "," << x[1] << "," << x[2] << ")";
            mc.witness = os.str();
            mc.margin = std::min(mc.margin, d);
            return;
        }
        if (std::fabs(d) <= floor) mc.ties = true;
        mc.margin = std::min(mc.margin, d);
    }
}

} // namespace detail

/// Sampling-based verdicts for the standing hypotheses. s_alpha may be null
/// when the slope at zero has no positive part; the eigenvalue convention
/// lambda_1(alpha) = +infinity then applies and is flagged in the notes.
inline HypothesisReport check_hypotheses(const NonlinearModel& m, const Spectrum* s_alpha,
                                         const Spectrum& s_eta, LatticeOptions lat = {}) {
    HypothesisReport rep;
    const Grid& grid = *s_eta.grid_ptr();
    const auto ids = detail::sample_node_ids(grid, lat.node_count);
    const auto ts = detail::signed_log_lattice(lat);
    const double inf = std::numeric_limits<double>::infinity();

    // Positive parts of the limiting slopes on the sample.
    double alpha_max = -inf, eta_max = -inf;
    for (auto id : ids) {
        const Point x = grid.point(id);
        alpha_max = std::max(alpha_max, m.alpha(x));
        eta_max = std::max(eta_max, m.eta(x));
    }
    rep.alpha_plus_zero = !(alpha_max > 0.0);
    rep.eta_plus_zero = !(eta_max > 0.0);
    if (rep.alpha_plus_zero)
        rep.notes.push_back("alpha has no positive part on the sample; the positive-part "
                            "clause of the monotonicity hypothesis fails literally and "
                            "lambda_1(alpha) = +inf is used as a vacuous convention");
    if (rep.eta_plus_zero)
        rep.notes.push_back("eta has no positive part on the sample");

    // (f1) monotonicity of f(x,t)/|t|, plus consequence checks.
    detail::MonotoneCheck f1_check, b_check, Fq_check;
    double gap_margin = inf;
    double F_sup = 0.0;
    double global_increase = inf;
    std::string gap_witness;

    for (auto id : ids) {
        const Point x = grid.point(id);
        std::vector<double> ratio(ts.size()), bvals(ts.size()), bnoise(ts.size()), Fq(ts.size());
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const double t = ts[k];
            const double f = m.f(x, t), F = m.F(x, t);
            ratio[k] = f / std::fabs(t);
            const double half_ft = 0.5 * f * t;
            bvals[k] = half_ft - F;
            bnoise[k] = 8.0 * std::numeric_limits<double>::epsilon() *
                        (std::fabs(half_ft) + std::fabs(F));
            Fq[k] = F / (t * t);
            F_sup = std::max(F_sup, std::fabs(Fq[k]));
            const double gap = f / t - 2.0 * F / (t * t);
            if (gap < gap_margin) {
                gap_margin = gap;
                std::ostringstream os;
                os << "slope gap " << gap << " at t=" << t;
                gap_witness = os.str();
            }
        }
        detail::update_monotone(f1_check, ts, ratio, {}, x, "f(x,t)/|t|");
        // strictness must show up within each sign region; the jump across 0
        // of an odd nonlinearity does not count
        const std::size_t mid = ts.size() / 2;
        global_increase = std::min(global_increase, ratio[mid - 1] - ratio.front());
        global_increase = std::min(global_increase, ratio.back() - ratio[mid]);

        // The two consequences are nondecreasing in |t| on either side of 0.
        const std::size_t half = ts.size() / 2;
        std::vector<double> t_pos(ts.begin() + half, ts.end());
        std::vector<double> b_pos(bvals.begin() + half, bvals.end());
        std::vector<double> n_pos(bnoise.begin() + half, bnoise.end());
        std::vector<double> Fq_pos(Fq.begin() + half, Fq.end());
        detail::update_monotone(b_check, t_pos, b_pos, n_pos, x, "f t/2 - F");
        detail::update_monotone(Fq_check, t_pos, Fq_pos, {}, x, "F/t^2");
        // Walking the negative side towards -infinity they are nondecreasing too.
        std::vector<double> t_neg_out(ts.rend() - half, ts.rend());
        std::vector<double> b_neg_out(bvals.rend() - half, bvals.rend());
        std::vector<double> n_neg_out(bnoise.rend() - half, bnoise.rend());
        std::vector<double> Fq_neg_out(Fq.rend() - half, Fq.rend());
        detail::update_monotone(b_check, t_neg_out, b_neg_out, n_neg_out, x, "f t/2 - F (t<0)");
        detail::update_monotone(Fq_check, t_neg_out, Fq_neg_out, {}, x, "F/t^2 (t<0)");

        if (f1_check.verdict == Verdict::fail) break;
    }

    rep.f1 = f1_check.verdict;
    rep.f1_margin = f1_check.margin;
    if (rep.f1 == Verdict::pass && !(global_increase > 1e-9 * (1.0 + std::fabs(global_increase)))) {
        // No drop anywhere but no global increase either: a constant ratio is
        // indistinguishable from a slowly increasing one at this resolution.
        rep.f1 = Verdict::undecided;
        rep.notes.push_back("f(x,t)/|t| shows no resolvable increase across the lattice");
    }
    if (rep.f1 == Verdict::pass && f1_check.ties)
        rep.notes.push_back("f(x,t)/|t| has tied adjacent samples (saturation at the lattice "
                            "ends); strictness is not resolvable there");
    if (!f1_check.witness.empty()) rep.witnesses.push_back(f1_check.witness);
    rep.b_monotone = b_check.verdict;
    if (!b_check.witness.empty()) rep.witnesses.push_back(b_check.witness);
    rep.Fq_monotone = Fq_check.verdict;
    if (!Fq_check.witness.empty()) rep.witnesses.push_back(Fq_check.witness);
    rep.slope_gap = gap_margin > 1e-12 ? Verdict::pass
                    : gap_margin > 0.0 ? Verdict::undecided
                                       : Verdict::fail;
    rep.slope_gap_margin = gap_margin;
    if (rep.slope_gap == Verdict::fail) rep.witnesses.push_back(gap_witness);

    // (f1') boundedness of F/t^2 on bounded sets, read off the sampled sup.
    rep.F_over_t2_sup = F_sup;
    rep.f1p = std::isfinite(F_sup) ? Verdict::pass : Verdict::fail;
    if (rep.f1p == Verdict::fail)
        rep.witnesses.push_back("F(x,t)/t^2 is unbounded on the sampled lattice");

    // Eigenvalue inequalities. m is the largest distinct index with
    // lambda_m < 1 among the computed clusters.
    auto largest_below_one = [](const Spectrum& s, int& m_out, double& lam_out) {
        m_out = 0;
        lam_out = std::numeric_limits<double>::quiet_NaN();
        for (const auto& c : s.clusters()) {
            if (c.lambda < 1.0) {
                ++m_out;
                lam_out = c.lambda;
            } else {
                break;
            }
        }
    };

    rep.lambda1_eta = s_eta.lambda(0);
    largest_below_one(s_eta, rep.m_eta, rep.lambda_m_eta);
    if (s_alpha) {
        rep.lambda1_alpha = s_alpha->lambda(0);
        largest_below_one(*s_alpha, rep.m_alpha, rep.lambda_m_alpha);
    } else {
        rep.lambda1_alpha = inf;
        rep.lambda_m_alpha = inf;
        rep.m_alpha = 0;
    }

    auto strict = [](double a, double b) { // a < b with a tie band
        if (std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b))) return Verdict::undecided;
        return a < b ? Verdict::pass : Verdict::fail;
    };
    auto both = [](Verdict a, Verdict b) {
        if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
        if (a == Verdict::undecided || b == Verdict::undecided) return Verdict::undecided;
        return Verdict::pass;
    };

    {
        const Verdict left = rep.m_eta >= 1 ? Verdict::pass : strict(rep.lambda1_eta, 1.0);
        const Verdict right = std::isinf(rep.lambda1_alpha) ? Verdict::pass
                                                            : strict(1.0, rep.lambda1_alpha);
        rep.f2 = both(left, right);
        if (left == Verdict::fail)
            rep.witnesses.push_back("lambda_1(eta) = " + std::to_string(rep.lambda1_eta) +
                                    " is not below 1");
        if (right == Verdict::fail)
            rep.witnesses.push_back("lambda_1(alpha) = " + std::to_string(rep.lambda1_alpha) +
                                    " is not above 1");
    }
    {
        const Verdict left = rep.m_alpha >= 1
                                 ? Verdict::pass
                                 : (std::isinf(rep.lambda1_alpha)
                                        ? Verdict::fail
                                        : strict(rep.lambda1_alpha, 1.0));
        const Verdict right = strict(1.0, rep.lambda1_eta);
        rep.f2p = both(left, right);
        if (left == Verdict::fail)
            rep.witnesses.push_back("no eigenvalue of the alpha weight lies below 1 "
                                    "(lambda_1(alpha) = " +
                                    std::to_string(rep.lambda1_alpha) + ")");
        if (right == Verdict::fail)
            rep.witnesses.push_back("lambda_1(eta) = " + std::to_string(rep.lambda1_eta) +
                                    " is not above 1");
    }

    // (fF): beta must diverge at every sampled node.
    rep.fF = Verdict::pass;
    for (auto id : ids) {
        const Point x = grid.point(id);
        try {
            const BetaLimit b = beta_eval(m, x);
            if (b.finite()) {
                rep.fF = Verdict::fail;
                std::ostringstream os;
                os << "beta limit is finite (" << b.value << ") at x=(" << x[0] << "," << x[1]
                   << "," << x[2] << ")";
                rep.witnesses.push_back(os.str());
                break;
            }
            if (b.value < 0.0) {
                rep.fF = Verdict::fail;
                rep.witnesses.push_back("beta limit diverges to -infinity");
                break;
            }
        } catch (const UndecidedError& e) {
            rep.fF = Verdict::undecided;
            rep.notes.push_back(std::string("beta limit undecided: ") + e.what());
            break;
        }
    }

    return rep;
}

} // namespace nehari
