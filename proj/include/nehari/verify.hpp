#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nehari/errors.hpp"
#include "nehari/fibering.hpp"
#include "nehari/model.hpp"
#include "nehari/solve.hpp"
#include "nehari/spectrum.hpp"

namespace nehari {

struct SobolevEstimate {
    double value = 0.0;     // discrete min of q(u,u) / |u|_{2*}^2
    int iterations = 0;
    bool converged = false; // relative-change stopping criterion met
    std::string quality;    // "converged" or "slow"
};

struct SobolevOptions {
    int max_iter = 2000;
    double rel_tol = 1e-10;
};

/// Discrete Rayleigh minimization for the embedding constant into L^{2*},
/// 2* = 2N/(N-2). Only defined for N = 3 here; below that the exponent is
/// undefined and the value must be user-supplied.
inline SobolevEstimate sobolev_estimate(const StiffnessForm& K, SobolevOptions o = {}) {
    const Grid& g = K.grid();
    if (g.dim() < 3)
        throw DimensionUnsupportedError(
            "sobolev_estimate: the critical exponent is undefined for N <= 2; "
            "supply --sobolev <value> instead");

    const double vol = g.volume_element();
    const double pstar = 6.0; // 2N/(N-2) at N = 3

    auto p_norm = [&](const Eigen::VectorXd& u) {
        return std::pow(u.array().abs().pow(pstar).sum() * vol, 1.0 / pstar);
    };
    auto rayleigh = [&](const Eigen::VectorXd& u) {
        const double pn = p_norm(u);
        return u.dot(K.matrix() * u) / (pn * pn);
    };

    // Projected descent in the energy metric with backtracking; the
    // constraint is |u|_{2*} = 1.
    auto minimize = [&](Eigen::VectorXd u, int& iters, bool& conv) {
        u /= p_norm(u);
        double R = rayleigh(u);
        conv = false;
        for (int it = 0; it < o.max_iter; ++it) {
            iters = it;
            const Eigen::VectorXd cgrad =
                pstar * vol * u.array().abs().pow(pstar - 2.0).matrix().cwiseProduct(u);
            const Eigen::VectorXd Ainv_c = K.solve(cgrad);
            const double nu = 2.0 * u.dot(cgrad) / cgrad.dot(Ainv_c);
            Eigen::VectorXd dir = 2.0 * u - nu * Ainv_c; // descent, tangent to the constraint
            double s = 1.0;
            bool accepted = false;
            while (s > 1e-14) {
                Eigen::VectorXd cand = u - s * dir;
                cand /= p_norm(cand);
                const double Rc = rayleigh(cand);
                if (Rc < R) {
                    const double rel = (R - Rc) / R;
                    u = std::move(cand);
                    R = Rc;
                    accepted = true;
                    if (rel < o.rel_tol) {
                        conv = true;
                        it = o.max_iter;
                    }
                    break;
                }
                s *= 0.5;
            }
            if (!accepted) {
                conv = true; // stationary to line-search resolution
                break;
            }
        }
        return R;
    };

    // Two deterministic starts: the smooth ground mode and a centered spike.
    GridField ones(K.grid_ptr(), Eigen::VectorXd::Ones(g.size()));
    Spectrum s1 = weighted_eigs(K, ones, 1);
    Eigen::VectorXd smooth = s1.eigenvectors().col(0);

    Eigen::VectorXd spike = Eigen::VectorXd::Zero(g.size());
    {
        std::array<int, 3> mid{};
        for (int d = 0; d < g.dim(); ++d) mid[d] = g.count(d) / 2;
        spike[g.flat_index(mid)] = 1.0;
    }

    SobolevEstimate est;
    int it1 = 0, it2 = 0;
    bool c1 = false, c2 = false;
    const double r1 = minimize(smooth, it1, c1);
    const double r2 = minimize(spike, it2, c2);
    est.value = std::min(r1, r2);
    est.iterations = it1 + it2;
    est.converged = c1 && c2;
    est.quality = est.converged ? "converged" : "slow";
    return est;
}

struct BetaCertificate {
    double essinf_beta = 0.0; // +inf when every sampled limit diverges
    bool vacuous = false;     // certificate true because beta is infinite
    double eta_sup = 0.0;     // |eta|_inf over the nodes
    double tau = 0.0;
    int tau_index = 1;
    double lambda1_gap = 0.0; // first eigenvalue of the (eta - alpha) weight
    double sobolev = 0.0;
    std::string sobolev_provenance; // "user" or "discrete"
    int dim = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool verdict = false;
    int beta_sample_count = 0;

    bool has_level_gap = false; // filled when a solver value is supplied
    double c_N = 0.0;
    double level_rhs = 0.0;     // (S/|eta|_inf)^{N/2} * essinf beta
    bool level_gap_ok = false;
};

/// Recompute the right-hand side from the stored ingredients; the certificate
/// must reproduce it bit for bit.
inline double certificate_rhs(double eta_sup, double tau, double lambda1_gap, double S, int N) {
    return std::pow(eta_sup, 0.5 * N) * tau * tau / (2.0 * lambda1_gap * std::pow(S, 0.5 * N));
}

struct BetaCertificateInputs {
    const Spectrum* gap_spectrum = nullptr; // weight eta - alpha
    const TauResult* tau = nullptr;
    int tau_index = 1;
    double sobolev = 0.0;
    std::string sobolev_provenance;
    std::optional<double> c_N; // enables the level-gap audit
    std::vector<double> beta_ladder = default_beta_ladder();
};

/// Certify essinf beta > |eta|^{N/2} tau^2 / (2 lambda_1(eta-alpha) S^{N/2}).
inline BetaCertificate beta_certificate(const Problem& P, const BetaCertificateInputs& in) {
    if (!in.gap_spectrum)
        throw PreconditionError("beta_certificate: missing ingredient gap_spectrum "
                                "(spectrum of the eta - alpha weight)");
    if (!in.tau) throw PreconditionError("beta_certificate: missing ingredient tau");
    if (!(in.sobolev > 0.0))
        throw PreconditionError("beta_certificate: missing or nonpositive ingredient sobolev");

    const Grid& g = P.grid();
    BetaCertificate cert;
    cert.dim = g.dim();
    cert.tau = in.tau->tau;
    cert.tau_index = in.tau_index;
    cert.lambda1_gap = in.gap_spectrum->lambda(0);
    cert.sobolev = in.sobolev;
    cert.sobolev_provenance = in.sobolev_provenance;

    const bool autonomous = P.model().kind != "expr";
    const std::int64_t sample = autonomous ? 1 : g.size();
    double essinf = std::numeric_limits<double>::infinity();
    bool any_finite = false;
    for (std::int64_t i = 0; i < sample; ++i) {
        const Point x = autonomous ? g.point(g.size() / 2) : g.point(i);
        const BetaLimit b = beta_eval(P.model(), x, in.beta_ladder);
        if (b.finite()) {
            any_finite = true;
            essinf = std::min(essinf, b.value);
        } else if (b.value < 0.0) {
            throw PreconditionError("beta_certificate: beta diverges to -infinity; "
                                    "the monotonicity hypothesis does not hold");
        }
    }
    cert.beta_sample_count = static_cast<int>(sample);
    cert.vacuous = !any_finite;
    cert.essinf_beta = cert.vacuous ? std::numeric_limits<double>::infinity() : essinf;

    double eta_sup = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        eta_sup = std::max(eta_sup, std::fabs(P.model().eta(g.point(i))));
    cert.eta_sup = eta_sup;

    cert.lhs = cert.essinf_beta;
    cert.rhs = certificate_rhs(cert.eta_sup, cert.tau, cert.lambda1_gap, cert.sobolev, cert.dim);
    cert.verdict = cert.lhs > cert.rhs;

    if (in.c_N) {
        cert.has_level_gap = true;
        cert.c_N = *in.c_N;
        cert.level_rhs = std::pow(cert.sobolev / cert.eta_sup, 0.5 * cert.dim) * cert.essinf_beta;
        cert.level_gap_ok = cert.c_N < cert.level_rhs;
    }
    return cert;
}

/// True iff the limit of f t/2 - F diverges to +infinity on a node sample.
inline bool check_fF(const NonlinearModel& m, const Grid& g,
                     const std::vector<double>& ladder = default_beta_ladder()) {
    const bool autonomous = m.kind != "expr";
    const std::int64_t sample = autonomous ? 1 : std::min<std::int64_t>(16, g.size());
    for (std::int64_t i = 0; i < sample; ++i) {
        const std::int64_t id = autonomous ? g.size() / 2 : (i * g.size()) / sample;
        const BetaLimit b = beta_eval(m, g.point(id), ladder); // UndecidedError propagates
        if (!(std::isinf(b.value) && b.value > 0.0)) return false;
    }
    return true;
}

/// End-to-end report for the built-in piecewise example on a given grid:
/// eigen-direction, closed-form constants, the fibering scale with its
/// closed-form cross-check, and the certificate in both algebraic forms.
struct PiecewiseChainReport {
    double eta = 0.0;
    double theta = 0.0;
    bool theta_overridden = false;
    double a = 0.0;
    double u_star_sup = 0.0;       // |u*|_inf of the normalized eigen-direction
    double continuity_gap = 0.0;   // |f(theta^-) - f(theta^+)|, forced to ~0 by a

    double beta_closed = 0.0;
    double beta_numeric = 0.0;
    double beta_numeric_error = 0.0;

    double cubic_integral = 0.0;     // int |u*|^3
    double cubic_lower_bound = 0.0;  // eta^{-3/2} |Omega|^{-1/2}
    bool cubic_bound_ok = false;

    double t_star = 0.0;           // fibering scale of the eigen-direction
    double t_star_inner = 0.0;     // 1 / int |u*|^3, valid on the inner branch
    bool regime_attained = false;  // t* |u*|_inf <= theta
    double t_upper_bound = 0.0;    // eta^{3/2} |Omega|^{1/2}, via the cubic bound
    double t_printed_bound = 0.0;  // the reciprocal form; reported, never relied on

    int tau_index = 1;
    TauResult tau;
    BetaCertificate certificate;

    // Ratio form of the certificate inequality (both sides scaled by
    // 2 S^{N/2} / eta^2), plus the historical tau^{N/2} right-hand side.
    double ratio_lhs = 0.0;
    double ratio_rhs = 0.0;
    double ratio_rhs_printed = 0.0;
    bool ratio_verdict = false;
};

struct PiecewiseChainOptions {
    std::optional<double> theta_override;
    int tau_index = 1;
    TauOptions tau;
    double sobolev = 0.0;
    std::string sobolev_provenance;
    std::optional<double> c_N;
    std::vector<double> beta_ladder = default_beta_ladder();
    int spectrum_pairs = 0; // 0: enough for tau_index
    double fiber_tol = 1e-12;
};

inline PiecewiseChainReport piecewise_chain(std::shared_ptr<const Grid> grid, double eta,
                                            PiecewiseChainOptions o = {}) {
    if (!(o.sobolev > 0.0))
        throw PreconditionError("piecewise_chain: a positive sobolev constant is required");

    StiffnessForm K(grid);
    GridField eta_field(grid, Eigen::VectorXd::Constant(grid->size(), eta));
    const int pairs = o.spectrum_pairs > 0 ? o.spectrum_pairs : o.tau_index + 3;
    Spectrum s_eta = weighted_eigs(K, eta_field, pairs);
    if (!(s_eta.lambda(0) < 1.0))
        throw PreconditionError("piecewise_chain: eta must exceed the first Dirichlet "
                                "eigenvalue so the eigen-direction is admissible");

    PiecewiseChainReport r;
    r.eta = eta;
    GridField u_star = s_eta.eigenfunction(0);
    r.u_star_sup = lp_norm(u_star, std::numeric_limits<double>::infinity());
    r.theta_overridden = o.theta_override.has_value();
    r.theta = o.theta_override.value_or(r.u_star_sup);
    if (!(eta > r.theta))
        throw PreconditionError("piecewise_chain: need eta > theta");

    NonlinearModel model = piecewise_model(r.theta, eta);
    r.a = model.params.at("a");
    {
        const double inner = r.theta * r.theta;
        const double outer = eta * std::pow(r.theta, 5) / (r.a + std::pow(r.theta, 4));
        r.continuity_gap = std::fabs(inner - outer);
    }

    Problem P(model, grid);

    r.beta_closed = *model.beta_closed;
    const BetaLimit bl = beta_eval(model, grid->point(grid->size() / 2), o.beta_ladder);
    r.beta_numeric = bl.value;
    r.beta_numeric_error = bl.error;

    r.cubic_integral = std::pow(lp_norm(u_star, 3.0), 3.0);
    r.cubic_lower_bound = 1.0 / (std::pow(eta, 1.5) * std::sqrt(grid->domain_measure()));
    r.cubic_bound_ok = r.cubic_integral > r.cubic_lower_bound;

    FiberingOptions fo;
    fo.tol = o.fiber_tol;
    r.t_star = P.project_fiber(u_star, fo).t;
    r.t_star_inner = 1.0 / r.cubic_integral;
    r.regime_attained = r.t_star * r.u_star_sup <= r.theta * (1.0 + 1e-12);
    r.t_upper_bound = std::pow(eta, 1.5) * std::sqrt(grid->domain_measure());
    r.t_printed_bound = 1.0 / r.t_upper_bound;

    r.tau_index = o.tau_index;
    r.tau = tau_m(P, s_eta, o.tau_index, o.tau);

    BetaCertificateInputs in;
    in.gap_spectrum = &s_eta; // alpha vanishes, so the gap weight is eta itself
    in.tau = &r.tau;
    in.tau_index = o.tau_index;
    in.sobolev = o.sobolev;
    in.sobolev_provenance = o.sobolev_provenance;
    in.c_N = o.c_N;
    in.beta_ladder = o.beta_ladder;
    r.certificate = beta_certificate(P, in);

    const double N = grid->dim();
    const double sqrt_a = std::sqrt(r.a);
    r.ratio_lhs = std::pow(o.sobolev, 0.5 * N) *
                  (r.theta * r.theta / eta -
                   (sqrt_a / eta) * std::atan(r.theta * r.theta / sqrt_a) -
                   2.0 * std::pow(r.theta, 3) / (3.0 * eta * eta) +
                   M_PI * sqrt_a / (2.0 * eta));
    r.ratio_rhs = std::pow(r.certificate.eta_sup, 0.5 * N) * r.tau.tau * r.tau.tau /
                  (r.certificate.lambda1_gap * eta * eta);
    r.ratio_rhs_printed = std::pow(r.tau.tau, 0.5 * N);
    r.ratio_verdict = r.ratio_lhs > r.ratio_rhs;
    return r;
}

} // namespace nehari
