// Acceptance suite: end-to-end checks with pinned tolerances, one verdict
// line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nehari/nehari.hpp"

using namespace nehari;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;
std::vector<std::string> g_notes;

struct Criterion {
    const char* name;
    double budget; // wall-clock limit in seconds, 0 for none
    Clock::time_point t0 = Clock::now();
    bool ok = true;
    std::string first_fail;

    explicit Criterion(const char* n, double budget_s = 0.0) : name(n), budget(budget_s) {}

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            first_fail = what;
        }
        if (!cond) std::printf("    fail: %s\n", what.c_str());
    }

    void finish() {
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (budget > 0.0)
            expect(secs < budget, "runtime " + std::to_string(secs) + "s exceeds budget " +
                                      std::to_string(budget) + "s");
        std::printf("[%s] %s (%.1fs)\n", ok ? "PASS" : "FAIL", name, secs);
        if (!ok) ++g_failures;
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

GridField constant_field(const std::shared_ptr<const Grid>& g, double c) {
    return GridField(g, Eigen::VectorXd::Constant(g->size(), c));
}

double discrete_lambda(int k, int n) {
    const double h = 1.0 / (n + 1);
    const double s = std::sin(k * M_PI * h / 2.0);
    return 4.0 / (h * h) * s * s;
}

// random unit-norm field in the span of the eta-eigenvectors below 1
GridField random_admissible(const Spectrum& s, std::mt19937& rng) {
    int d = 0;
    for (int j = 0; j < s.count(); ++j)
        if (s.lambda(j) < 1.0) ++d;
    std::normal_distribution<double> gauss;
    Eigen::VectorXd c(d);
    for (int j = 0; j < d; ++j) c[j] = gauss(rng);
    c /= c.norm();
    return s.span_field(c);
}

void criterion1_spectral_scaling() {
    Criterion c("criterion 1: spectral scaling and convergence order", 10.0);
    auto g = build_grid(1, {{0.0, 1.0}}, {255});
    StiffnessForm K(g);
    Spectrum s1 = weighted_eigs(K, constant_field(g, 1.0), 5);

    for (int k = 1; k <= 5; ++k) {
        const double exact = discrete_lambda(k, 255);
        c.expect(std::fabs(s1.lambda(k - 1) - exact) <= 1e-9 * exact,
                 "stencil eigenvalue " + std::to_string(k) + " off: " + fmt(s1.lambda(k - 1)) +
                     " vs " + fmt(exact));
    }

    for (double sc : {0.5, 2.0, M_PI * M_PI}) {
        Spectrum ss = weighted_eigs(K, constant_field(g, sc), 5);
        for (int j = 0; j < 5; ++j)
            c.expect(std::fabs(ss.lambda(j) * sc - s1.lambda(j)) <= 1e-12 * s1.lambda(j),
                     "scaling law violated at c=" + fmt(sc) + ", m=" + std::to_string(j + 1));
    }

    double err[3];
    int idx = 0;
    for (int n : {128, 256, 512}) {
        auto gn = build_grid(1, {{0.0, 1.0}}, {n});
        StiffnessForm Kn(gn);
        Spectrum sn = weighted_eigs(Kn, constant_field(gn, 1.0), 1);
        err[idx++] = std::fabs(sn.lambda(0) - M_PI * M_PI);
    }
    for (int i = 0; i + 1 < 3; ++i) {
        const double ratio = err[i] / err[i + 1];
        c.expect(ratio > 3.6 && ratio < 4.4,
                 "order-2 ratio out of [3.6, 4.4]: " + fmt(ratio));
    }
    c.finish();
}

void criterion2_fibering() {
    Criterion c("criterion 2: fibering residual, scaling and landscape", 30.0);
    auto g = build_grid(1, {{0.0, 1.0}}, {255});
    Problem P(piecewise_model(12.0, 1000.0), g);
    Spectrum se = weighted_eigs(P.stiffness(), constant_field(g, 1000.0), 11);

    std::mt19937 rng(2024);
    for (int k = 0; k < 100; ++k) {
        GridField u = random_admissible(se, rng);
        const FiberingResult fr = P.project_fiber(u);
        c.expect(fr.slope_residual <= 1e-10 * (1.0 + fr.t),
                 "slope residual " + fmt(fr.slope_residual) + " at t=" + fmt(fr.t));
        for (double s : {0.1, 0.5, 2.0, 10.0}) {
            GridField su(g, s * u.values());
            const double ts = P.project_fiber(su).t;
            c.expect(std::fabs(ts * s - fr.t) <= 1e-9 * fr.t,
                     "scaling law violated at s=" + fmt(s));
        }
        // sign pattern of the fiber slope around the root
        const double q = P.stiffness().energy_norm2(u);
        int changes = 0;
        double prev = P.fiber_slope(u, q, fr.t / 10.0);
        c.expect(prev > 0.0, "fiber slope not positive below the root");
        for (int i = 1; i <= 60; ++i) {
            const double t = fr.t / 10.0 + (10.0 * fr.t - fr.t / 10.0) * i / 60.0;
            const double sl = P.fiber_slope(u, q, t);
            if ((prev > 0.0) != (sl > 0.0)) ++changes;
            prev = sl;
        }
        c.expect(prev < 0.0, "fiber slope not negative above the root");
        c.expect(changes == 1, "fiber slope changed sign " + std::to_string(changes) + " times");
    }
    c.finish();
}

void criterion3_closed_forms() {
    Criterion c("criterion 3: closed forms of the worked example", 30.0);
    auto g = build_grid(1, {{0.0, 1.0}}, {1023});
    Problem P(piecewise_model(12.0, 1000.0), g);
    Spectrum se = weighted_eigs(P.stiffness(), constant_field(g, 1000.0), 1);

    const double t_num = P.project_fiber(se.eigenfunction(0)).t;
    const double t_cont = 3.0 * std::pow(M_PI, 4) / (8.0 * std::sqrt(2.0));
    c.expect(std::fabs(t_num - t_cont) <= 1e-3 * t_cont,
             "fibering scale " + fmt(t_num) + " vs continuum " + fmt(t_cont));

    NonlinearModel m12 = piecewise_model(1.0, 2.0);
    const BetaLimit b = beta_eval(m12, {0.5, 0.0, 0.0});
    c.expect(std::fabs(b.value - *m12.beta_closed) <= 1e-5,
             "beta numeric " + fmt(b.value) + " vs closed " + fmt(*m12.beta_closed));
    c.expect(std::fabs(*m12.beta_closed - 1.4520648300641149) <= 1e-9,
             "closed form drifted from the oracle value");

    // cubic-integral lower bound of the worked example
    const double cubic = std::pow(lp_norm(se.eigenfunction(0), 3.0), 3.0);
    const double bound = std::pow(1000.0, -1.5) / std::sqrt(g->domain_measure());
    c.expect(cubic > bound,
             "cubic integral " + fmt(cubic) + " does not exceed " + fmt(bound));
    c.finish();
}

void criterion4_ground_state() {
    Criterion c("criterion 4: ground state with multistart and mesh stability", 300.0);

    double cN[2];
    int idx = 0;
    for (int n : {255, 511}) {
        auto g = build_grid(1, {{0.0, 1.0}}, {n});
        Problem P(piecewise_model(12.0, 1000.0), g);
        Spectrum se = weighted_eigs(P.stiffness(), constant_field(g, 1000.0), 11);

        SolveOptions o;
        o.keep_trace = false;
        o.restarts = (n == 255) ? 8 : 1;
        o.seed = 99;
        GroundStateReport r = ground_state(P, se, o);

        c.expect(r.status == SolveStatus::converged,
                 "solver did not converge at n=" + std::to_string(n));
        c.expect(r.dual_residual <= 1e-8, "dual residual " + fmt(r.dual_residual));
        c.expect(r.nehari_residual <= 1e-8, "nehari residual " + fmt(r.nehari_residual));
        c.expect(r.c_N > 0.0, "ground level not positive");
        c.expect(r.sign != Sign::sign_changing, "minimizer changes sign");

        const double psi_e1 = P.psi(se.eigenfunction(0));
        c.expect(r.c_N <= psi_e1 + 1e-12,
                 "c_N " + fmt(r.c_N) + " exceeds the eigen-direction value " + fmt(psi_e1));

        if (n == 255) {
            for (double v : r.start_values)
                c.expect(std::isfinite(v) && std::fabs(v - r.c_N) <= 1e-6 * r.c_N,
                         "multistart landed at " + fmt(v) + " vs " + fmt(r.c_N));
        }
        cN[idx++] = r.c_N;
    }
    c.expect(std::fabs(cN[0] - cN[1]) <= 0.01 * std::fabs(cN[1]),
             "mesh stability: " + fmt(cN[0]) + " vs " + fmt(cN[1]));
    c.finish();
}

void criterion5_coercive() {
    Criterion c("criterion 5: coercive minimization", 60.0);
    auto g = build_grid(1, {{0.0, 1.0}}, {255});
    Problem P(coercive_model(20.0, 5.0), g);
    Spectrum sa = weighted_eigs(P.stiffness(), constant_field(g, 20.0), 1);

    // the scan confirms the negative small-t expansion before the solve
    GridField e1 = sa.eigenfunction(0);
    const double t = 1e-4;
    GridField te(g, t * e1.values());
    const double scan = P.energy(te) / (t * t);
    const double expansion = 0.5 * (1.0 - 20.0 / (M_PI * M_PI));
    c.expect(scan < 0.0, "small-t scan is not negative: " + fmt(scan));
    c.expect(std::fabs(scan - expansion) <= 1e-3,
             "scan " + fmt(scan) + " vs expansion " + fmt(expansion));

    GroundStateReport r = coercive_min(P, sa);
    c.expect(r.status == SolveStatus::converged, "minimization did not converge");
    c.expect(r.c_N < 0.0, "minimum energy not negative: " + fmt(r.c_N));
    c.expect(r.dual_residual <= 1e-8, "first-order residual " + fmt(r.dual_residual));
    c.finish();
}

void criterion6_gradients() {
    Criterion c("criterion 6: gradient consistency against finite differences");
    auto g = build_grid(1, {{0.0, 1.0}}, {127});
    std::mt19937 rng(606);
    std::normal_distribution<double> gauss;

    auto models = std::vector<std::pair<std::string, NonlinearModel>>{};
    models.emplace_back("section5", piecewise_model(12.0, 1000.0));
    models.emplace_back("rational", rational_model(0.0, 20.0));
    models.emplace_back("coercive", coercive_model(20.0, 5.0));

    const double eps = 1e-5;
    for (auto& [name, model] : models) {
        Problem P(model, g);
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXd a(g->size()), b(g->size());
            for (std::int64_t i = 0; i < g->size(); ++i) {
                a[i] = gauss(rng);
                b[i] = gauss(rng);
            }
            GridField u(g, a), dir(g, b);
            const GradientResult gr = P.gradient(u);
            const double an = gr.pointwise.values().dot(dir.values()) * g->volume_element();
            GridField up(g, u.values() + eps * dir.values());
            GridField um(g, u.values() - eps * dir.values());
            const double fd = (P.energy(up) - P.energy(um)) / (2.0 * eps);
            c.expect(std::fabs(an - fd) <= 1e-5 * std::max(1.0, std::fabs(fd)),
                     name + ": energy gradient vs differences: " + fmt(an) + " vs " + fmt(fd));
        }
    }

    // reduced functional: admissible cones exist for the first two families
    for (auto& [name, eta] : std::vector<std::pair<std::string, double>>{
             {"section5", 1000.0}, {"rational", 20.0}}) {
        NonlinearModel model =
            name == "section5" ? piecewise_model(12.0, 1000.0) : rational_model(0.0, 20.0);
        Problem P(model, g);
        Spectrum se = weighted_eigs(P.stiffness(), constant_field(g, eta), 8);
        GridField v = random_admissible(se, rng);
        PsiGradient pg = P.psi_grad(v);
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXd z(g->size());
            for (std::int64_t i = 0; i < g->size(); ++i) z[i] = gauss(rng);
            GridField zf(g, z);
            const double r = P.stiffness().quad(v, zf);
            zf.values() -= r * v.values();
            zf.values() /= P.stiffness().norm(zf);
            GridField vp(g, v.values() + eps * zf.values());
            GridField vm(g, v.values() - eps * zf.values());
            vp.values() /= P.stiffness().norm(vp);
            vm.values() /= P.stiffness().norm(vm);
            const double fd = (P.psi(vp) - P.psi(vm)) / (2.0 * eps);
            const double an = P.stiffness().quad(pg.tangent, zf);
            c.expect(std::fabs(an - fd) <= 1e-5 * std::max(1.0, std::fabs(fd)),
                     name + ": reduced gradient vs differences: " + fmt(an) + " vs " + fmt(fd));
        }
    }
    std::printf("    note: the reduced functional has an empty admissible cone for the "
                "coercive family on this domain; its gradient check is vacuous there\n");
    c.finish();
}

void criterion7_certification() {
    Criterion c("criterion 7: divergence check and the cube certificate", 600.0);
    auto g1 = build_grid(1, {{0.0, 1.0}}, {63});
    c.expect(!check_fF(piecewise_model(1.0, 2.0), *g1), "fF wrongly holds at theta=1");
    c.expect(!check_fF(piecewise_model(12.0, 1000.0), *g1), "fF wrongly holds at theta=12");
    c.expect(check_fF(rational_model(0.0, 20.0), *g1), "fF fails for the rational family");

    auto g = build_grid(3, {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, {9, 9, 9});
    StiffnessForm K(g);
    const SobolevEstimate S = sobolev_estimate(K);
    c.expect(S.value > 0.0, "discrete embedding constant not positive");

    auto run_chain = [&]() {
        PiecewiseChainOptions o;
        o.sobolev = S.value;
        o.sobolev_provenance = "discrete";
        o.tau_index = 1;
        return piecewise_chain(g, 1e4, o);
    };
    PiecewiseChainReport r1 = run_chain();
    PiecewiseChainReport r2 = run_chain();
    c.expect(r1.certificate.lhs == r2.certificate.lhs &&
                 r1.certificate.rhs == r2.certificate.rhs &&
                 r1.certificate.verdict == r2.certificate.verdict,
             "certificate is not deterministic");
    c.expect(r1.certificate.rhs == certificate_rhs(r1.certificate.eta_sup, r1.certificate.tau,
                                                   r1.certificate.lambda1_gap,
                                                   r1.certificate.sobolev, r1.certificate.dim),
             "right-hand side does not recompute bit for bit");

    // ground state on the cube for the level-gap audit
    Problem P(piecewise_model(r1.theta, 1e4), g);
    Spectrum se = weighted_eigs(K, constant_field(g, 1e4), 3);
    SolveOptions o;
    o.keep_trace = false;
    GroundStateReport gs = ground_state(P, se, o);
    c.expect(gs.status == SolveStatus::converged, "cube ground state did not converge");

    const double level_bound =
        std::pow(S.value / r1.certificate.eta_sup, 1.5) * r1.certificate.essinf_beta;
    std::printf("    note: cube certificate verdict %s (lhs %s, rhs %s); level audit "
                "c_N %s vs bound %s\n",
                r1.certificate.verdict ? "true" : "false", fmt(r1.certificate.lhs).c_str(),
                fmt(r1.certificate.rhs).c_str(), fmt(gs.c_N).c_str(),
                fmt(level_bound).c_str());
    if (r1.certificate.verdict)
        c.expect(gs.c_N < level_bound, "level gap fails although the certificate holds");
    c.finish();
}

void criterion8_reproducibility(const char* tool) {
    Criterion c("criterion 8: byte-identical reports");
    if (!tool) {
        c.expect(false, "tool path missing: pass the CLI binary as the first argument");
        c.finish();
        return;
    }

    const std::string cfg = "acceptance_cfg.json";
    {
        std::ofstream os(cfg);
        os << R"({
  "grid":  {"dim": 1, "extents": [[0, 1]], "counts": [255]},
  "model": {"kind": "section5", "theta": 12, "eta": 1000},
  "solve": {"restarts": 2, "seed": 4242}
})";
    }
    auto slurp = [](const std::string& p) {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    };
    auto run = [&](const std::string& out) {
        const std::string cmd = std::string(tool) + " solve --config " + cfg + " --out " + out +
                                " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    c.expect(run("acceptance_r1.json") == 0, "first solve run failed");
    c.expect(run("acceptance_r2.json") == 0, "second solve run failed");
    const std::string a = slurp("acceptance_r1.json"), b = slurp("acceptance_r2.json");
    c.expect(!a.empty(), "first report is empty");
    c.expect(a == b, "solve reports differ between identical runs");

    auto runv = [&](const std::string& out) {
        const std::string cmd = std::string(tool) + " verify-beta --config " + cfg +
                                " --sobolev 1.0 --out " + out + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    c.expect(runv("acceptance_v1.json") == 0, "first verify-beta run failed");
    c.expect(runv("acceptance_v2.json") == 0, "second verify-beta run failed");
    c.expect(slurp("acceptance_v1.json") == slurp("acceptance_v2.json"),
             "verify-beta reports differ between identical runs");
    c.finish();
}

} // namespace

int main(int argc, char** argv) {
    const char* tool = argc > 1 ? argv[1] : nullptr;
    criterion1_spectral_scaling();
    criterion2_fibering();
    criterion3_closed_forms();
    criterion4_ground_state();
    criterion5_coercive();
    criterion6_gradients();
    criterion7_certification();
    criterion8_reproducibility(tool);
    std::printf("%d of 8 criteria passed\n", 8 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
