#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "nehari/errors.hpp"
#include "nehari/grid.hpp"

namespace nehari {

struct SpectrumOptions {
    double cluster_tol = 1e-6;     // relative gap that separates distinct eigenvalues
    double residual_tol = 1e-8;    // dual-pairing residual bound per pair
    std::int64_t dense_threshold = 3000;
    int max_subspace_iter = 600;
    unsigned seed = 42;            // start block of the subspace iteration
};

/// Ordered positive eigenpairs of q(u,v) = lambda int theta u v, eigenfunctions
/// normalized in the energy norm. Immutable after construction.
class Spectrum {
public:
    int count() const { return static_cast<int>(lambdas_.size()); }

    /// j is 0-based.
    double lambda(int j) const { return lambdas_.at(j); }
    const std::vector<double>& lambdas() const { return lambdas_; }

    GridField eigenfunction(int j) const { return GridField(grid_, vectors_.col(j)); }
    const Eigen::MatrixXd& eigenvectors() const { return vectors_; }

    const GridField& weight() const { return weight_; }
    const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }

    double cluster_tol() const { return cluster_tol_; }
    double residual(int j) const { return residuals_.at(j); }
    double normalization_residual(int j) const { return norm_residuals_.at(j); }

    struct Cluster {
        int first;      // index of the first pair in the cluster
        int size;       // eigenspace dimension
        double lambda;  // representative value (first member)
    };
    const std::vector<Cluster>& clusters() const { return clusters_; }

    /// Field spanned by the first eigenvectors with the given coefficients.
    /// The basis is energy-orthonormal, so the norm of the result is |c|_2.
    GridField span_field(const Eigen::VectorXd& c) const {
        if (c.size() > vectors_.cols())
            throw PreconditionError("spectrum: span coefficients exceed computed pairs");
        return GridField(grid_, vectors_.leftCols(c.size()) * c);
    }

private:
    friend Spectrum weighted_eigs(const StiffnessForm&, const GridField&, int, SpectrumOptions);

    Spectrum(std::shared_ptr<const Grid> g, GridField w, double ctol)
        : grid_(std::move(g)), weight_(std::move(w)), cluster_tol_(ctol) {}

    void finalize() {
        clusters_.clear();
        for (int j = 0; j < count(); ++j) {
            if (j == 0 ||
                lambdas_[j] - lambdas_[j - 1] > cluster_tol_ * std::max(1e-300, std::fabs(lambdas_[j])))
                clusters_.push_back({j, 1, lambdas_[j]});
            else
                clusters_.back().size += 1;
        }
    }

    std::shared_ptr<const Grid> grid_;
    GridField weight_;
    double cluster_tol_;
    std::vector<double> lambdas_;
    Eigen::MatrixXd vectors_;
    std::vector<double> residuals_;
    std::vector<double> norm_residuals_;
    std::vector<Cluster> clusters_;
};

namespace detail {

inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    const double big = v.lpNorm<Eigen::Infinity>();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::fabs(v[i]) > 1e-12 * big) {
            if (v[i] < 0.0) v = -v;
            return;
        }
    }
}

// Gram-Schmidt in the A-inner product, re-orthogonalized for stability.
inline void a_orthonormalize(const StiffnessForm& K, Eigen::MatrixXd& X) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd Ax = K.matrix() * X.col(j);
            for (Eigen::Index i = 0; i < j; ++i)
                X.col(j) -= X.col(i) * (X.col(i).dot(Ax));
        }
        const double nrm = std::sqrt(std::max(X.col(j).dot(K.matrix() * X.col(j)), 1e-300));
        X.col(j) /= nrm;
    }
}

} // namespace detail

/// First m positive eigenvalues of the weighted problem, smallest first,
/// eigenfunctions energy-normalized with a deterministic sign convention.
/// theta may change sign; it must have a nontrivial positive part.
inline Spectrum weighted_eigs(const StiffnessForm& K, const GridField& theta, int m,
                              SpectrumOptions opts = {}) {
    if (!theta.grid().same_as(K.grid()))
        throw PreconditionError("weighted_eigs: grid mismatch");
    if (m < 1) throw PreconditionError("weighted_eigs: m must be >= 1");
    if (theta.values().maxCoeff() <= 0.0)
        throw PreconditionError("weighted_eigs: weight has no positive part, "
                                "no positive eigenvalue exists");

    const std::int64_t n = K.grid().size();
    const double vol = K.grid().volume_element();
    const Eigen::VectorXd bdiag = theta.values() * vol;

    Spectrum s(K.grid_ptr(), theta, opts.cluster_tol);

    Eigen::VectorXd mus;       // eigenvalues of B x = mu A x, descending kept part
    Eigen::MatrixXd vecs;      // A-orthonormal eigenvectors

    if (n < opts.dense_threshold) {
        Eigen::MatrixXd Ad = Eigen::MatrixXd(K.matrix());
        Eigen::MatrixXd Bd = bdiag.asDiagonal();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Bd, Ad,
                                                                     Eigen::ComputeEigenvectors |
                                                                         Eigen::Ax_lBx);
        if (es.info() != Eigen::Success)
            throw Error(ErrorKind::numeric, "weighted_eigs: dense eigensolver failed");
        // mu ascending; positive mu from the top give the smallest lambda.
        const Eigen::VectorXd& all = es.eigenvalues();
        const double mu_floor = 1e-12 * all.cwiseAbs().maxCoeff();
        int pos = 0;
        for (Eigen::Index i = 0; i < all.size(); ++i)
            if (all[i] > mu_floor) ++pos;
        if (pos < m)
            throw PreconditionError("weighted_eigs: requested m=" + std::to_string(m) +
                                    " but only " + std::to_string(pos) +
                                    " positive eigenvalues exist");
        mus.resize(m);
        vecs.resize(n, m);
        for (int j = 0; j < m; ++j) {
            mus[j] = all[all.size() - 1 - j];
            vecs.col(j) = es.eigenvectors().col(all.size() - 1 - j);
        }
    } else {
        // Subspace iteration on A^{-1} B with Rayleigh-Ritz in the A-inner
        // product; extra block vectors act as deflation space.
        const int p = static_cast<int>(std::min<std::int64_t>(n, m + std::max(8, m / 2)));
        std::mt19937 rng(opts.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd X(n, p);
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index i = 0; i < n; ++i) X(i, j) = gauss(rng);
        detail::a_orthonormalize(K, X);

        Eigen::VectorXd ritz;
        for (int it = 0; it < opts.max_subspace_iter; ++it) {
            Eigen::MatrixXd Y(n, p);
            for (int j = 0; j < p; ++j)
                Y.col(j) = K.solve(bdiag.cwiseProduct(X.col(j)));
            detail::a_orthonormalize(K, Y);
            Eigen::MatrixXd G(p, p);
            for (int j = 0; j < p; ++j) {
                const Eigen::VectorXd By = bdiag.cwiseProduct(Y.col(j));
                for (int i = 0; i < p; ++i) G(i, j) = Y.col(i).dot(By);
            }
            G = 0.5 * (G + G.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(G);
            // descending mu
            Eigen::VectorXd mu_all = small.eigenvalues().reverse();
            Eigen::MatrixXd V = small.eigenvectors().rowwise().reverse();
            X = Y * V;
            ritz = mu_all;

            // Convergence of the m wanted positive pairs in the dual pairing.
            bool done = true;
            int checked = 0;
            for (int j = 0; j < p && checked < m; ++j) {
                if (mu_all[j] <= 0.0) continue;
                const Eigen::VectorXd z =
                    K.solve(bdiag.cwiseProduct(X.col(j))) - mu_all[j] * X.col(j);
                const double rn = std::sqrt(std::max(0.0, z.dot(K.matrix() * z)));
                if (rn > 0.1 * opts.residual_tol * mu_all[j]) done = false;
                ++checked;
            }
            if (done && checked == m) break;
        }

        const double mu_floor = 1e-12 * ritz.cwiseAbs().maxCoeff();
        std::vector<int> keep;
        for (int j = 0; j < ritz.size() && static_cast<int>(keep.size()) < m; ++j)
            if (ritz[j] > mu_floor) keep.push_back(j);
        if (static_cast<int>(keep.size()) < m)
            throw PreconditionError("weighted_eigs: requested m=" + std::to_string(m) +
                                    " but the iteration found only " +
                                    std::to_string(keep.size()) + " positive eigenvalues");
        mus.resize(m);
        vecs.resize(n, m);
        for (int j = 0; j < m; ++j) {
            mus[j] = ritz[keep[j]];
            vecs.col(j) = X.col(keep[j]);
        }
    }

    s.lambdas_.resize(m);
    s.residuals_.resize(m);
    s.norm_residuals_.resize(m);
    for (int j = 0; j < m; ++j) {
        s.lambdas_[j] = 1.0 / mus[j];
        detail::fix_sign(vecs.col(j));
    }
    s.vectors_ = std::move(vecs);

    for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd e = s.vectors_.col(j);
        const Eigen::VectorXd r = K.matrix() * e - s.lambdas_[j] * bdiag.cwiseProduct(e);
        const double dual = std::sqrt(std::max(0.0, r.dot(K.solve(r))));
        s.residuals_[j] = dual;
        s.norm_residuals_[j] = std::fabs(e.dot(K.matrix() * e) - 1.0);
        if (dual > opts.residual_tol * s.lambdas_[j])
            throw Error(ErrorKind::numeric,
                        "weighted_eigs: pair " + std::to_string(j + 1) +
                            " residual " + std::to_string(dual) + " exceeds tolerance");
    }

    s.finalize();
    return s;
}

struct ChiResult {
    int chi;  // cumulative eigenspace dimension through the m-th distinct eigenvalue
    int s_m;  // the same sum, kept under the name used for symmetric multiplicity counts
};

/// Cumulative dimension of the first m distinct eigenspaces.
inline ChiResult chi(const Spectrum& s, int m) {
    if (m < 1) throw PreconditionError("chi: m must be >= 1");
    if (static_cast<int>(s.clusters().size()) < m)
        throw PreconditionError("chi: spectrum holds only " +
                                std::to_string(s.clusters().size()) +
                                " distinct eigenvalues, need " + std::to_string(m));
    int total = 0;
    for (int c = 0; c < m; ++c) total += s.clusters()[c].size;
    return {total, total};
}

} // namespace nehari
