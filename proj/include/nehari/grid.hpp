#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nehari/errors.hpp"

namespace nehari {

// Spatial point; unused trailing components are zero.
using Point = std::array<double, 3>;

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Uniform tensor grid over a box with homogeneous Dirichlet data.
/// Only interior nodes are stored; the boundary condition is structural.
class Grid {
public:
    static std::shared_ptr<const Grid> make(int dim,
                                            std::vector<Interval> extents,
                                            std::vector<int> counts) {
        if (dim < 1 || dim > 3)
            throw PreconditionError("grid: dim must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
        if (static_cast<int>(extents.size()) != dim || static_cast<int>(counts.size()) != dim)
            throw PreconditionError("grid: extents/counts length must equal dim");
        for (int d = 0; d < dim; ++d) {
            if (!(extents[d].hi > extents[d].lo))
                throw PreconditionError("grid: axis " + std::to_string(d) + " needs b > a");
            if (counts[d] < 3)
                throw PreconditionError("grid: axis " + std::to_string(d) +
                                        " needs at least 3 interior nodes (got " +
                                        std::to_string(counts[d]) + ")");
        }
        return std::shared_ptr<const Grid>(new Grid(dim, std::move(extents), std::move(counts)));
    }

    int dim() const { return dim_; }
    const Interval& extent(int axis) const { return extents_[axis]; }
    int count(int axis) const { return counts_[axis]; }
    double spacing(int axis) const { return h_[axis]; }

    std::int64_t size() const { return size_; }

    /// Volume element of the nodal quadrature rule, prod_d h_d.
    double volume_element() const { return vol_; }

    /// Lebesgue measure of the box, prod_d (b_d - a_d).
    double domain_measure() const { return measure_; }

    std::array<int, 3> multi_index(std::int64_t id) const {
        std::array<int, 3> mi{0, 0, 0};
        for (int d = 0; d < dim_; ++d) {
            mi[d] = static_cast<int>(id % counts_[d]);
            id /= counts_[d];
        }
        return mi;
    }

    std::int64_t flat_index(const std::array<int, 3>& mi) const {
        std::int64_t id = 0;
        for (int d = dim_ - 1; d >= 0; --d) id = id * counts_[d] + mi[d];
        return id;
    }

    Point point(std::int64_t id) const {
        const auto mi = multi_index(id);
        Point p{0.0, 0.0, 0.0};
        for (int d = 0; d < dim_; ++d) p[d] = extents_[d].lo + (mi[d] + 1) * h_[d];
        return p;
    }

    bool same_as(const Grid& o) const {
        if (this == &o) return true;
        if (dim_ != o.dim_) return false;
        for (int d = 0; d < dim_; ++d) {
            if (counts_[d] != o.counts_[d]) return false;
            if (extents_[d].lo != o.extents_[d].lo) return false;
            if (extents_[d].hi != o.extents_[d].hi) return false;
        }
        return true;
    }

private:
    Grid(int dim, std::vector<Interval> extents, std::vector<int> counts)
        : dim_(dim), extents_(std::move(extents)), counts_(std::move(counts)) {
        size_ = 1;
        vol_ = 1.0;
        measure_ = 1.0;
        h_.resize(dim_);
        for (int d = 0; d < dim_; ++d) {
            h_[d] = (extents_[d].hi - extents_[d].lo) / (counts_[d] + 1);
            size_ *= counts_[d];
            vol_ *= h_[d];
            measure_ *= extents_[d].hi - extents_[d].lo;
        }
    }

    int dim_;
    std::vector<Interval> extents_;
    std::vector<int> counts_;
    std::vector<double> h_;
    std::int64_t size_ = 0;
    double vol_ = 0.0;
    double measure_ = 0.0;
};

inline std::shared_ptr<const Grid> build_grid(int dim,
                                              std::vector<Interval> extents,
                                              std::vector<int> counts) {
    return Grid::make(dim, std::move(extents), std::move(counts));
}

/// One real value per interior node of a grid.
class GridField {
public:
    explicit GridField(std::shared_ptr<const Grid> g)
        : grid_(std::move(g)), values_(Eigen::VectorXd::Zero(grid_->size())) {}

    GridField(std::shared_ptr<const Grid> g, Eigen::VectorXd v)
        : grid_(std::move(g)), values_(std::move(v)) {
        if (values_.size() != grid_->size())
            throw PreconditionError("field: value count does not match grid size");
    }

    const Grid& grid() const { return *grid_; }
    const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }

    Eigen::VectorXd& values() { return values_; }
    const Eigen::VectorXd& values() const { return values_; }

    double operator[](std::int64_t i) const { return values_[i]; }
    double& operator[](std::int64_t i) { return values_[i]; }
    std::int64_t size() const { return values_.size(); }

    bool all_finite() const { return values_.allFinite(); }

private:
    std::shared_ptr<const Grid> grid_;
    Eigen::VectorXd values_;
};

inline void require_same_grid(const GridField& a, const GridField& b, const char* where) {
    if (!a.grid().same_as(b.grid()))
        throw PreconditionError(std::string(where) + ": grid mismatch");
}

/// Nodal quadrature, sum_i v_i * prod_d h_d.
inline double integrate(const GridField& v) {
    return v.values().sum() * v.grid().volume_element();
}

/// int theta u^2 dx by the nodal rule.
inline double weighted_l2(const GridField& theta, const GridField& u) {
    require_same_grid(theta, u, "weighted_l2");
    return theta.values().cwiseProduct(u.values().cwiseAbs2()).sum() * u.grid().volume_element();
}

/// (int |u|^p)^{1/p}; p = inf gives the nodal max of |u|.
inline double lp_norm(const GridField& u, double p) {
    if (std::isinf(p)) return u.values().lpNorm<Eigen::Infinity>();
    if (!(p >= 1.0)) throw PreconditionError("lp_norm: p must satisfy p >= 1");
    const double s = u.values().array().abs().pow(p).sum() * u.grid().volume_element();
    return std::pow(s, 1.0 / p);
}

/// Dirichlet-Laplacian energy form on a grid. Boundary nodes are eliminated,
/// so the matrix is symmetric positive definite. A Cholesky factor is kept
/// for dual-norm solves; the object is immutable after construction.
class StiffnessForm {
public:
    explicit StiffnessForm(std::shared_ptr<const Grid> g) : grid_(std::move(g)) {
        const Grid& gr = *grid_;
        const std::int64_t n = gr.size();
        const double vol = gr.volume_element();

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n) * (2 * gr.dim() + 1));

        double diag = 0.0;
        for (int d = 0; d < gr.dim(); ++d) diag += 2.0 / (gr.spacing(d) * gr.spacing(d));
        diag *= vol;

        for (std::int64_t i = 0; i < n; ++i) {
            trip.emplace_back(i, i, diag);
            const auto mi = gr.multi_index(i);
            for (int d = 0; d < gr.dim(); ++d) {
                const double w = -vol / (gr.spacing(d) * gr.spacing(d));
                if (mi[d] + 1 < gr.count(d)) {
                    auto mj = mi;
                    mj[d] += 1;
                    trip.emplace_back(i, gr.flat_index(mj), w);
                }
                if (mi[d] > 0) {
                    auto mj = mi;
                    mj[d] -= 1;
                    trip.emplace_back(i, gr.flat_index(mj), w);
                }
            }
        }
        matrix_.resize(n, n);
        matrix_.setFromTriplets(trip.begin(), trip.end());
        matrix_.makeCompressed();

        factor_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
        factor_->compute(matrix_);
        if (factor_->info() != Eigen::Success)
            throw Error(ErrorKind::numeric, "stiffness: factorization failed");
    }

    const Grid& grid() const { return *grid_; }
    const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return matrix_ * u; }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        Eigen::VectorXd x = factor_->solve(b);
        if (factor_->info() != Eigen::Success)
            throw Error(ErrorKind::numeric, "stiffness: linear solve failed");
        return x;
    }

    /// q(u, v), the discrete int grad u . grad v.
    double quad(const GridField& u, const GridField& v) const {
        check(u);
        check(v);
        return u.values().dot(matrix_ * v.values());
    }

    /// q(u, u) = ||u||^2.
    double energy_norm2(const GridField& u) const {
        check(u);
        return u.values().dot(matrix_ * u.values());
    }

    double norm(const GridField& u) const { return std::sqrt(std::max(0.0, energy_norm2(u))); }

private:
    void check(const GridField& u) const {
        if (!u.grid().same_as(*grid_))
            throw PreconditionError("stiffness: grid mismatch");
    }

    std::shared_ptr<const Grid> grid_;
    Eigen::SparseMatrix<double> matrix_;
    std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> factor_;
};

inline StiffnessForm assemble_stiffness(std::shared_ptr<const Grid> g) {
    return StiffnessForm(std::move(g));
}

// ---------------------------------------------------------------------------
// Field dump format: `# dim,N; extents,a0,b0[,a1,b1...]; counts,n0[,n1...]`
// then one row per node, coordinates first, value last.
// ---------------------------------------------------------------------------

inline void write_field_csv(std::ostream& os, const GridField& u) {
    const Grid& g = u.grid();
    os << "# dim," << g.dim() << "; extents";
    for (int d = 0; d < g.dim(); ++d) os << "," << g.extent(d).lo << "," << g.extent(d).hi;
    os << "; counts";
    for (int d = 0; d < g.dim(); ++d) os << "," << g.count(d);
    os << "\n";
    char buf[64];
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const Point p = g.point(i);
        for (int d = 0; d < g.dim(); ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", p[d]);
            os << buf << ",";
        }
        std::snprintf(buf, sizeof buf, "%.17g", u[i]);
        os << buf << "\n";
    }
}

inline void write_field_csv(const std::string& path, const GridField& u) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    write_field_csv(os, u);
}

inline GridField read_field_csv(std::istream& is, const std::string& name = "<stream>") {
    std::string header;
    if (!std::getline(is, header) || header.rfind("# dim,", 0) != 0)
        throw ConfigError(name + ": missing field header line");
    for (char& c : header)
        if (c == ';' || c == ',') c = ' ';
    std::istringstream hs(header);
    std::string tok;
    int dim = 0;
    hs >> tok >> tok >> dim;
    if (dim < 1 || dim > 3) throw ConfigError(name + ": bad dim in header");
    hs >> tok; // "extents"
    std::vector<Interval> ext(dim);
    for (int d = 0; d < dim; ++d) hs >> ext[d].lo >> ext[d].hi;
    hs >> tok; // "counts"
    std::vector<int> counts(dim);
    for (int d = 0; d < dim; ++d) hs >> counts[d];
    if (!hs) throw ConfigError(name + ": malformed field header");

    auto grid = build_grid(dim, ext, counts);
    Eigen::VectorXd vals(grid->size());
    std::string line;
    std::int64_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (row >= grid->size()) throw ConfigError(name + ": more rows than grid nodes");
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        double coord = 0.0, value = 0.0;
        for (int d = 0; d < dim; ++d) ls >> coord;
        ls >> value;
        if (!ls) throw ConfigError(name + ": malformed row " + std::to_string(row));
        vals[row++] = value;
    }
    if (row != grid->size())
        throw ConfigError(name + ": expected " + std::to_string(grid->size()) +
                          " rows, got " + std::to_string(row));
    return GridField(grid, std::move(vals));
}

inline GridField read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open field file: " + path);
    return read_field_csv(is, path);
}

} // namespace nehari
