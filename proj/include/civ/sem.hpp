#ifndef CIV_SEM_HPP
#define CIV_SEM_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <civ/error.hpp>
#include <civ/graph.hpp>
#include <civ/rng.hpp>

namespace civ {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Labelled symmetric positive-definite covariance matrix. The smallest
// eigenvalue must exceed 1e-10 times the largest.
class CovModel {
public:
    static CovModel create(std::vector<std::string> labels, Matrix sigma) {
        CovModel c;
        c.labels_ = std::move(labels);
        int n = static_cast<int>(c.labels_.size());
        if (sigma.rows() != n || sigma.cols() != n)
            throw Error(errc::precondition, "covariance dimension does not match label count");
        for (int i = 0; i < n; ++i)
            if (!c.index_.emplace(c.labels_[i], i).second)
                throw Error(errc::precondition, "duplicate covariance label '" + c.labels_[i] + "'");
        double scale = sigma.cwiseAbs().maxCoeff();
        if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, scale))
            throw Error(errc::not_spd, "covariance matrix is not symmetric");
        c.sigma_ = 0.5 * (sigma + sigma.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(c.sigma_, Eigen::EigenvaluesOnly);
        double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (hi <= 0.0 || lo <= 1e-10 * hi)
            throw Error(errc::not_spd, "covariance matrix is not positive definite");
        return c;
    }

    int size() const { return static_cast<int>(labels_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    const Matrix& sigma() const { return sigma_; }

    int index_of(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end())
            throw Error(errc::unknown_node, "unknown covariance label '" + label + "'");
        return it->second;
    }

    std::vector<int> indices_of(const std::vector<std::string>& names) const {
        std::vector<int> out;
        out.reserve(names.size());
        for (const auto& n : names) out.push_back(index_of(n));
        return out;
    }

    Matrix block(const std::vector<int>& rows, const std::vector<int>& cols) const {
        Matrix out(rows.size(), cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = sigma_(rows[i], cols[j]);
        return out;
    }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
    Matrix sigma_;
};

namespace detail {

inline Matrix spd_solve(const Matrix& a, const Matrix& b, const char* what) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw Error(errc::singular, std::string("degenerate conditioning: ") + what);
    return llt.solve(b);
}

}  // namespace detail

// Sigma_{st.w} = Sigma_st - Sigma_sw Sigma_ww^{-1} Sigma_wt. With w empty this
// is the plain cross-covariance. s, t and w may overlap.
inline Matrix conditional_cov(const CovModel& c, const std::vector<std::string>& s,
                              const std::vector<std::string>& t,
                              const std::vector<std::string>& w) {
    auto si = c.indices_of(s), ti = c.indices_of(t), wi = c.indices_of(w);
    Matrix st = c.block(si, ti);
    if (wi.empty()) return st;
    Matrix ww = c.block(wi, wi);
    Matrix wt = c.block(wi, ti);
    Matrix sw = c.block(si, wi);
    return st - sw * detail::spd_solve(ww, wt, "conditioning block is singular");
}

// Population least-squares coefficients of t in the regression of each s on
// (t, w); an |s| x |t| matrix.
inline Matrix regression_coef(const CovModel& c, const std::vector<std::string>& s,
                              const std::vector<std::string>& t,
                              const std::vector<std::string>& w) {
    auto si = c.indices_of(s), ti = c.indices_of(t), wi = c.indices_of(w);
    std::vector<int> di = ti;
    di.insert(di.end(), wi.begin(), wi.end());
    Matrix dd = c.block(di, di);
    Matrix ds = c.block(di, si);
    Matrix beta = detail::spd_solve(dd, ds, "regression design is singular");
    return beta.topRows(static_cast<int>(ti.size())).transpose();
}

// Linear structural equation model compatible with an Admg. coeffs(i, j)
// holds the coefficient of the edge V_j -> V_i, so values solve
// V = coeffs * V + eps and the implied covariance over the node order is
// (I - A)^{-1} Omega (I - A)^{-T}.
class LinearSem {
public:
    static LinearSem create(Admg graph, Matrix coeffs, Matrix err_cov) {
        int n = graph.num_nodes();
        if (coeffs.rows() != n || coeffs.cols() != n || err_cov.rows() != n || err_cov.cols() != n)
            throw Error(errc::precondition, "parameter matrices must be square over the node set");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (coeffs(i, j) != 0.0 && !graph.has_directed(j, i))
                    throw Error(errc::precondition,
                                "coefficient set for missing edge " + graph.name(j) + " -> " +
                                    graph.name(i));
                if (i != j && err_cov(i, j) != 0.0 && !graph.has_bidirected(i, j))
                    throw Error(errc::precondition,
                                "error covariance set for missing edge " + graph.name(i) +
                                    " <-> " + graph.name(j));
            }
        double scale = std::max(1.0, err_cov.cwiseAbs().maxCoeff());
        if ((err_cov - err_cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
            throw Error(errc::precondition, "error covariance must be symmetric");
        Eigen::SelfAdjointEigenSolver<Matrix> es(err_cov, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-9 * scale)
            throw Error(errc::not_spd, "error covariance must be positive semidefinite");

        LinearSem m;
        m.graph_ = std::move(graph);
        m.coeffs_ = std::move(coeffs);
        m.err_cov_ = std::move(err_cov);
        return m;
    }

    const Admg& graph() const { return graph_; }
    const Matrix& coeffs() const { return coeffs_; }
    const Matrix& err_cov() const { return err_cov_; }

private:
    LinearSem() : graph_(Admg::create({}, {})) {}

    Admg graph_;
    Matrix coeffs_, err_cov_;
};

inline CovModel implied_covariance(const LinearSem& m) {
    int n = m.graph().num_nodes();
    Matrix id_minus_a = Matrix::Identity(n, n) - m.coeffs();
    Eigen::PartialPivLU<Matrix> lu(id_minus_a);
    Matrix k = lu.solve(m.err_cov());
    Matrix sigma = lu.solve(k.transpose()).transpose();
    return CovModel::create(m.graph().node_names(), std::move(sigma));
}

// Sum over causal paths from x to y of the edge-coefficient products; the
// (y, x) entry of (I - A)^{-1}. Zero when y does not descend from x.
inline double total_effect(const LinearSem& m, int x, int y) {
    int n = m.graph().num_nodes();
    m.graph().check_node(x);
    m.graph().check_node(y);
    Vector unit = Vector::Zero(n);
    unit(x) = 1.0;
    Matrix id_minus_a = Matrix::Identity(n, n) - m.coeffs();
    Vector effects = Eigen::PartialPivLU<Matrix>(id_minus_a).solve(unit);
    return effects(y);
}

enum class ErrorFamily { Gaussian, UniformScaled };

inline const char* to_string(ErrorFamily f) {
    return f == ErrorFamily::Gaussian ? "gaussian" : "uniform";
}

// One materialized latent per bidirected edge of the base graph.
struct LatentSpec {
    int a, b;          // observed endpoint indices, a < b in node order
    double coef_a, coef_b;
    double var;
};

// Latent-expanded sampling form of a linear SEM: every bidirected edge is
// replaced by a fresh latent parent of its two endpoints, leaving a model
// with independent errors that can be simulated forward.
class CanonicalSem {
public:
    static CanonicalSem create(const Admg& base, const Matrix& base_coeffs,
                               const Vector& base_err_var, std::vector<LatentSpec> latents,
                               ErrorFamily family) {
        int n = base.num_nodes();
        if (base_coeffs.rows() != n || base_coeffs.cols() != n ||
            base_err_var.size() != n)
            throw Error(errc::precondition, "parameter dimensions must match the base graph");

        std::vector<std::string> names = base.node_names();
        std::vector<Edge> edges;
        for (const auto& e : base.edges())
            if (e.kind == EdgeKind::Directed) edges.push_back(e);

        CanonicalSem c;
        c.base_ = base;
        c.family_ = family;
        c.latents_ = std::move(latents);
        c.num_observed_ = n;

        int k = static_cast<int>(c.latents_.size());
        c.coeffs_ = Matrix::Zero(n + k, n + k);
        c.coeffs_.topLeftCorner(n, n) = base_coeffs;
        c.err_var_ = Vector(n + k);
        c.err_var_.head(n) = base_err_var;

        for (int li = 0; li < k; ++li) {
            const LatentSpec& l = c.latents_[li];
            base.check_node(l.a);
            base.check_node(l.b);
            std::string name = "L_" + base.name(l.a) + "_" + base.name(l.b);
            while (std::find(names.begin(), names.end(), name) != names.end()) name += "_";
            names.push_back(name);
            int id = n + li;
            edges.push_back({EdgeKind::Directed, name, base.name(l.a)});
            edges.push_back({EdgeKind::Directed, name, base.name(l.b)});
            c.coeffs_(l.a, id) = l.coef_a;
            c.coeffs_(l.b, id) = l.coef_b;
            c.err_var_(id) = l.var;
        }
        c.expanded_ = Admg::create(std::move(names), edges);
        return c;
    }

    const Admg& base_graph() const { return base_; }
    const Admg& expanded_graph() const { return expanded_; }
    const Matrix& expanded_coeffs() const { return coeffs_; }
    const Vector& error_variances() const { return err_var_; }
    ErrorFamily family() const { return family_; }
    const std::vector<LatentSpec>& latents() const { return latents_; }
    int num_observed() const { return num_observed_; }

private:
    CanonicalSem() : base_(Admg::create({}, {})), expanded_(Admg::create({}, {})) {}

    Admg base_, expanded_;
    Matrix coeffs_;
    Vector err_var_;
    ErrorFamily family_ = ErrorFamily::Gaussian;
    std::vector<LatentSpec> latents_;
    int num_observed_ = 0;
};

struct RandomSemConfig {
    double coef_min = 0.1, coef_max = 2.0;   // magnitude range, sign fair-coin
    double var_min = 0.1, var_max = 1.0;
    // When set, forces the error family instead of drawing it.
    bool force_family = false;
    ErrorFamily family = ErrorFamily::Gaussian;
};

// Random model compatible with g. Draw order is fixed: family, per-node error
// variance (node order), per-directed-edge coefficient (edge order), then per
// bidirected edge its latent's variance and two coefficients. Deterministic
// for a fixed seed.
inline CanonicalSem random_sem(const Admg& g, std::uint64_t seed,
                               const RandomSemConfig& cfg = {}) {
    Rng rng(derive_seed(seed, 0x5eedULL));
    ErrorFamily family =
        cfg.force_family ? cfg.family
                         : (rng.bernoulli(0.5) ? ErrorFamily::Gaussian : ErrorFamily::UniformScaled);

    int n = g.num_nodes();
    Vector err_var(n);
    for (int i = 0; i < n; ++i) err_var(i) = rng.uniform(cfg.var_min, cfg.var_max);

    auto draw_coef = [&] {
        double mag = rng.uniform(cfg.coef_min, cfg.coef_max);
        return rng.bernoulli(0.5) ? mag : -mag;
    };

    Matrix coeffs = Matrix::Zero(n, n);
    std::vector<LatentSpec> latents;
    for (const auto& e : g.edges()) {
        if (e.kind == EdgeKind::Directed) {
            coeffs(g.index_of(e.head), g.index_of(e.tail)) = draw_coef();
        } else {
            LatentSpec l{};
            int a = g.index_of(e.tail), b = g.index_of(e.head);
            l.a = std::min(a, b);
            l.b = std::max(a, b);
            l.var = rng.uniform(cfg.var_min, cfg.var_max);
            l.coef_a = draw_coef();
            l.coef_b = draw_coef();
            latents.push_back(l);
        }
    }
    return CanonicalSem::create(g, coeffs, err_var, std::move(latents), family);
}

struct DataMatrix {
    std::vector<std::string> labels;
    Matrix rows;  // n x p

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == name) return static_cast<int>(i);
        throw Error(errc::unknown_node, "unknown data column '" + name + "'");
    }

    long n() const { return rows.rows(); }
};

// Forward simulation in topological order. Uniform errors are centered and
// scaled to the requested variance (support +- sqrt(3 v)). Latent columns are
// dropped from the output.
inline DataMatrix sample(const CanonicalSem& m, long n, std::uint64_t seed) {
    if (n < 1) throw Error(errc::precondition, "sample size must be at least 1");
    Rng rng(derive_seed(seed, 0xda7aULL));
    const Admg& eg = m.expanded_graph();
    int p = eg.num_nodes();
    const auto& topo = eg.topological_order();
    const Matrix& a = m.expanded_coeffs();

    bool gaussian = m.family() == ErrorFamily::Gaussian;
    Vector noise_scale(p);
    for (int i = 0; i < p; ++i) {
        double v = m.error_variances()(i);
        noise_scale(i) = gaussian ? std::sqrt(v) : std::sqrt(3.0 * v);
    }

    Matrix values(n, p);
    Vector row(p);
    for (long r = 0; r < n; ++r) {
        for (int v : topo) {
            double eps = gaussian ? rng.normal() * noise_scale(v)
                                  : rng.uniform(-noise_scale(v), noise_scale(v));
            double acc = eps;
            for (int par : eg.parents_of(v)) acc += a(v, par) * row(par);
            row(v) = acc;
        }
        values.row(r) = row;
    }

    DataMatrix out;
    out.labels.assign(eg.node_names().begin(), eg.node_names().begin() + m.num_observed());
    out.rows = values.leftCols(m.num_observed());
    return out;
}

// Collapse the latents back into correlated errors: omega_ab accumulates
// coef_a * coef_b * var over the latents shared by a and b, and each latent
// adds coef^2 * var to its endpoints' error variances.
inline LinearSem marginal_linear_sem(const CanonicalSem& m) {
    int n = m.num_observed();
    Matrix omega = Matrix::Zero(n, n);
    omega.diagonal() = m.error_variances().head(n);
    for (const auto& l : m.latents()) {
        omega(l.a, l.a) += l.coef_a * l.coef_a * l.var;
        omega(l.b, l.b) += l.coef_b * l.coef_b * l.var;
        omega(l.a, l.b) += l.coef_a * l.coef_b * l.var;
        omega(l.b, l.a) += l.coef_a * l.coef_b * l.var;
    }
    Matrix coeffs = m.expanded_coeffs().topLeftCorner(n, n);
    return LinearSem::create(m.base_graph(), std::move(coeffs), std::move(omega));
}

// Centered cross-moment matrix (divides by n, matching the population
// formulas); may be rank deficient for small n.
inline Matrix empirical_covariance(const Matrix& data) {
    Eigen::RowVectorXd mean = data.colwise().mean();
    Matrix centered = data.rowwise() - mean;
    return centered.transpose() * centered / static_cast<double>(data.rows());
}

// Named-parameter form used to build fixture models by hand.
struct SemParams {
    std::map<std::pair<std::string, std::string>, double> directed;  // (tail, head) -> coef
    std::map<std::string, double> err_var;
    // (tail, head) canonical bidirected pair -> {coef to tail, coef to head, latent var}
    struct LatentParams {
        double coef_tail = 1.0, coef_head = 1.0, var = 1.0;
    };
    std::map<std::pair<std::string, std::string>, LatentParams> latents;
    ErrorFamily family = ErrorFamily::Gaussian;
};

// All coefficients and variances 1; the usual starting point for worked
// fixture models.
inline SemParams unit_params(const Admg& g) {
    SemParams p;
    for (const auto& e : g.edges()) {
        if (e.kind == EdgeKind::Directed)
            p.directed[{e.tail, e.head}] = 1.0;
        else
            p.latents[{e.tail, e.head}] = {};
    }
    for (const auto& n : g.node_names()) p.err_var[n] = 1.0;
    return p;
}

inline CanonicalSem make_canonical(const Admg& g, const SemParams& p) {
    int n = g.num_nodes();
    Matrix coeffs = Matrix::Zero(n, n);
    Vector err_var(n);
    for (int i = 0; i < n; ++i) {
        auto it = p.err_var.find(g.name(i));
        if (it == p.err_var.end())
            throw Error(errc::precondition, "missing error variance for '" + g.name(i) + "'");
        err_var(i) = it->second;
    }
    std::vector<LatentSpec> latents;
    for (const auto& e : g.edges()) {
        if (e.kind == EdgeKind::Directed) {
            auto it = p.directed.find({e.tail, e.head});
            if (it == p.directed.end())
                throw Error(errc::precondition,
                            "missing coefficient for " + e.tail + " -> " + e.head);
            coeffs(g.index_of(e.head), g.index_of(e.tail)) = it->second;
        } else {
            auto it = p.latents.find({e.tail, e.head});
            if (it == p.latents.end())
                throw Error(errc::precondition,
                            "missing latent parameters for " + e.tail + " <-> " + e.head);
            LatentSpec l{};
            int a = g.index_of(e.tail), b = g.index_of(e.head);
            l.a = std::min(a, b);
            l.b = std::max(a, b);
            l.coef_a = a < b ? it->second.coef_tail : it->second.coef_head;
            l.coef_b = a < b ? it->second.coef_head : it->second.coef_tail;
            l.var = it->second.var;
            latents.push_back(l);
        }
    }
    return CanonicalSem::create(g, coeffs, err_var, std::move(latents), p.family);
}

}  // namespace civ

#endif  // CIV_SEM_HPP
