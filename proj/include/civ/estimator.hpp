#ifndef CIV_ESTIMATOR_HPP
#define CIV_ESTIMATOR_HPP

#include <string>
#include <vector>

#include <civ/error.hpp>
#include <civ/sem.hpp>

namespace civ {

struct EstimateReport {
    double estimate;
    double sample_strength;      // plug-in sigma_{xx.w} - sigma_{xx.zw}
    double sample_residual_var;  // plug-in sigma_{yy.w} of Y - estimate * X
    long n;
};

namespace detail {

inline Matrix centered_columns(const DataMatrix& data, const std::vector<int>& cols) {
    Matrix out(data.rows.rows(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        auto col = data.rows.col(cols[j]);
        out.col(j) = col.array() - col.mean();
    }
    return out;
}

inline void check_condition(const Matrix& m, const char* what) {
    Eigen::JacobiSVD<Matrix> svd(m);
    double hi = svd.singularValues()(0);
    double lo = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(hi > 0.0) || lo <= 1e-10 * hi)
        throw Error(errc::rank, std::string("weak or collinear design: ") + what);
}

// sigma_{aa.c} from an empirical covariance matrix; c indexes into cov.
inline double empirical_partial_var(const Matrix& cov, int a, const std::vector<int>& c) {
    if (c.empty()) return cov(a, a);
    Matrix cc(c.size(), c.size());
    Vector ca(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        ca(i) = cov(c[i], a);
        for (std::size_t j = 0; j < c.size(); ++j) cc(i, j) = cov(c[i], c[j]);
    }
    Eigen::LDLT<Matrix> ldlt(cc);
    if (ldlt.info() != Eigen::Success)
        throw Error(errc::singular, "plug-in conditioning block is singular");
    return cov(a, a) - ca.dot(ldlt.solve(ca));
}

}  // namespace detail

// Two-stage least squares estimate of the effect of x on y with instruments z
// given w, in the closed cross-moment form over mean-centered columns (the
// population model is mean zero; centering stands in for an intercept).
// The estimate is the first coordinate of the projected regression of y on
// (x, w) with instruments (z, w).
inline EstimateReport tsls(const DataMatrix& data, const std::string& x, const std::string& y,
                           const std::vector<std::string>& z, const std::vector<std::string>& w) {
    if (z.empty()) throw Error(errc::precondition, "instrumental set must be nonempty");
    long n = data.n();
    if (n <= static_cast<long>(z.size() + w.size()) + 1)
        throw Error(errc::precondition, "sample size too small for the tuple");

    std::vector<int> xw{data.index_of(x)}, zw;
    for (const auto& name : z) zw.push_back(data.index_of(name));
    for (const auto& name : w) {
        int id = data.index_of(name);
        xw.push_back(id);
        zw.push_back(id);
    }
    int yi = data.index_of(y);

    Matrix sm = detail::centered_columns(data, xw);
    Matrix tm = detail::centered_columns(data, zw);
    Vector yv = detail::centered_columns(data, {yi}).col(0);

    Eigen::JacobiSVD<Matrix> tsvd(tm, Eigen::ComputeThinU);
    {
        double hi = tsvd.singularValues()(0);
        double lo = tsvd.singularValues()(tsvd.singularValues().size() - 1);
        if (!(hi > 0.0) || lo <= 1e-10 * hi)
            throw Error(errc::rank, "weak or collinear design: instrument matrix");
    }
    Matrix u = tsvd.matrixU();
    Matrix g = u.transpose() * sm;  // |T| x |S|, the projected regressors
    detail::check_condition(g, "projected regressors");
    Vector h = u.transpose() * yv;

    Eigen::LLT<Matrix> llt(g.transpose() * g);
    if (llt.info() != Eigen::Success)
        throw Error(errc::rank, "weak or collinear design: projected cross-moments");
    Vector gamma = llt.solve(g.transpose() * h);

    EstimateReport r{};
    r.estimate = gamma(0);
    r.n = n;

    // Plug-in diagnostics from the empirical covariance of (x, y, z, w).
    std::vector<int> cols{data.index_of(x), yi};
    std::vector<int> zc, wc;
    for (const auto& name : z) {
        zc.push_back(static_cast<int>(cols.size()));
        cols.push_back(data.index_of(name));
    }
    for (const auto& name : w) {
        wc.push_back(static_cast<int>(cols.size()));
        cols.push_back(data.index_of(name));
    }
    Matrix cov = empirical_covariance(detail::centered_columns(data, cols));
    std::vector<int> zwc = zc;
    zwc.insert(zwc.end(), wc.begin(), wc.end());
    r.sample_strength = detail::empirical_partial_var(cov, 0, wc) -
                        detail::empirical_partial_var(cov, 0, zwc);
    double t = r.estimate;
    // var(Y - tX | W) assembled from the same covariance blocks
    Matrix tilde_cov = cov;
    for (int i = 0; i < cov.rows(); ++i) {
        tilde_cov(1, i) = cov(1, i) - t * cov(0, i);
        tilde_cov(i, 1) = tilde_cov(1, i);
    }
    tilde_cov(1, 1) = cov(1, 1) - 2.0 * t * cov(0, 1) + t * t * cov(0, 0);
    r.sample_residual_var = detail::empirical_partial_var(tilde_cov, 1, wc);
    return r;
}

// Least squares of y on (x, w) over centered columns; the estimate is x's
// coefficient. The report's strength field carries sigma_{xx.w} and the
// residual field sigma_{yy.xw}, the pieces of the matching asymptotic
// variance formula.
inline EstimateReport ols(const DataMatrix& data, const std::string& x, const std::string& y,
                          const std::vector<std::string>& w) {
    long n = data.n();
    if (n <= static_cast<long>(w.size()) + 1)
        throw Error(errc::precondition, "sample size too small for the design");

    std::vector<int> xw{data.index_of(x)};
    for (const auto& name : w) xw.push_back(data.index_of(name));
    Matrix dm = detail::centered_columns(data, xw);
    Vector yv = detail::centered_columns(data, {data.index_of(y)}).col(0);

    detail::check_condition(dm, "regressor matrix");
    Eigen::LLT<Matrix> llt(dm.transpose() * dm);
    if (llt.info() != Eigen::Success)
        throw Error(errc::rank, "weak or collinear design: regressor cross-moments");
    Vector beta = llt.solve(dm.transpose() * yv);

    EstimateReport r{};
    r.estimate = beta(0);
    r.n = n;

    std::vector<int> cols{data.index_of(x), data.index_of(y)};
    std::vector<int> wc;
    for (const auto& name : w) {
        wc.push_back(static_cast<int>(cols.size()));
        cols.push_back(data.index_of(name));
    }
    Matrix cov = empirical_covariance(detail::centered_columns(data, cols));
    r.sample_strength = detail::empirical_partial_var(cov, 0, wc);
    std::vector<int> xwc{0};
    xwc.insert(xwc.end(), wc.begin(), wc.end());
    r.sample_residual_var = detail::empirical_partial_var(cov, 1, xwc);
    return r;
}

}  // namespace civ

#endif  // CIV_ESTIMATOR_HPP
