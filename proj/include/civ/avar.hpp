#ifndef CIV_AVAR_HPP
#define CIV_AVAR_HPP

#include <cmath>
#include <string>
#include <vector>

#include <civ/error.hpp>
#include <civ/sem.hpp>

namespace civ {

// Asymptotic-variance arithmetic for the two-stage least squares estimator,
// all in terms of a covariance model. tau is supplied by the caller (from
// total_effect or an estimate), so the module works from covariances alone.

// Residual variance sigma_{yy.w} of the oracle variable Y - tau X given W;
// the numerator of the decomposed formula. Depends on the tuple only via W.
inline double residual_variance(const CovModel& cov, double tau, const std::string& x,
                                const std::string& y, const std::vector<std::string>& w) {
    int xi = cov.index_of(x), yi = cov.index_of(y);
    auto wi = cov.indices_of(w);
    const Matrix& s = cov.sigma();
    double var_tilde = s(yi, yi) - 2.0 * tau * s(yi, xi) + tau * tau * s(xi, xi);
    if (wi.empty()) return var_tilde;
    Matrix yw = cov.block({yi}, wi) - tau * cov.block({xi}, wi);
    Matrix ww = cov.block(wi, wi);
    Matrix corr = yw * detail::spd_solve(ww, yw.transpose(), "conditioning block is singular");
    return var_tilde - corr(0, 0);
}

// Conditional instrumental strength sigma_{xx.w} - sigma_{xx.zw}: the
// information on X carried by Z beyond W. Non-negative; zero exactly when
// Sigma_{xz.w} vanishes.
inline double instrument_strength(const CovModel& cov, const std::string& x,
                                  const std::vector<std::string>& z,
                                  const std::vector<std::string>& w) {
    if (z.empty()) return 0.0;
    Matrix xz = conditional_cov(cov, {x}, z, w);
    Matrix zz = conditional_cov(cov, z, z, w);
    Matrix q = xz * detail::spd_solve(zz, xz.transpose(), "instrument block is singular");
    return std::max(q(0, 0), 0.0);
}

// Decomposed asymptotic variance: residual variance over instrumental
// strength. Valid tuples only; the caller checks validity against the graph.
// Strength below weak_tol (measured relative to sigma_{xx.w}) is rejected as
// a weak or invalid instrument, where the formula has no standard meaning.
inline double avar_new_formula(const CovModel& cov, double tau, const std::string& x,
                               const std::string& y, const std::vector<std::string>& z,
                               const std::vector<std::string>& w, double weak_tol = 1e-12) {
    double strength = instrument_strength(cov, x, z, w);
    double scale = conditional_cov(cov, {x}, {x}, w)(0, 0);
    if (strength <= weak_tol * scale)
        throw Error(errc::weak_instrument, "conditional instrumental strength is degenerate");
    return residual_variance(cov, tau, x, y, w) / strength;
}

// Sandwich form: (eta_{ys.t} (Sigma_st Sigma_tt^{-1} Sigma_st^T)^{-1})_{11}
// with S = (X, W), T = (Z, W) and eta the residual variance of the population
// two-stage least squares regression. Agrees with the decomposed formula on
// valid tuples; no such guarantee otherwise.
inline double avar_traditional(const CovModel& cov, const std::string& x, const std::string& y,
                               const std::vector<std::string>& z,
                               const std::vector<std::string>& w) {
    std::vector<std::string> s{x};
    s.insert(s.end(), w.begin(), w.end());
    std::vector<std::string> t(z);
    t.insert(t.end(), w.begin(), w.end());
    auto si = cov.indices_of(s), ti = cov.indices_of(t);
    int yi = cov.index_of(y);

    Matrix st = cov.block(si, ti);
    Matrix tt = cov.block(ti, ti);
    Matrix ts = cov.block(ti, si);
    Matrix k = detail::spd_solve(tt, ts, "instrument cross-moment block is singular");
    Matrix m = st * k;  // Sigma_st Sigma_tt^{-1} Sigma_st^T, symmetric PSD

    Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
    if (llt.info() != Eigen::Success)
        throw Error(errc::rank, "projected design is rank deficient (weak or invalid instrument)");

    Matrix yt = cov.block({yi}, ti);
    Matrix gamma_t = llt.solve((yt * k).transpose());  // |s| x 1
    Matrix sy = cov.block(si, {yi});
    Matrix ss = cov.block(si, si);
    double eta = cov.sigma()(yi, yi) - 2.0 * (gamma_t.transpose() * sy)(0, 0) +
                 (gamma_t.transpose() * ss * gamma_t)(0, 0);

    Vector e1 = Vector::Zero(static_cast<int>(si.size()));
    e1(0) = 1.0;
    double minv_11 = llt.solve(e1)(0);
    return eta * minv_11;
}

// Ordinary least squares benchmark: sigma_{yy.xw} / sigma_{xx.w}. When W is a
// valid adjustment set this never exceeds the two-stage least squares
// asymptotic variance of any valid (Z, W).
inline double avar_ols(const CovModel& cov, const std::string& x, const std::string& y,
                       const std::vector<std::string>& w) {
    std::vector<std::string> xw{x};
    xw.insert(xw.end(), w.begin(), w.end());
    double num = conditional_cov(cov, {y}, {y}, xw)(0, 0);
    double den = conditional_cov(cov, {x}, {x}, w)(0, 0);
    if (den <= 0.0) throw Error(errc::singular, "regressor has no residual variance");
    return num / den;
}

}  // namespace civ

#endif  // CIV_AVAR_HPP
