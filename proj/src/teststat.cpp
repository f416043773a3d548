#include "fdstat/teststat.hpp"

#include <cmath>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace fdstat {

std::vector<int> TestConfig::resolved_lags() const
{
    std::vector<int> out = lags;
    if (out.empty())
        for (int m = 1; m <= M; ++m) out.push_back(m);
    return out;
}

void TestConfig::validate(long T) const
{
    require(M >= 1, ErrorKind::configuration, "M must be >= 1");
    const std::vector<int> hs = resolved_lags();
    require(static_cast<int>(hs.size()) == M, ErrorKind::configuration,
            "lag list length must equal M");
    for (std::size_t i = 0; i < hs.size(); ++i) {
        require(hs[i] >= 1 && hs[i] < T, ErrorKind::configuration,
                "lag " + std::to_string(hs[i]) + " outside [1, T-1]");
        if (i > 0) require(hs[i] > hs[i - 1], ErrorKind::configuration, "lags must increase");
    }
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::configuration, "alpha must lie in (0,1)");
    require(fixed_threshold > 0.0 && fixed_threshold <= 1.0, ErrorKind::configuration,
            "fixed-direction threshold must lie in (0,1]");
    if (L_override) require(*L_override >= 1, ErrorKind::configuration, "L override must be >= 1");
    tuning.validate();
}

cplx gamma_eigen(const FdftTable& table, const EigenSystem& eig, int h, int l, long* floor_hits)
{
    const long T = table.T();
    require(h >= 1 && h < T, ErrorKind::argument, "lag outside [1, T-1]");
    require(l >= 0 && l < eig.n_basis(), ErrorKind::argument, "component index out of range");
    cplx acc = 0.0;
    for (long j = 0; j < T; ++j) {
        const cplx d0 = eig.vec(j, l).dot(table.row(j).transpose());
        const cplx d1 = eig.vec(j + h, l).dot(table.row(j + h).transpose());
        const double norm = std::sqrt(floored_eigenvalue(eig, j, l, floor_hits) *
                                      floored_eigenvalue(eig, j + h, l, nullptr));
        acc += d0 * std::conj(d1) / norm;
    }
    return acc / static_cast<double>(T);
}

namespace {

double fixed_denominator(const SpectralEstimate& est, long j, int l)
{
    const CMat& F = est.at(j);
    const double top = F.diagonal().real().maxCoeff();
    require(top > 0.0, ErrorKind::degenerate_spectrum,
            "zero spectrum at frequency index " + std::to_string(wrap(j, est.T())));
    const double f = F(l, l).real();
    require(f >= 1e-12 * top, ErrorKind::unstable_normalization,
            "diagonal spectral entry below floor at frequency index " + std::to_string(wrap(j, est.T())));
    return f;
}

} // namespace

cplx gamma_fixed(const FdftTable& table, const SpectralEstimate& est, int h, int l, int lp)
{
    const long T = table.T();
    require(h >= 1 && h < T, ErrorKind::argument, "lag outside [1, T-1]");
    cplx acc = 0.0;
    for (long j = 0; j < T; ++j) {
        const double norm = std::sqrt(fixed_denominator(est, j, l) * fixed_denominator(est, j + h, lp));
        acc += table.at(j, l) * std::conj(table.at(j + h, lp)) / norm;
    }
    return acc / static_cast<double>(T);
}

GammaSet gammas_eigen(const FdftTable& table, const EigenSystem& eig, const std::vector<int>& lags,
                      int L, long* floor_hits)
{
    GammaSet g;
    g.variant = Variant::eigen;
    g.lags = lags;
    for (int h : lags) {
        CMat col(L, 1);
        for (int l = 0; l < L; ++l) col(l, 0) = gamma_eigen(table, eig, h, l, floor_hits);
        g.values.push_back(std::move(col));
    }
    return g;
}

GammaSet gammas_fixed(const FdftTable& table, const SpectralEstimate& est,
                      const std::vector<int>& lags, const std::vector<int>& directions)
{
    GammaSet g;
    g.variant = Variant::fixed;
    g.lags = lags;
    const int n = static_cast<int>(directions.size());
    for (int h : lags) {
        CMat m(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                m(a, b) = gamma_fixed(table, est, h, directions[a], directions[b]);
        g.values.push_back(std::move(m));
    }
    return g;
}

cplx beta_h(const GammaSet& gammas, int h)
{
    for (std::size_t i = 0; i < gammas.lags.size(); ++i)
        if (gammas.lags[i] == h) {
            const CMat& v = gammas.values[i];
            return gammas.variant == Variant::eigen ? v.col(0).sum() : v.sum();
        }
    fail(ErrorKind::argument, "lag " + std::to_string(h) + " not present in gamma set");
}

RVec build_bM(const std::vector<cplx>& betas)
{
    const Eigen::Index M = static_cast<Eigen::Index>(betas.size());
    RVec b(2 * M);
    for (Eigen::Index m = 0; m < M; ++m) {
        b[m] = betas[m].real();
        b[M + m] = betas[m].imag();
    }
    return b;
}

double quadratic_form(const RVec& bM, const RMat& sigma, long T)
{
    require(sigma.rows() == bM.size() && sigma.cols() == bM.size(), ErrorKind::argument,
            "Sigma and bM dimensions differ");
    const bool diagonal = (sigma - RMat(sigma.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    if (diagonal) {
        double q = 0.0;
        for (Eigen::Index k = 0; k < bM.size(); ++k) {
            require(sigma(k, k) > 0.0, ErrorKind::linear_algebra, "singular Sigma");
            q += bM[k] * bM[k] / sigma(k, k);
        }
        return static_cast<double>(T) * q;
    }
    Eigen::LDLT<RMat> ldlt(sigma);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                ldlt.vectorD().minCoeff() > 0.0,
            ErrorKind::linear_algebra, "Sigma is not positive definite");
    return static_cast<double>(T) * bM.dot(ldlt.solve(bM));
}

double quadratic_form(const RVec& bM, const SigmaMatrix& sigma, long T)
{
    return quadratic_form(bM, sigma.S, T);
}

double p_value(double Q, int df)
{
    require(df >= 1, ErrorKind::argument, "df must be >= 1");
    require(Q >= 0.0, ErrorKind::argument, "Q must be nonnegative");
    if (std::isinf(Q)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * Q);
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + ": " + e.what());
    }
}

} // namespace

TestResult run_test_from(const FdftTable& table, const SpectralEstimate& est,
                         const EigenSystem& eig, const TestConfig& config)
{
    const long T = table.T();
    config.validate(T);
    TestResult r;
    r.variant = config.variant;
    r.T = T;
    r.M = config.M;
    r.lags = config.resolved_lags();
    r.df = 2 * config.M;

    SigmaOptions sopts = config.sigma;
    sopts.threads = config.threads;
    SigmaMatrix sig;
    if (config.variant == Variant::eigen) {
        r.diagnostics.fast_decay =
            eig.n_basis() >= 4 && stage("tuning", [&] { return fast_decay_check(eig, config.tuning); });
        r.L = config.L_override ? std::min(*config.L_override, eig.n_basis())
                                : stage("tuning", [&] { return select_L(eig, config.M, config.tuning); });
        r.aTVE = stage("tuning", [&] { return atve(eig, r.L); });
        long hits = 0;
        const GammaSet g = stage("gamma", [&] { return gammas_eigen(table, eig, r.lags, r.L, &hits); });
        const long budget = static_cast<long>(config.sigma.floor_budget * T * r.L);
        if (hits > budget)
            fail(ErrorKind::unstable_normalization,
                 "gamma: " + std::to_string(hits) + " eigenvalues hit the floor");
        r.diagnostics.eigen_floor_hits = hits;
        for (int h : r.lags) r.betas.push_back(beta_h(g, h));
        sig = stage("sigma", [&] {
            return estimate_sigma_eigen(table, est, eig, r.lags, r.L, sopts);
        });
    } else {
        r.directions = stage("tuning", [&] {
            if (!config.L_override) return select_fixed_directions(est, config.fixed_threshold);
            std::vector<int> d = select_fixed_directions(est, 1.0);
            d.resize(std::min(*config.L_override, est.n_basis()));
            return d;
        });
        r.L = static_cast<int>(r.directions.size());
        r.aTVE = direction_energy_share(est, r.directions);
        const GammaSet g = stage("gamma", [&] { return gammas_fixed(table, est, r.lags, r.directions); });
        for (int h : r.lags) r.betas.push_back(beta_h(g, h));
        sig = stage("sigma", [&] {
            return estimate_sigma_fixed(table, est, r.directions, r.lags, sopts);
        });
    }

    const RVec bM = build_bM(r.betas);
    r.Q = stage("quadratic form", [&] { return quadratic_form(bM, sig, T); });
    r.p = p_value(r.Q, r.df);
    r.reject_05 = r.p < 0.05;
    r.reject_01 = r.p < 0.01;
    r.reject_alpha = r.p < config.alpha;
    for (int m = 0; m < sig.M; ++m) r.sigma.push_back(sig.diag(m));
    r.diagnostics.sigma_regularized = sig.regularized;
    r.diagnostics.fourth_clipped = sig.clipped;
    r.diagnostics.eigen_floor_hits += sig.floor_hits;
    r.diagnostics.sigma_second = sig.second;
    r.diagnostics.sigma_fourth = sig.fourth;
    return r;
}

TestResult run_test(const FunctionalSeries& series, const TestConfig& config)
{
    validate(series);
    const long T = series.T();
    config.validate(T);

    FunctionalSeries x = demean(series);
    // Q is scale free; rescaling only keeps explosive paths inside double range.
    const double peak = x.coeffs.cwiseAbs().maxCoeff();
    require(peak > 0.0, ErrorKind::degenerate_spectrum, "spectrum: series is identically zero after demeaning");
    x.coeffs /= peak;

    const FdftTable table = stage("fdft", [&] { return fdft_all(x, config.dft); });
    KernelSpec ks{config.b > 0.0 ? config.b : default_bandwidth(T)};
    const SpectralEstimate est =
        stage("spectrum", [&] { return estimate_spectral_density(table, ks, config.threads); });
    const EigenSystem eig = stage("eigen", [&] { return eigendecompose(est, config.threads); });
    return run_test_from(table, est, eig, config);
}

} // namespace fdstat
