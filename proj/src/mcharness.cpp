#include "fdstat/mcharness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "fdstat/parallel.hpp"

namespace fdstat {

void ExperimentSpec::validate() const
{
    require(R >= 1, ErrorKind::configuration, "R must be >= 1");
    require(!models.empty() && !Ts.empty() && !variants.empty() && !Ms.empty(),
            ErrorKind::configuration, "experiment grid has an empty axis");
    for (long T : Ts) {
        require(T >= 8, ErrorKind::configuration, "T must be >= 8");
        require(T < 1024 || allow_T1024, ErrorKind::configuration,
                "T >= 1024 is opt-in (allow_T1024)");
    }
    for (int M : Ms) require(M >= 1, ErrorKind::configuration, "M must be >= 1");
    require(failure_budget >= 0.0 && failure_budget < 1.0, ErrorKind::configuration,
            "failure budget must lie in [0,1)");
}

std::string CellSummary::cell_name() const
{
    return to_string(model) + "_T" + std::to_string(T) + "_" + to_string(variant) + "_M" +
           std::to_string(M);
}

std::uint64_t replication_seed(std::uint64_t master, Model model, long T, int r)
{
    std::uint64_t s = mix_seed(master, static_cast<std::uint64_t>(model));
    s = mix_seed(s, static_cast<std::uint64_t>(T));
    return mix_seed(s, static_cast<std::uint64_t>(r));
}

namespace {

DgpSpec dgp_for(const ExperimentSpec& spec, Model model, long T, int r)
{
    DgpSpec d;
    d.model = model;
    d.T = T;
    d.L_max = spec.L_max;
    d.law = spec.law;
    d.df = spec.df;
    d.burn_in = spec.burn_in;
    d.seed = replication_seed(spec.seed, model, T, r);
    return d;
}

double median(std::vector<double> v)
{
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct RepOutcome {
    bool ok = false;
    TestResult result;
    std::string error;
};

} // namespace

CellSummary run_cell(const ExperimentSpec& spec, Model model, long T, Variant variant, int M)
{
    spec.validate();
    TestConfig cfg = spec.test;
    cfg.variant = variant;
    cfg.M = M;
    cfg.lags.clear();
    cfg.threads = 1;

    std::vector<RepOutcome> out(spec.R);
    parallel_for(spec.R, spec.threads, [&](long r) {
        try {
            const FunctionalSeries x = simulate(dgp_for(spec, model, T, static_cast<int>(r)));
            out[r].result = run_test(x, cfg);
            out[r].ok = true;
        } catch (const Error& e) {
            out[r].error = "replication " + std::to_string(r) + ": " + e.what();
        }
    });

    CellSummary c;
    c.model = model;
    c.T = T;
    c.variant = variant;
    c.M = M;
    c.R = spec.R;
    long n05 = 0, n01 = 0;
    double sumL = 0.0, sumA = 0.0;
    for (const RepOutcome& o : out) {
        if (!o.ok) {
            ++c.failures;
            c.failure_messages.push_back(o.error);
            continue;
        }
        c.Q.push_back(o.result.Q);
        c.L.push_back(o.result.L);
        n05 += o.result.reject_05;
        n01 += o.result.reject_01;
        sumL += o.result.L;
        sumA += o.result.aTVE;
    }
    const long budget = static_cast<long>(std::floor(spec.failure_budget * spec.R));
    if (c.failures > budget)
        fail(ErrorKind::estimation, "cell " + c.cell_name() + ": " + std::to_string(c.failures) +
                                        " failed replications exceed the budget of " +
                                        std::to_string(budget) + "; first: " + c.failure_messages.front());
    const double n = static_cast<double>(c.Q.size());
    c.median_Q = median(c.Q);
    c.mean_Q = std::accumulate(c.Q.begin(), c.Q.end(), 0.0) / n;
    c.rej05 = 100.0 * n05 / n;
    c.rej01 = 100.0 * n01 / n;
    c.avg_L = sumL / n;
    c.aTVE = sumA / n;
    if (!spec.keep_values) {
        c.Q.clear();
        c.L.clear();
    }
    return c;
}

SummaryTable run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    SummaryTable t;
    for (Model m : spec.models)
        for (long T : spec.Ts)
            for (Variant v : spec.variants)
                for (int M : spec.Ms) t.cells.push_back(run_cell(spec, m, T, v, M));
    return t;
}

double chi2_density(double x, int df)
{
    if (x < 0.0) return 0.0;
    boost::math::chi_squared dist(df);
    if (x == 0.0) return df == 2 ? 0.5 : (df < 2 ? INFINITY : 0.0);
    return boost::math::pdf(dist, x);
}

std::vector<DensityRow> empirical_density(std::vector<double> values, int df, int bins, double trim)
{
    require(values.size() >= 1, ErrorKind::argument, "no values");
    require(trim >= 0.0 && trim < 0.5, ErrorKind::argument, "trim must lie in [0, 0.5)");
    std::sort(values.begin(), values.end());
    values.resize(values.size() - static_cast<std::size_t>(std::floor(trim * values.size())));
    if (bins <= 0) bins = 200;

    boost::math::chi_squared dist(df);
    const double upper = std::max(values.back(), boost::math::quantile(boost::math::complement(dist, 1e-7)));
    const double w = upper / bins;
    std::vector<DensityRow> rows(bins);
    std::vector<double> counts(bins, 0.0);
    for (double v : values) {
        long b = static_cast<long>(std::floor(std::max(v, 0.0) / w));
        counts[std::clamp<long>(b, 0, bins - 1)] += 1.0;
    }
    for (int b = 0; b < bins; ++b) {
        rows[b].x = (b + 0.5) * w;
        rows[b].empirical = counts[b] / (values.size() * w);
        rows[b].chi2 = chi2_density(rows[b].x, df);
    }
    return rows;
}

double ks_distance(std::vector<double> values, int df)
{
    require(!values.empty(), ErrorKind::argument, "no values");
    std::sort(values.begin(), values.end());
    boost::math::chi_squared dist(df);
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double F = boost::math::cdf(dist, std::max(values[i], 0.0));
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

namespace {

// Tensor-basis coefficient matrix of the lag-1 surface for one series.
CMat surface_coefficients(const FunctionalSeries& series, Variant variant, const TestConfig& cfg)
{
    FunctionalSeries x = demean(series);
    const double peak = x.coeffs.cwiseAbs().maxCoeff();
    require(peak > 0.0, ErrorKind::degenerate_spectrum, "series is identically zero");
    x.coeffs /= peak;
    const long T = x.T();
    const int n = x.n_basis();
    const FdftTable table = fdft_all(x, cfg.dft);
    const SpectralEstimate est =
        estimate_spectral_density(table, {cfg.b > 0.0 ? cfg.b : default_bandwidth(T)});
    CMat coef = CMat::Zero(n, n);
    if (variant == Variant::fixed) {
        for (int l = 0; l < n; ++l)
            for (int lp = 0; lp < n; ++lp) coef(l, lp) = gamma_fixed(table, est, 1, l, lp);
        return coef;
    }
    const EigenSystem eig = eigendecompose(est);
    const int L = cfg.L_override ? std::min(*cfg.L_override, n) : select_L(eig, 1, cfg.tuning);
    for (int l = 0; l < L; ++l) {
        CVec u = CVec::Zero(n);
        for (long j = 0; j < T; ++j) u += eig.vec(j, l);
        u /= static_cast<double>(T);
        coef += gamma_eigen(table, eig, 1, l) * (u * u.adjoint());
    }
    return coef;
}

ContourGrid accumulate_surfaces(const std::vector<CMat>& coefs, int n, int G)
{
    RVec grid = uniform_grid(G);
    CMat Psi(G, n);
    for (int g = 0; g < G; ++g)
        for (int l = 0; l < n; ++l) Psi(g, l) = fourier_basis_eval(l + 1, grid[g]);
    ContourGrid out;
    out.G = G;
    out.values = RMat::Zero(G, G);
    for (const CMat& c : coefs) {
        const CMat S = Psi * c * Psi.transpose();
        out.values += S.cwiseAbs2();
    }
    if (!coefs.empty()) out.values /= static_cast<double>(coefs.size());
    return out;
}

} // namespace

ContourGrid contour_from_series(const std::vector<FunctionalSeries>& series, Variant variant,
                                const TestConfig& cfg, int G, int threads)
{
    require(!series.empty(), ErrorKind::argument, "no series for the contour");
    const int n = series.front().n_basis();
    std::vector<CMat> coefs(series.size(), CMat::Zero(n, n));
    parallel_for(static_cast<long>(series.size()), threads, [&](long i) {
        try {
            coefs[i] = surface_coefficients(series[i], variant, cfg);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::degenerate_spectrum) throw;
        }
    });
    return accumulate_surfaces(coefs, n, G);
}

ContourGrid contour_gamma(const ExperimentSpec& spec, Model model, long T, Variant variant, int G)
{
    spec.validate();
    require(spec.R >= 10, ErrorKind::configuration, "contour needs R >= 10");
    std::vector<FunctionalSeries> series(spec.R);
    parallel_for(spec.R, spec.threads,
                 [&](long r) { series[r] = simulate(dgp_for(spec, model, T, static_cast<int>(r))); });
    return contour_from_series(series, variant, spec.test, G, spec.threads);
}

namespace {

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path);
    require(f.good(), ErrorKind::input, "cannot open " + path + " for writing");
    return f;
}

} // namespace

void write_summary_csv(const SummaryTable& table, std::ostream& f)
{
    f.precision(10);
    f << "model,T,variant,M,median_Q,rej05,rej01,avg_L,aTVE\n";
    for (const CellSummary& c : table.cells)
        f << to_string(c.model) << ',' << c.T << ',' << to_string(c.variant) << ',' << c.M << ','
          << c.median_Q << ',' << c.rej05 << ',' << c.rej01 << ',' << c.avg_L << ',' << c.aTVE << '\n';
}

void write_density_csv(const std::vector<DensityRow>& rows, std::ostream& f)
{
    f.precision(10);
    f << "x,empirical,chi2\n";
    for (const DensityRow& r : rows) f << r.x << ',' << r.empirical << ',' << r.chi2 << '\n';
}

void write_contour_csv(const ContourGrid& grid, std::ostream& f)
{
    f.precision(10);
    const RVec g = uniform_grid(grid.G);
    f << "tau,tau_prime,value\n";
    for (int a = 0; a < grid.G; ++a)
        for (int b = 0; b < grid.G; ++b) f << g[a] << ',' << g[b] << ',' << grid.values(a, b) << '\n';
}

void write_summary_csv(const SummaryTable& table, const std::string& path)
{
    std::ofstream f = open_out(path);
    write_summary_csv(table, f);
}

void write_density_csv(const std::vector<DensityRow>& rows, const std::string& path)
{
    std::ofstream f = open_out(path);
    write_density_csv(rows, f);
}

void write_contour_csv(const ContourGrid& grid, const std::string& path)
{
    std::ofstream f = open_out(path);
    write_contour_csv(grid, f);
}

} // namespace fdstat
