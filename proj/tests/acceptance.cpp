// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Optional arguments restrict the run to the listed criterion numbers.
//
// Monte Carlo cells use every core. Expected single-core runtime is about an hour,
// dominated by criterion 4 (T=512, M=5, R=500).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fdstat/dgp.hpp"
#include "fdstat/mcharness.hpp"
#include "fdstat/teststat.hpp"
#include "oracles.hpp"

using namespace fdstat;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what)
    {
        pass = pass && ok;
        detail << "\n    [" << (ok ? "ok  " : "FAIL") << "] " << what;
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Cells are cached so criteria sharing a configuration reuse one run.
class Cells {
public:
    const CellSummary& get(Model m, long T, int M, int R)
    {
        const auto key = std::make_tuple(static_cast<int>(m), T, M, R);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        ExperimentSpec s;
        s.models = {m};
        s.Ts = {T};
        s.Ms = {M};
        s.R = R;
        s.seed = kSeed;
        s.threads = 0;
        const auto t0 = std::chrono::steady_clock::now();
        CellSummary c = run_cell(s, m, T, Variant::eigen, M);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(stderr, "  cell %s R=%d: %.0f s\n", c.cell_name().c_str(), R, secs);
        return cache_.emplace(key, std::move(c)).first->second;
    }

private:
    std::map<std::tuple<int, long, int, int>, CellSummary> cache_;
};

Cells cells;

Outcome null_size()
{
    // Reference 5% rejection rates, eigen statistic, M = 1; R = 200 band is +-3.5 points.
    const std::vector<std::tuple<Model, long, double>> reference = {
        {Model::a, 128, 5.20}, {Model::a, 256, 5.40}, {Model::a, 512, 5.50},
        {Model::b, 128, 5.20}, {Model::b, 256, 5.70}, {Model::b, 512, 6.10},
        {Model::c, 128, 5.80}, {Model::c, 256, 4.50}, {Model::c, 512, 5.40},
    };
    Outcome o;
    for (const auto& [m, T, ref] : reference) {
        const CellSummary& c = cells.get(m, T, 1, 200);
        o.check(std::abs(c.rej05 - ref) <= 3.5,
                "(" + to_string(m) + ") T=" + std::to_string(T) +
                    fmt(": rej05 %.2f vs reference %.2f +- 3.5 (median Q %.2f)", c.rej05, ref, c.median_Q));
    }
    return o;
}

Outcome power()
{
    Outcome o;
    for (Model m : {Model::d, Model::f})
        for (long T : {256L, 512L}) {
            const CellSummary& c = cells.get(m, T, 1, 200);
            o.check(c.rej05 >= 99.0,
                    "(" + to_string(m) + ") T=" + std::to_string(T) + fmt(": rej05 %.2f >= 99", c.rej05));
        }
    const CellSummary& e = cells.get(Model::e, 256, 1, 200);
    o.check(e.rej05 >= 40.0 && e.rej05 <= 60.0,
            fmt("(e) T=256: rej05 %.2f in [40, 60] (reference 49.50)", e.rej05));
    return o;
}

Outcome tuning()
{
    Outcome o;
    const CellSummary& a = cells.get(Model::a, 512, 1, 200);
    o.check(std::abs(a.avg_L - 11.0) <= 1.0, fmt("(a) T=512: average L %.2f vs 11.00 +- 1.0", a.avg_L));
    o.check(std::abs(a.aTVE - 0.89) <= 0.03, fmt("(a) T=512: aTVE %.3f vs 0.89 +- 0.03", a.aTVE));
    const CellSummary& e = cells.get(Model::e, 512, 1, 200);
    o.check(std::abs(e.avg_L - 6.65) <= 1.5, fmt("(e) T=512: average L %.2f vs 6.65 +- 1.5", e.avg_L));
    return o;
}

Outcome distribution()
{
    Outcome o;
    const CellSummary& c = cells.get(Model::a, 512, 5, 500);
    const double ks = ks_distance(c.Q, 10);
    o.check(ks < 0.08, fmt("(a) T=512 M=5 R=500: KS to chi2_10 %.4f < 0.08", ks));
    o.check(c.mean_Q >= 8.5 && c.mean_Q <= 11.5, fmt("mean Q %.3f in [8.5, 11.5]", c.mean_Q));
    return o;
}

Outcome robustness()
{
    Outcome o;
    const CellSummary& g = cells.get(Model::g, 128, 1, 200);
    o.check(std::abs(g.rej05 - 4.90) <= 2.5, fmt("(g) t19 T=128: rej05 %.2f vs 4.90 +- 2.5", g.rej05));
    const CellSummary& h = cells.get(Model::h, 128, 1, 200);
    o.check(h.rej05 >= 99.0, fmt("(h) t10 T=128: rej05 %.2f >= 99 (reference 100.00)", h.rej05));
    return o;
}

struct Stage {
    FdftTable table;
    SpectralEstimate est;
    EigenSystem eig;
};

Stage stage_of(const RMat& x)
{
    Stage s;
    s.table = fdft_all(make_series(x));
    s.est = estimate_spectral_density(s.table, {default_bandwidth(x.rows())});
    s.eig = eigendecompose(s.est);
    return s;
}

RMat path(Model m, long T, std::uint64_t seed, int L = kDefaultBasisSize)
{
    DgpSpec d;
    d.model = m;
    d.T = T;
    d.seed = seed;
    d.L_max = L;
    return simulate(d).coeffs;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Outcome properties()
{
    Outcome o;

    {
        double worst = 0.0, parseval = 0.0;
        for (long T : {37L, 64L, 256L}) {
            const RMat x = path(Model::c, T, 5);
            const FdftTable d = fdft_all(make_series(x));
            worst = std::max(worst, (inverse_fdft(d).coeffs - x).cwiseAbs().maxCoeff());
            parseval = std::max(parseval, rel(kTwoPi * d.scores.squaredNorm(), x.squaredNorm()));
        }
        o.check(worst <= 1e-10, fmt("fDFT round trip max error %.2e <= 1e-10", worst));
        o.check(parseval <= 1e-8, fmt("Parseval relative error %.2e <= 1e-8", parseval));
    }

    {
        const Stage s = stage_of(path(Model::d, 128, 6));
        double herm = 0.0, neg = 0.0;
        for (const CMat& f : s.est.fhat) {
            herm = std::max(herm, (f - f.adjoint()).norm());
            const double low = Eigen::SelfAdjointEigenSolver<CMat>(f).eigenvalues().minCoeff();
            neg = std::max(neg, -low / f.trace().real());
        }
        o.check(herm < 1e-12, fmt("F Hermitian deviation %.2e < 1e-12", herm));
        o.check(neg <= 1e-10, fmt("F smallest eigenvalue / trace %.2e >= -1e-10", -neg));
    }

    {
        // Rotation: per-component phases times a linear phase shared by all
        // components, the class under which the identifying phase is arbitrary.
        const Stage s = stage_of(path(Model::b, 128, 3));
        TestConfig c;
        c.M = 3;
        const double base = run_test_from(s.table, s.est, s.eig, c).Q;
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0.0, kTwoPi);
        std::uniform_int_distribution<int> k(-5, 5);
        double comp = 0.0, iid = 0.0;
        for (int rep = 0; rep < 10; ++rep) {
            EigenSystem e = s.eig, f = s.eig;
            const int kk = k(rng);
            for (int l = 0; l < e.n_basis(); ++l) {
                const double theta = u(rng);
                for (long j = 0; j < s.table.T(); ++j) {
                    e.vectors[j].col(l) *= std::polar(1.0, theta + kTwoPi * kk * j / s.table.T());
                    f.vectors[j].col(l) *= std::polar(1.0, u(rng));
                }
            }
            comp = std::max(comp, rel(run_test_from(s.table, s.est, e, c).Q, base));
            iid = std::max(iid, rel(run_test_from(s.table, s.est, f, c).Q, base));
        }
        o.check(comp <= 1e-8, fmt("Q rotation, per-component phases: relative change %.2e <= 1e-8", comp));
        o.check(iid <= 1e-8, fmt("Q rotation, independent phase per frequency and component: "
                                 "relative change %.2e <= 1e-8",
                                 iid));
    }

    {
        double worst = 0.0;
        const RMat x = path(Model::e, 128, 8);
        for (Variant v : {Variant::eigen, Variant::fixed}) {
            TestConfig c;
            c.variant = v;
            c.M = 2;
            const double q = run_test(make_series(x), c).Q;
            for (double k : {0.1, 3.0, 100.0}) worst = std::max(worst, rel(run_test(make_series(k * x), c).Q, q));
        }
        o.check(worst <= 1e-8, fmt("Q scale invariance, c in {0.1, 3, 100}: relative change %.2e <= 1e-8", worst));
    }

    {
        const long T = 16;
        long mismatches = 0;
        for (int guard : {0, 2})
            for (long a = 0; a < T; ++a)
                for (long b = 0; b < T; ++b)
                    for (long c = 0; c < T; ++c)
                        for (long d = 0; d < T; ++d)
                            mismatches += phi_indicator({a, b, c, d}, T, guard) != oracle::phi({a, b, c, d}, T, guard);
        o.check(mismatches == 0, "manifold indicator vs subset-sum oracle, all T=16 quadruples: " +
                                     std::to_string(mismatches) + " mismatches");
    }

    {
        const long T = 64;
        const RMat x = path(Model::b, T, 9, 4);
        const Stage s = stage_of(x);
        const CMat d = oracle::fdft(x);
        const std::vector<CMat> F = oracle::spectral(d, default_bandwidth(T));
        const oracle::Eig oe = oracle::eig(F);
        double f_err = 0.0, g_err = 0.0, t_err = 0.0;
        for (long j = 0; j < T; ++j) f_err = std::max(f_err, (s.est.fhat[j] - F[j]).cwiseAbs().maxCoeff());
        for (int h : {1, 3})
            for (int l = 0; l < 4; ++l) {
                g_err = std::max(g_err, std::abs(gamma_eigen(s.table, s.eig, h, l) - oracle::gamma_eigen(d, oe, h, l)));
                for (int lp = 0; lp < 4; ++lp)
                    g_err = std::max(g_err, std::abs(gamma_fixed(s.table, s.est, h, l, lp) -
                                                     oracle::gamma_fixed(d, F, h, l, lp)));
            }
        const double b4 = default_b4(T);
        const Components comps{0, 2, 1, 0};
        for (const Quad& tg : std::vector<Quad>{{3, 5, 7, 49}, {10, -4, 20, -26}}) {
            const std::vector<long> t(tg.begin(), tg.end());
            auto fixed = [&](int i, long k) { return d(k, comps[i]); };
            auto eigen = [&](int i, long k) {
                const CVec phi = oe.vectors[oracle::mod(t[i], T)].col(comps[i]);
                cplx acc = 0.0;
                for (int l = 0; l < 4; ++l) acc += std::conj(phi[l]) * d(k, l);
                return acc;
            };
            const cplx rf = oracle::smoothed_tri(T, b4, t, fixed, 2);
            const cplx re = oracle::smoothed_tri(T, b4, t, eigen, 2);
            t_err = std::max(t_err, std::abs(smoothed_tri_spectrum(s.table, s.eig, tg, b4, comps, Variant::fixed, 2) - rf) /
                                        std::max(1.0, std::abs(rf)));
            t_err = std::max(t_err, std::abs(smoothed_tri_spectrum(s.table, s.eig, tg, b4, comps, Variant::eigen, 2) - re) /
                                        std::max(1.0, std::abs(re)));
        }
        o.check(f_err <= 1e-10, fmt("F vs naive estimator, T=64: %.2e <= 1e-10", f_err));
        o.check(g_err <= 1e-10, fmt("gamma vs naive sums, T=64: %.2e <= 1e-10", g_err));
        o.check(t_err <= 1e-10, fmt("smoothed tri-spectrum vs triple loop, T=64: %.2e <= 1e-10", t_err));
    }

    {
        // L = 1 on Gaussian white noise: mean diagonal of Sigma against the band
        // around 1/2; the empirical variance of sqrt(T) Re beta is shown beside it.
        const long T = 256;
        const int R = 200;
        double sigma = 0.0, var_re = 0.0;
        for (int r = 0; r < R; ++r) {
            DgpSpec d;
            d.model = Model::a;
            d.T = T;
            d.seed = replication_seed(kSeed, Model::a, T, r);
            TestConfig c;
            c.M = 1;
            c.L_override = 1;
            const TestResult t = run_test(simulate(d), c);
            sigma += t.sigma[0] / R;
            var_re += T * std::pow(t.betas[0].real(), 2) / R;
        }
        o.check(sigma >= 0.35 && sigma <= 0.65,
                fmt("white noise L=1 T=256 R=200: mean sigma^2 %.3f in [0.35, 0.65] "
                    "(empirical Var(sqrt(T) Re beta) %.3f)",
                    sigma, var_re));
    }
    return o;
}

Outcome exclusions()
{
    Outcome o;
    ExperimentSpec s;
    s.Ts = {1024};
    bool refused = false;
    try {
        s.validate();
    } catch (const Error&) {
        refused = true;
    }
    o.check(refused, "T=1024 grids refused unless allow_T1024 is set");
    o.detail << "\n    excluded by design: full T=1024 tables, third-decimal agreement with "
                "1000-replication reference values, asymptotic rate claims";
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"null size (a)-(c), eigen, M=1, R=200", null_size},
        {"power (d), (f), (e)", power},
        {"tuning L and aTVE", tuning},
        {"distributional fit, M=5", distribution},
        {"non-Gaussian innovations (g), (h)", robustness},
        {"property suite", properties},
        {"exclusions", exclusions},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, std::string("error: ") + e.what());
        }
        all = all && o.pass;
        std::printf("criterion %d: %s  %s%s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
