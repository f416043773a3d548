#include <gtest/gtest.h>

#include <random>

#include "fdstat/dgp.hpp"
#include "fdstat/teststat.hpp"
#include "oracles.hpp"

using namespace fdstat;

namespace {

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

FunctionalSeries model_path(Model m, long T, std::uint64_t seed)
{
    DgpSpec s;
    s.model = m;
    s.T = T;
    s.seed = seed;
    return simulate(s);
}

} // namespace

TEST(Gamma, EigenMatchesIndependentPath)
{
    const long T = 32;
    const RMat x = oracle::white_noise(T, 6, 3);
    const Stage s = stage_of(x);
    const CMat d = oracle::fdft(x);
    const oracle::Eig oe = oracle::eig(oracle::spectral(d, default_bandwidth(T)));
    for (int h : {1, 2, 5})
        for (int l = 0; l < 6; ++l) {
            const cplx ref = oracle::gamma_eigen(d, oe, h, l);
            EXPECT_LT(std::abs(gamma_eigen(s.table, s.eig, h, l) - ref), 1e-10) << h << ' ' << l;
        }
}

TEST(Gamma, FixedMatchesDoubleLoop)
{
    const long T = 32;
    const RMat x = oracle::white_noise(T, 5, 4);
    const Stage s = stage_of(x);
    const CMat d = oracle::fdft(x);
    const auto F = oracle::spectral(d, default_bandwidth(T));
    for (int h : {1, 3})
        for (int l = 0; l < 5; ++l)
            for (int lp = 0; lp < 5; ++lp)
                EXPECT_LT(std::abs(gamma_fixed(s.table, s.est, h, l, lp) - oracle::gamma_fixed(d, F, h, l, lp)), 1e-12);
}

TEST(Gamma, ZeroScoresGiveZero)
{
    const long T = 32;
    Stage s = stage_of(oracle::white_noise(T, 4, 5));
    for (long j = 0; j < T; j += 2) s.table.scores.row(j).setZero();
    EXPECT_EQ(gamma_fixed(s.table, s.est, 1, 1, 1), cplx(0.0));
}

TEST(Gamma, TimeReversal)
{
    // Reversing time conjugates the scores up to a phase, which flips the lag.
    const long T = 32;
    const RMat x = oracle::white_noise(T, 4, 6);
    const RMat xr = x.colwise().reverse();
    const Stage a = stage_of(x), b = stage_of(xr);
    for (int h : {1, 2})
        for (int l = 0; l < 4; ++l) {
            const cplx g = gamma_fixed(a.table, a.est, h, l, l);
            const cplx gr = gamma_fixed(b.table, b.est, h, l, l);
            const cplx phase = std::polar(1.0, -kTwoPi * h / T);
            EXPECT_LT(std::abs(gr - std::conj(g) * phase), 1e-12);
        }
}

TEST(Beta, Aggregation)
{
    GammaSet e{Variant::eigen, {1}, {CMat::Constant(3, 1, cplx(1, 2))}};
    EXPECT_EQ(beta_h(e, 1), cplx(3, 6));
    GammaSet f{Variant::fixed, {2}, {CMat::Constant(3, 3, cplx(1, -1))}};
    EXPECT_EQ(beta_h(f, 2), cplx(9, -9));
    GammaSet one{Variant::eigen, {1}, {CMat::Constant(1, 1, cplx(0.3, 0.1))}};
    EXPECT_EQ(beta_h(one, 1), cplx(0.3, 0.1));
    EXPECT_THROW(beta_h(one, 2), Error);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    CMat g(4, 4);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) g(a, b) = cplx(z(rng), z(rng));
    cplx ref = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) ref += g(a, b);
    EXPECT_LT(std::abs(beta_h(GammaSet{Variant::fixed, {1}, {g}}, 1) - ref), 1e-14);
}

TEST(BuildBM, Layout)
{
    const RVec b = build_bM({cplx(3, 4)});
    EXPECT_EQ(b[0], 3.0);
    EXPECT_EQ(b[1], 4.0);
    const RVec r = build_bM({1.0, 2.0, 3.0});
    EXPECT_EQ(r.tail(3).cwiseAbs().maxCoeff(), 0.0);
    const RVec c = build_bM({cplx(1, -1), cplx(2, 5)});
    EXPECT_EQ(cplx(c[1], c[3]), cplx(2, 5));
}

TEST(QuadraticForm, Values)
{
    EXPECT_EQ(quadratic_form(RVec::Zero(4), RMat::Identity(4, 4), 50), 0.0);
    RVec e = RVec::Zero(2);
    e[0] = 1.0;
    EXPECT_DOUBLE_EQ(quadratic_form(e, RMat::Identity(2, 2), 100), 100.0);

    std::mt19937_64 rng(9);
    std::normal_distribution<double> z;
    RMat A(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 6; ++k) A(i, k) = z(rng);
    const RMat S = A * A.transpose() + RMat::Identity(6, 6);
    RVec b(6);
    for (int i = 0; i < 6; ++i) b[i] = z(rng);
    const double ref = 77.0 * b.dot(S.fullPivLu().solve(b));
    EXPECT_NEAR(quadratic_form(b, S, 77), ref, 1e-10 * ref);
    const RMat D = S.diagonal().asDiagonal();
    EXPECT_NEAR(quadratic_form(b, D, 77), 77.0 * b.dot(D.fullPivLu().solve(b)), 1e-10 * ref);
}

TEST(PValue, Values)
{
    EXPECT_NEAR(p_value(5.99146, 2), 0.05, 1e-5);
    EXPECT_EQ(p_value(0.0, 2), 1.0);
    EXPECT_NEAR(p_value(18.307, 10), 0.05, 1e-4);
    for (int df : {2, 4, 10})
        for (double q : {0.5, 3.0, 11.0, 40.0})
            EXPECT_NEAR(p_value(q, df), oracle::chi2_sf_even(q, df), 1e-12);
}

TEST(RunTest, ZeroSeriesIsGuarded)
{
    try {
        run_test(make_series(RMat::Zero(32, 15)), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::degenerate_spectrum);
    }
}

TEST(RunTest, Deterministic)
{
    const FunctionalSeries x = model_path(Model::b, 128, 5);
    TestConfig c;
    c.M = 2;
    const TestResult a = run_test(x, c), b = run_test(x, c);
    EXPECT_EQ(a.Q, b.Q);
    EXPECT_EQ(a.betas, b.betas);
    EXPECT_EQ(a.sigma, b.sigma);
    c.threads = 3;
    EXPECT_EQ(run_test(x, c).Q, a.Q);
}

TEST(RunTest, ScaleInvariance)
{
    for (Variant v : {Variant::eigen, Variant::fixed}) {
        const FunctionalSeries x = model_path(Model::c, 128, 8);
        TestConfig c;
        c.variant = v;
        c.M = 3;
        const double q = run_test(x, c).Q;
        for (double k : {0.1, 3.0, 100.0}) {
            FunctionalSeries y = x;
            y.coeffs *= k;
            EXPECT_NEAR(run_test(y, c).Q, q, 1e-8 * std::max(1.0, q));
        }
    }
}

TEST(RunTest, RotationInvariance)
{
    // Phases theta_l + 2 pi k j / T with k shared by all components: every
    // gamma_h(l) turns by the same angle, so beta_h only rotates.
    const long T = 64;
    const Stage s = stage_of(model_path(Model::b, T, 3).coeffs);
    TestConfig c;
    c.M = 3;
    const TestResult base = run_test_from(s.table, s.est, s.eig, c);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    std::uniform_int_distribution<int> k(-5, 5);
    for (int rep = 0; rep < 10; ++rep) {
        EigenSystem e = s.eig;
        const int kk = k(rng);
        for (int l = 0; l < e.n_basis(); ++l) {
            const double theta = u(rng);
            for (long j = 0; j < T; ++j) e.vectors[j].col(l) *= std::polar(1.0, theta + kTwoPi * kk * j / T);
        }
        if (kk != 0) EXPECT_NE(gammas_eigen(s.table, e, {1}, 1).values[0](0, 0),
                               gammas_eigen(s.table, s.eig, {1}, 1).values[0](0, 0));
        const TestResult r = run_test_from(s.table, s.est, e, c);
        EXPECT_NEAR(r.Q, base.Q, 1e-8 * std::max(1.0, base.Q));
        EXPECT_EQ(r.L, base.L);
    }
}

TEST(RunTest, ConfigValidation)
{
    const FunctionalSeries x = model_path(Model::a, 64, 1);
    TestConfig c;
    c.M = 0;
    EXPECT_THROW(run_test(x, c), Error);
    TestConfig d;
    d.M = 2;
    d.lags = {3, 1};
    EXPECT_THROW(run_test(x, d), Error);
    TestConfig e;
    e.M = 1;
    e.lags = {64};
    EXPECT_THROW(run_test(x, e), Error);
}

TEST(RunTest, ResultShape)
{
    const FunctionalSeries x = model_path(Model::a, 128, 2);
    TestConfig c;
    c.M = 5;
    const TestResult r = run_test(x, c);
    EXPECT_EQ(r.df, 10);
    EXPECT_EQ(r.betas.size(), 5u);
    EXPECT_EQ(r.sigma.size(), 5u);
    EXPECT_GE(r.L, 1);
    EXPECT_LE(r.L, 15);
    EXPECT_GE(r.p, 0.0);
    EXPECT_LE(r.p, 1.0);
    EXPECT_TRUE(!r.reject_01 || r.reject_05);
    c.variant = Variant::fixed;
    const TestResult f = run_test(x, c);
    EXPECT_EQ(static_cast<int>(f.directions.size()), f.L);
    EXPECT_GE(f.aTVE, 0.9 - 1e-12);
}

TEST(RunTest, NonstationaryPathRejects)
{
    const TestResult r = run_test(model_path(Model::d, 256, 4), {});
    EXPECT_TRUE(r.reject_05);
}
