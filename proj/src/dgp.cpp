#include "fdstat/dgp.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace fdstat {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    // splitmix64 finalizer over a combined word
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Model parse_model(const std::string& s)
{
    if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'h') return static_cast<Model>(s[0] - 'a');
    fail(ErrorKind::argument, "unknown model '" + s + "' (valid: a, b, c, d, e, f, g, h)");
}

std::string to_string(Model m)
{
    return std::string(1, static_cast<char>('a' + static_cast<int>(m)));
}

bool is_stationary(Model m)
{
    return m == Model::a || m == Model::b || m == Model::c || m == Model::g;
}

InnovationLaw parse_law(const std::string& s)
{
    if (s == "gaussian" || s == "normal") return InnovationLaw::gaussian;
    if (s == "t" || s == "student_t") return InnovationLaw::student_t;
    if (s == "beta66" || s == "beta") return InnovationLaw::beta66;
    fail(ErrorKind::argument, "unknown innovation law '" + s + "' (valid: gaussian, t, beta66)");
}

std::string to_string(InnovationLaw law)
{
    switch (law) {
    case InnovationLaw::gaussian: return "gaussian";
    case InnovationLaw::student_t: return "t";
    case InnovationLaw::beta66: return "beta66";
    }
    return "gaussian";
}

namespace {

double profile(VarianceProfile nu, int l, int lp)
{
    if (nu == VarianceProfile::exp_sum) return std::exp(-static_cast<double>(l + lp));
    return 1.0 / (l + std::pow(static_cast<double>(lp), 1.5));
}

// Unit Frobenius-norm draw with the given variance profile.
RMat unit_operator(VarianceProfile nu, int L_max, Rng& rng)
{
    std::normal_distribution<double> z(0.0, 1.0);
    for (int attempt = 0; attempt < 2; ++attempt) {
        RMat G(L_max, L_max);
        for (int l = 0; l < L_max; ++l)
            for (int lp = 0; lp < L_max; ++lp) G(l, lp) = z(rng) * std::sqrt(profile(nu, l + 1, lp + 1));
        const double n = G.norm();
        if (n > 0.0) return G / n;
    }
    fail(ErrorKind::numerical, "operator draw is identically zero");
}

} // namespace

RMat gen_operator_matrix(const OperatorSpec& spec, int L_max, Rng& rng)
{
    require(L_max >= 1, ErrorKind::argument, "L_max must be >= 1");
    if (spec.kappa == 0.0) return RMat::Zero(L_max, L_max);
    return spec.kappa * unit_operator(spec.nu, L_max, rng);
}

RMat gen_operator_matrix(const OperatorSpec& spec, int L_max, std::uint64_t seed)
{
    Rng rng(seed);
    return gen_operator_matrix(spec, L_max, rng);
}

RVec default_innovation_sd(int L_max)
{
    RVec sd(L_max);
    for (int l = 0; l < L_max; ++l) sd[l] = std::sqrt(std::exp(l / 10.0));
    return sd;
}

RMat innovations(InnovationLaw law, double df, long T, const RVec& sd, Rng& rng)
{
    const int L = static_cast<int>(sd.size());
    RMat e(T, L);
    switch (law) {
    case InnovationLaw::gaussian: {
        std::normal_distribution<double> z(0.0, 1.0);
        for (long t = 0; t < T; ++t)
            for (int l = 0; l < L; ++l) e(t, l) = z(rng);
        break;
    }
    case InnovationLaw::student_t: {
        require(df > 2.0, ErrorKind::argument, "t innovations need df > 2");
        std::student_t_distribution<double> tdist(df);
        const double s = std::sqrt((df - 2.0) / df);
        for (long t = 0; t < T; ++t)
            for (int l = 0; l < L; ++l) e(t, l) = s * tdist(rng);
        break;
    }
    case InnovationLaw::beta66: {
        std::gamma_distribution<double> g(6.0, 1.0);
        const double s = std::sqrt(52.0);
        for (long t = 0; t < T; ++t)
            for (int l = 0; l < L; ++l) {
                const double x = g(rng);
                const double y = g(rng);
                e(t, l) = s * (x / (x + y) - 0.5);
            }
        break;
    }
    }
    return e * sd.asDiagonal();
}

void DgpSpec::validate() const
{
    require(T >= 8, ErrorKind::argument, "T must be >= 8");
    require(L_max >= 1, ErrorKind::argument, "L_max must be >= 1");
    require(burn_in >= 100, ErrorKind::argument, "burn-in must be >= 100");
    require(max_redraws >= 1, ErrorKind::argument, "max_redraws must be >= 1");
    if (law == InnovationLaw::student_t && df != 0.0)
        require(df > 2.0, ErrorKind::argument, "t innovations need df > 2");
}

double companion_radius(const RMat& A1, const RMat& A2)
{
    const Eigen::Index n = A1.rows();
    RMat C = RMat::Zero(2 * n, 2 * n);
    C.topLeftCorner(n, n) = A1;
    C.topRightCorner(n, n) = A2;
    C.bottomLeftCorner(n, n).setIdentity();
    Eigen::EigenSolver<RMat> es(C, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

struct Params {
    double kappa1 = 0.0, kappa2 = 0.0;
    VarianceProfile nu1 = VarianceProfile::exp_sum, nu2 = VarianceProfile::power;
    int order = 0;
};

Params base_params(Model m)
{
    switch (m) {
    case Model::a: return {0.0, 0.0, VarianceProfile::exp_sum, VarianceProfile::power, 0};
    case Model::b:
    case Model::g: return {0.75, -0.4, VarianceProfile::exp_sum, VarianceProfile::power, 2};
    case Model::c: return {0.4, 0.45, VarianceProfile::exp_sum, VarianceProfile::power, 2};
    case Model::d:
    case Model::h: return {0.8, 0.0, VarianceProfile::exp_sum, VarianceProfile::exp_sum, 1};
    case Model::e: return {1.0, -0.81, VarianceProfile::exp_sum, VarianceProfile::exp_sum, 2};
    case Model::f: return {0.7, 0.2, VarianceProfile::exp_sum, VarianceProfile::power, 2};
    }
    return {};
}

double variance_clock(long s)
{
    const double u = kTwoPi * static_cast<double>(s) / 1024.0;
    return 0.5 + std::cos(u) + 0.3 * std::sin(u);
}

} // namespace

FunctionalSeries simulate(const DgpSpec& spec)
{
    spec.validate();
    const Model m = spec.model;
    const long T = spec.T;
    const int L = spec.L_max;
    const long B = spec.burn_in;
    const long N = T + B;

    InnovationLaw law = spec.law;
    double df = spec.df;
    if ((m == Model::g || m == Model::h) && law == InnovationLaw::gaussian) law = InnovationLaw::student_t;
    if (law == InnovationLaw::student_t && df == 0.0) df = m == Model::h ? 10.0 : 19.0;

    Rng op_rng(mix_seed(spec.seed, 1));
    Rng eps_rng(mix_seed(spec.seed, 2));

    const Params p = base_params(m);
    RMat U1 = RMat::Zero(L, L), U2 = RMat::Zero(L, L);
    if (p.order >= 1) {
        const bool check = is_stationary(m) || m == Model::f;
        int attempt = 0;
        double radius = 0.0;
        for (;;) {
            U1 = unit_operator(p.nu1, L, op_rng);
            if (p.order == 2) U2 = unit_operator(p.nu2, L, op_rng);
            if (!check) break;
            radius = companion_radius(p.kappa1 * U1, p.kappa2 * U2);
            if (radius < 1.0) break;
            if (++attempt >= spec.max_redraws)
                fail(ErrorKind::stability, "no stable operator draw after " +
                                               std::to_string(spec.max_redraws) +
                                               " attempts; last spectral radius " + std::to_string(radius));
        }
    }

    const RMat eps = innovations(law, df, N, default_innovation_sd(L), eps_rng);

    if (m == Model::a) return make_series(eps.bottomRows(T));

    // Absolute clock s = 1..N; the retained sample is s = B+1..N.
    RMat X = RMat::Zero(N, L);
    double noise_scale = 1.0;
    const long break_at = B + (3 * T) / 8;
    for (long i = 0; i < N; ++i) {
        const long s = i + 1;
        RMat A1 = p.kappa1 * U1;
        RMat A2 = p.kappa2 * U2;
        double g = 1.0;
        switch (m) {
        case Model::d:
        case Model::h: {
            const double v = variance_clock(s);
            g = spec.sqrt_abs_variance ? std::sqrt(std::abs(v)) : v;
            break;
        }
        case Model::e:
            A1 = 1.8 * std::cos(1.5 - std::cos(2.0 * kTwoPi * s / T)) * U1;
            break;
        case Model::f:
            if (s > break_at) {
                A1.setZero();
                A2 = -0.2 * U2;
                g = std::sqrt(2.0);
            }
            break;
        default: break;
        }
        RVec x = g * noise_scale * eps.row(i).transpose();
        if (i >= 1) x += A1 * X.row(i - 1).transpose();
        if (i >= 2 && p.order == 2) x += A2 * X.row(i - 2).transpose();
        X.row(i) = x.transpose();
        // Explosive paths: rescale history and noise together; the test is scale free.
        if (x.cwiseAbs().maxCoeff() > 1e100) {
            X.topRows(i + 1) *= 1e-100;
            noise_scale *= 1e-100;
        }
    }
    require(X.allFinite(), ErrorKind::numerical, "simulated path is not finite");
    return make_series(X.bottomRows(T));
}

} // namespace fdstat
