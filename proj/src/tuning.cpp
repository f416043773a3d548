#include "fdstat/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fdstat {

void TuningParams::validate() const
{
    auto unit = [](double x) { return x > 0.0 && x < 1.0; };
    require(unit(zeta1) && unit(zeta2) && zeta1 < zeta2, ErrorKind::configuration,
            "need 0 < zeta1 < zeta2 < 1");
    require(unit(xi) && unit(xi1) && unit(xi2) && unit(xi3), ErrorKind::configuration,
            "xi thresholds must lie in (0,1)");
    require(unit(zeta2_fast) && zeta1 < zeta2_fast && unit(xi_fast), ErrorKind::configuration,
            "relaxed thresholds must lie in (0,1) with zeta1 < zeta2_fast");
}

double inf_eigenvalue(const EigenSystem& eig, int l)
{
    return eig.values.col(l).minCoeff();
}

bool fast_decay_check(const EigenSystem& eig, const TuningParams& params)
{
    require(eig.n_basis() >= 4, ErrorKind::argument, "fast-decay check needs at least 4 components");
    const double top = inf_eigenvalue(eig, 0);
    require(top > 0.0, ErrorKind::degenerate_spectrum, "infimum of the leading eigenvalue is zero");
    return inf_eigenvalue(eig, 1) / top < params.xi1 && inf_eigenvalue(eig, 2) / top < params.xi2 &&
           inf_eigenvalue(eig, 3) / top < params.xi3;
}

int select_L(const EigenSystem& eig, int M, const TuningParams& params)
{
    require(M >= 1, ErrorKind::argument, "M must be >= 1");
    const int n = eig.n_basis();
    const double top = inf_eigenvalue(eig, 0);
    if (!(top > 0.0)) return 1;

    double zeta2 = params.zeta2;
    double xi = params.xi;
    if (n >= 4 && fast_decay_check(eig, params)) {
        zeta2 = params.zeta2_fast;
        xi = params.xi_fast;
    }

    const long T = eig.T();
    RVec cum = RVec::Zero(n);
    for (long j = 0; j < T; ++j) {
        const double total = eig.values.row(j).sum();
        if (!(total > 0.0)) return 1;
        double run = 0.0;
        for (int l = 0; l < n; ++l) {
            run += eig.values(j, l);
            cum[l] += run / total;
        }
    }
    cum /= static_cast<double>(T);

    int best = 0;
    for (int l = 1; l <= n; ++l) {
        const double a = cum[l - 1];
        if (a > params.zeta1 && a < zeta2 && inf_eigenvalue(eig, l - 1) / top > xi) best = l;
    }
    const int penalty = static_cast<int>(std::floor(std::log(static_cast<double>(M))));
    return std::clamp(best - penalty, 1, n);
}

namespace {

RVec average_energy(const SpectralEstimate& est)
{
    const int n = est.n_basis();
    RVec e = RVec::Zero(n);
    for (const CMat& F : est.fhat) e += F.diagonal().real();
    return e / static_cast<double>(est.T());
}

} // namespace

std::vector<int> select_fixed_directions(const SpectralEstimate& est, double threshold)
{
    require(threshold > 0.0 && threshold <= 1.0, ErrorKind::argument, "threshold must lie in (0,1]");
    const RVec e = average_energy(est);
    const double total = e.sum();
    require(total > 0.0, ErrorKind::degenerate_spectrum, "zero total energy");

    std::vector<int> order(e.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return e[a] > e[b]; });

    std::vector<int> out;
    double acc = 0.0;
    for (int idx : order) {
        out.push_back(idx);
        acc += e[idx];
        if (acc >= threshold * total * (1.0 - 1e-12)) break;
    }
    return out;
}

double direction_energy_share(const SpectralEstimate& est, const std::vector<int>& directions)
{
    const RVec e = average_energy(est);
    double s = 0.0;
    for (int d : directions) s += e[d];
    return s / e.sum();
}

} // namespace fdstat
