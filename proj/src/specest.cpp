#include "fdstat/specest.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "fdstat/parallel.hpp"

namespace fdstat {

double kernel_profile(double x)
{
    return std::abs(x) <= 0.5 ? 6.0 * (0.25 - x * x) : 0.0;
}

double default_bandwidth(long T)
{
    return kTwoPi * std::pow(static_cast<double>(T), -0.2);
}

double default_b4(long T)
{
    return kTwoPi * std::pow(static_cast<double>(T), -1.0 / 6.0);
}

double kernel_weight(const KernelSpec& spec, double x)
{
    require(spec.b > 0.0, ErrorKind::configuration, "bandwidth must be positive");
    double best = 0.0;
    for (double s : {-kTwoPi, 0.0, kTwoPi})
        best = std::max(best, kernel_profile((x + s) / spec.b) / spec.b);
    return best;
}

long kernel_halfwidth(double b, long T)
{
    long hw = static_cast<long>(std::floor(0.5 * b * T / kTwoPi));
    while (hw > 0 && kernel_profile(kTwoPi * hw / (T * b)) <= 0.0) --hw;
    return std::min(hw, (T - 1) / 2);
}

SpectralEstimate estimate_spectral_density(const FdftTable& table, const KernelSpec& spec,
                                           int threads)
{
    const long T = table.T();
    const int L = table.n_basis();
    require(spec.b > 0.0 && spec.b < kTwoPi, ErrorKind::configuration,
            "bandwidth must lie in (0, 2 pi), got " + std::to_string(spec.b));
    require(spec.b * T >= 4.0, ErrorKind::configuration,
            "bandwidth too small for T: b*T = " + std::to_string(spec.b * T));

    const long hw = kernel_halfwidth(spec.b, T);
    std::vector<double> w(2 * hw + 1);
    for (long o = -hw; o <= hw; ++o)
        w[o + hw] = (kTwoPi / T) * kernel_weight(spec, -kTwoPi * o / T);

    SpectralEstimate est;
    est.bandwidth = spec.b;
    est.fhat.assign(T, CMat::Zero(L, L));
    const long half = T / 2;
    parallel_for(half + 1, threads, [&](long jp) {
        CMat F = CMat::Zero(L, L);
        for (long o = -hw; o <= hw; ++o) {
            if (w[o + hw] == 0.0) continue;
            const CVec d = table.row(jp + o).transpose();
            F.noalias() += w[o + hw] * (d * d.adjoint());
        }
        est.fhat[jp] = 0.5 * (F + F.adjoint());
    });
    for (long jp = half + 1; jp < T; ++jp) est.fhat[jp] = est.fhat[T - jp].conjugate();
    return est;
}

CVec canonical_phase(const CVec& v)
{
    require(v.size() > 0 && v.norm() > 0.0, ErrorKind::argument, "cannot canonicalize a zero vector");
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-8) {
            const cplx rot = std::conj(v[i]) / std::abs(v[i]);
            CVec out = v * rot;
            out[i] = std::abs(v[i]);
            return out;
        }
    }
    return v;
}

EigenSystem eigendecompose(const SpectralEstimate& est, int threads)
{
    const long T = est.T();
    const int L = est.n_basis();
    EigenSystem eig;
    eig.values.resize(T, L);
    eig.vectors.assign(T, CMat::Zero(L, L));
    std::vector<std::string> errors(T);
    const long half = T / 2;

    parallel_for(half + 1, threads, [&](long j) {
        const CMat& F = est.fhat[j];
        Eigen::SelfAdjointEigenSolver<CMat> solver(F);
        if (solver.info() != Eigen::Success) {
            errors[j] = "eigensolver did not converge at frequency index " + std::to_string(j);
            return;
        }
        const double trace = F.trace().real();
        const RVec& ev = solver.eigenvalues();
        const CMat& V = solver.eigenvectors();
        for (int l = 0; l < L; ++l) {
            const int src = L - 1 - l;
            double lam = ev[src];
            if (lam < 0.0) {
                if (lam < -1e-10 * std::max(trace, 0.0) && lam < -1e-300) {
                    errors[j] = "negative eigenvalue " + std::to_string(lam) +
                                " at frequency index " + std::to_string(j);
                    return;
                }
                lam = 0.0;
            }
            eig.values(j, l) = lam;
            eig.vectors[j].col(l) = canonical_phase(V.col(src));
        }
    });
    for (long j = 0; j <= half; ++j)
        if (!errors[j].empty()) fail(ErrorKind::numerical, errors[j]);
    for (long j = half + 1; j < T; ++j) {
        eig.values.row(j) = eig.values.row(T - j);
        eig.vectors[j] = eig.vectors[T - j].conjugate();
    }
    return eig;
}

double atve(const EigenSystem& eig, int L)
{
    require(L >= 1 && L <= eig.n_basis(), ErrorKind::argument,
            "L must lie in [1, " + std::to_string(eig.n_basis()) + "]");
    const long T = eig.T();
    double acc = 0.0;
    for (long j = 0; j < T; ++j) {
        const double total = eig.values.row(j).sum();
        require(total > 0.0, ErrorKind::degenerate_spectrum,
                "zero total variation at frequency index " + std::to_string(j));
        acc += eig.values.row(j).head(L).sum() / total;
    }
    return acc / T;
}

double floored_eigenvalue(const EigenSystem& eig, long j, int l, long* hits)
{
    const double top = eig.value(j, 0);
    require(top > 0.0, ErrorKind::degenerate_spectrum,
            "zero spectrum at frequency index " + std::to_string(wrap(j, eig.T())));
    const double lam = eig.value(j, l);
    const double lo = 1e-12 * top;
    if (lam < lo) {
        if (hits) ++*hits;
        return lo;
    }
    return lam;
}

} // namespace fdstat
