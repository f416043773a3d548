#include "fdstat/fourthorder.hpp"

#include <cmath>
#include <string>

#include "fdstat/parallel.hpp"

namespace fdstat {

int phi_indicator(const Quad& k, long T, int guard)
{
    long total = 0;
    for (long v : k) total += v;
    if (wrap(total, T) != 0) return 0;
    for (int mask = 1; mask < 15; ++mask) {
        long s = 0;
        for (int i = 0; i < 4; ++i)
            if (mask & (1 << i)) s += k[i];
        if (std::abs(centered(s, T)) <= guard) return 0;
    }
    return 1;
}

namespace {

cplx project(const FdftTable& table, const EigenSystem& eig, long k, long target, int comp,
             Variant variant)
{
    if (variant == Variant::fixed) return table.at(k, comp);
    // phi^H D
    return eig.vec(target, comp).dot(table.row(k).transpose());
}

} // namespace

cplx raw_tri_periodogram(const FdftTable& table, const EigenSystem& eig, const Quad& k,
                         const Components& comps, Variant variant, const std::optional<Quad>& targets)
{
    const long T = table.T();
    require(phi_indicator(k, T) == 1, ErrorKind::manifold,
            "frequency quadruple is not on the principal manifold");
    const Quad& tg = targets ? *targets : k;
    cplx prod = static_cast<double>(T) / kTwoPi;
    for (int i = 0; i < 4; ++i) prod *= project(table, eig, k[i], tg[i], comps[i], variant);
    return prod;
}

namespace {

std::vector<double> tri_weights(long T, double b4, long hw)
{
    std::vector<double> w(2 * hw + 1);
    for (long o = -hw; o <= hw; ++o) w[o + hw] = kernel_profile(kTwoPi * o / (T * b4));
    return w;
}

} // namespace

double tri_kernel_normalizer(long T, double b4)
{
    require(b4 > 0.0, ErrorKind::configuration, "b4 must be positive");
    const long hw = kernel_halfwidth(b4, T);
    const std::vector<double> w = tri_weights(T, b4, hw);
    // Convolve three windows, then close the manifold with the fourth.
    std::vector<double> two(4 * hw + 1, 0.0), three(6 * hw + 1, 0.0);
    for (long a = 0; a <= 2 * hw; ++a)
        for (long b = 0; b <= 2 * hw; ++b) two[a + b] += w[a] * w[b];
    for (long a = 0; a <= 4 * hw; ++a)
        for (long b = 0; b <= 2 * hw; ++b) three[a + b] += two[a] * w[b];
    double total = 0.0;
    for (long s = 0; s <= 6 * hw; ++s) {
        const long d4 = centered(-(s - 3 * hw), T);
        if (std::abs(d4) <= hw) total += three[s] * w[d4 + hw];
    }
    require(total > 0.0, ErrorKind::estimation, "fourth-order kernel window is empty");
    return 1.0 / total;
}

cplx smoothed_tri_spectrum(const FdftTable& table, const EigenSystem& eig, const Quad& target,
                           double b4, const Components& comps, Variant variant, int guard)
{
    const long T = table.T();
    require(b4 > 0.0, ErrorKind::configuration, "b4 must be positive");
    require(wrap(target[0] + target[1] + target[2] + target[3], T) == 0, ErrorKind::argument, "target frequencies must sum to 0 mod T");
    const long hw = kernel_halfwidth(b4, T);
    const std::vector<double> w = tri_weights(T, b4, hw);

    cplx acc = 0.0;
    long admitted = 0;
    for (long d1 = -hw; d1 <= hw; ++d1)
        for (long d2 = -hw; d2 <= hw; ++d2)
            for (long d3 = -hw; d3 <= hw; ++d3) {
                const long d4 = centered(-(d1 + d2 + d3), T);
                if (std::abs(d4) > hw) continue;
                const double kw = w[d1 + hw] * w[d2 + hw] * w[d3 + hw] * w[d4 + hw];
                if (kw == 0.0) continue;
                const Quad k{target[0] + d1, target[1] + d2, target[2] + d3, target[3] + d4};
                if (phi_indicator(k, T, guard) == 0) continue;
                ++admitted;
                acc += kw * raw_tri_periodogram(table, eig, k, comps, variant, target);
            }
    if (admitted == 0)
        fail(ErrorKind::estimation, "no admissible quadruple near target (" +
                                        std::to_string(target[0]) + "," + std::to_string(target[1]) +
                                        "," + std::to_string(target[2]) + "," +
                                        std::to_string(target[3]) + ")");
    return acc * tri_kernel_normalizer(T, b4);
}

namespace {

// Standardized projections a(t, k) = D_k^T proj[t]; one column per component.
struct Projector {
    std::vector<CMat> proj;
    long floor_hits = 0;

    int width() const { return static_cast<int>(proj.front().cols()); }

    // Rows around centre projected with proj at centre, or with conj(proj) at
    // -centre when conj_partner is set. The two agree for conjugate-symmetric
    // eigenvectors; the second stays exact under any rotation of them.
    CMat window(const FdftTable& table, long centre, long hw, bool conj_partner = false) const
    {
        const long T = table.T();
        CMat rows(2 * hw + 1, table.n_basis());
        for (long o = -hw; o <= hw; ++o) rows.row(o + hw) = table.scores.row(wrap(centre + o, T));
        if (conj_partner) return rows * proj[wrap(-centre, T)].conjugate();
        return rows * proj[wrap(centre, T)];
    }

    CVec own(const FdftTable& table, long j) const
    {
        return (table.row(j) * proj[wrap(j, table.T())]).transpose();
    }
};

Projector eigen_projector(const EigenSystem& eig, int L)
{
    Projector p;
    const long T = eig.T();
    p.proj.resize(T);
    for (long j = 0; j < T; ++j) {
        CMat m = eig.vectors[j].leftCols(L).conjugate();
        for (int l = 0; l < L; ++l) m.col(l) /= std::sqrt(floored_eigenvalue(eig, j, l, &p.floor_hits));
        p.proj[j] = std::move(m);
    }
    return p;
}

Projector fixed_projector(const SpectralEstimate& est, const std::vector<int>& dirs)
{
    Projector p;
    const long T = est.T();
    p.proj.resize(T);
    for (long j = 0; j < T; ++j) {
        const RVec diag = est.fhat[j].diagonal().real();
        const double top = diag.maxCoeff();
        require(top > 0.0, ErrorKind::degenerate_spectrum,
                "zero spectrum at frequency index " + std::to_string(j));
        CMat m = CMat::Zero(est.n_basis(), 1);
        for (int d : dirs) {
            double f = diag[d];
            if (f < 1e-12 * top) {
                f = 1e-12 * top;
                ++p.floor_hits;
            }
            m(d, 0) = 1.0 / std::sqrt(f);
        }
        p.proj[j] = std::move(m);
    }
    return p;
}

// Plug-in second-order term: mean |W_j - beta|^2 with W_j = sum_r z_j^r conj z_{j+h}^r.
double plugin_second(const CMat& z, int h)
{
    const long T = z.rows();
    std::vector<cplx> W(T);
    // dot conjugates its first argument
    for (long j = 0; j < T; ++j) W[j] = std::conj(z.row(j).dot(z.row(wrap(j + h, T))));
    cplx beta = 0.0;
    for (const cplx& w : W) beta += w;
    beta /= static_cast<double>(T);
    double s = 0.0;
    for (const cplx& w : W) s += std::norm(w - beta);
    return s / T;
}

// Factorized fourth-order sum for one lag; returns the Re part of the scaled total.
double fourth_term(const FdftTable& table, const Projector& pr, int h, double b4, int guard,
                   int threads)
{
    const long T = table.T();
    const long hw = kernel_halfwidth(b4, T);
    const std::vector<double> w = tri_weights(T, b4, hw);
    const long W = 2 * hw + 1;
    const Eigen::Map<const RVec> wv(w.data(), W);

    // Fixed chunking keeps the summation order independent of thread count.
    const long nchunks = std::min<long>(4, T);
    std::vector<CMat> parts(nchunks);
    parallel_for(nchunks, threads, [&](long c) {
        CMat P = CMat::Zero(T, T);
        const long lo = c * T / nchunks, hi = (c + 1) * T / nchunks;
        for (long j1 = lo; j1 < hi; ++j1) {
            const long ta = j1, tb = -(j1 + h);
            CMat A = pr.window(table, ta, hw);
            CMat B = pr.window(table, tb, hw, true);
            A.array().colwise() *= wv.array().cast<cplx>();
            B.array().colwise() *= wv.array().cast<cplx>();
            const CMat blk = A * B.transpose();
            for (long a = 0; a < W; ++a) {
                const long k1 = wrap(ta + a - hw, T);
                for (long b = 0; b < W; ++b) P(k1, wrap(tb + b - hw, T)) += blk(a, b);
            }
        }
        parts[c] = std::move(P);
    });
    CMat P = parts[0];
    for (long c = 1; c < nchunks; ++c) P += parts[c];

    // Zero every entry that already violates the manifold through k1, k2 or k1+k2.
    for (long k1 = 0; k1 < T; ++k1)
        for (long k2 = 0; k2 < T; ++k2)
            if (std::abs(centered(k1, T)) <= guard || std::abs(centered(k2, T)) <= guard ||
                std::abs(centered(k1 + k2, T)) <= guard)
                P(k1, k2) = 0.0;

    // With Q(k3,k4) = conj P(-k3,-k4), the unrestricted sum is sum_s |U(s)|^2.
    CVec U = CVec::Zero(T);
    for (long k1 = 0; k1 < T; ++k1)
        for (long k2 = 0; k2 < T; ++k2) U[wrap(k1 + k2, T)] += P(k1, k2);
    cplx total = U.squaredNorm();

    // Remove quadruples with k1+k3 or k1+k4 inside the guard band.
    for (long r = -guard; r <= guard; ++r) {
        cplx sa = 0.0, sb = 0.0;
        for (long k1 = 0; k1 < T; ++k1)
            for (long k2 = 0; k2 < T; ++k2) {
                const cplx p = P(k1, k2);
                if (p == 0.0) continue;
                sa += p * std::conj(P(wrap(k1 - r, T), wrap(k2 + r, T)));
                sb += p * std::conj(P(wrap(k2 + r, T), wrap(k1 - r, T)));
            }
        total -= sa + sb;
        for (long r2 = -guard; r2 <= guard; ++r2) {
            cplx sab = 0.0;
            for (long k = 0; k < T; ++k)
                sab += P(k, wrap(k - r - r2, T)) * std::conj(P(wrap(k - r, T), wrap(k - r2, T)));
            total += sab;
        }
    }

    const cplx s4 = total * tri_kernel_normalizer(T, b4) / (2.0 * T);
    const double scale = std::max(std::abs(s4), 1e-300);
    require(std::abs(s4.imag()) <= 1e-6 * scale + 1e-12, ErrorKind::numerical,
            "fourth-order term has imaginary residue " + std::to_string(s4.imag()) + " (real " +
                std::to_string(s4.real()) + ")");
    return s4.real();
}

SigmaMatrix assemble(const FdftTable& table, const Projector& pr, const std::vector<int>& lags,
                     const SigmaOptions& opts, Variant variant,
                     const std::vector<double>& analytic_second)
{
    const long T = table.T();
    const int M = static_cast<int>(lags.size());
    require(M >= 1, ErrorKind::argument, "at least one lag required");
    for (int h : lags)
        require(h >= 1 && h < T, ErrorKind::argument, "lag " + std::to_string(h) + " outside [1, T-1]");
    const long budget = static_cast<long>(opts.floor_budget * T * pr.width());
    if (pr.floor_hits > budget)
        fail(ErrorKind::unstable_normalization,
             std::to_string(pr.floor_hits) + " eigenvalues hit the floor (budget " +
                 std::to_string(budget) + ")");

    CMat z(T, pr.width());
    for (long j = 0; j < T; ++j) z.row(j) = pr.own(table, j).transpose();

    const double b4 = opts.b4 > 0.0 ? opts.b4 : default_b4(T);
    SigmaMatrix sig;
    sig.M = M;
    sig.variant = variant;
    sig.floor_hits = pr.floor_hits;
    sig.S = RMat::Zero(2 * M, 2 * M);
    for (int m = 0; m < M; ++m) {
        const int h = lags[m];
        const double s2 = opts.second_order == SecondOrder::plugin ? plugin_second(z, h)
                                                                    : analytic_second[m];
        double s4 = 0.0;
        if (opts.fourth_order) s4 = fourth_term(table, pr, h, b4, opts.guard, opts.threads);
        double used = s4;
        if (opts.fourth_clip >= 0.0) {
            const double cap = opts.fourth_clip * s2;
            if (std::abs(s4) > cap) {
                used = s4 > 0 ? cap : -cap;
                ++sig.clipped;
            }
        }
        double v = s2 + used;
        if (!(v >= opts.floor)) {
            v = opts.floor;
            ++sig.regularized;
        }
        sig.second.push_back(s2);
        sig.fourth.push_back(s4);
        sig.S(m, m) = v;
        sig.S(M + m, M + m) = v;
    }
    return sig;
}

} // namespace

SigmaMatrix estimate_sigma_eigen(const FdftTable& table, const SpectralEstimate& est,
                                 const EigenSystem& eig, const std::vector<int>& lags, int L,
                                 const SigmaOptions& opts)
{
    require(L >= 1 && L <= eig.n_basis(), ErrorKind::argument, "L outside [1, n_basis]");
    require(est.T() == table.T() && eig.T() == table.T(), ErrorKind::argument,
            "table, estimate and eigensystem lengths differ");
    const Projector pr = eigen_projector(eig, L);
    // Gaussian limit of the second-order term: one unit per component.
    std::vector<double> analytic(lags.size(), static_cast<double>(L));
    return assemble(table, pr, lags, opts, Variant::eigen, analytic);
}

SigmaMatrix estimate_sigma_fixed(const FdftTable& table, const SpectralEstimate& est,
                                 const std::vector<int>& directions, const std::vector<int>& lags,
                                 const SigmaOptions& opts)
{
    require(!directions.empty(), ErrorKind::argument, "direction set is empty");
    for (int d : directions)
        require(d >= 0 && d < table.n_basis(), ErrorKind::argument, "direction index out of range");
    require(est.T() == table.T(), ErrorKind::argument, "table and estimate lengths differ");
    const Projector pr = fixed_projector(est, directions);

    // Coherence sums c_j = sum_{l,l'} F^{l l'}_j / sqrt(F^{ll}_j F^{l'l'}_j).
    const long T = table.T();
    RVec c(T);
    for (long j = 0; j < T; ++j) {
        const CMat& F = est.fhat[j];
        cplx s = 0.0;
        for (int a : directions)
            for (int b : directions)
                s += F(a, b) / std::sqrt(std::max(F(a, a).real(), 1e-300) * std::max(F(b, b).real(), 1e-300));
        c[j] = s.real();
    }
    std::vector<double> analytic;
    for (int h : lags) {
        double acc = 0.0;
        for (long j = 0; j < T; ++j) acc += c[j] * c[wrap(j + h, T)];
        analytic.push_back(acc / T);
    }
    return assemble(table, pr, lags, opts, Variant::fixed, analytic);
}

} // namespace fdstat
