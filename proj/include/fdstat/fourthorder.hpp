#ifndef FDSTAT_FOURTHORDER_HPP
#define FDSTAT_FOURTHORDER_HPP

#include <array>
#include <optional>
#include <vector>

#include "fdstat/fdft.hpp"
#include "fdstat/specest.hpp"

namespace fdstat {

using Quad = std::array<long, 4>;
using Components = std::array<int, 4>;

// 1 iff the quadruple sums to 0 mod T and no nonempty proper subset does.
// With guard m > 0 a proper subset sum within m of 0 mod T also disqualifies.
int phi_indicator(const Quad& k, long T, int guard = 0);

// (T / 2 pi) * prod_i a_i with a_i the projection of the fDFT row k_i.
// eigen: a_i = phi^{targets_i, H}_{comps_i} D_{k_i}; targets default to k.
// fixed: a_i = <D_{k_i}, psi_{comps_i}>; eig is ignored.
// Components are 0-based. Non-admissible k raises a manifold error.
cplx raw_tri_periodogram(const FdftTable& table, const EigenSystem& eig, const Quad& k,
                         const Components& comps, Variant variant,
                         const std::optional<Quad>& targets = std::nullopt);

// Reciprocal of sum K(d1)K(d2)K(d3)K(d4) over integer offsets with d4 fixed
// by the manifold; normalizes the smoothing weights to unit mass.
double tri_kernel_normalizer(long T, double b4);

// Kernel-smoothed tri-periodogram around a target with sum 0 mod T. Raw terms
// use the target eigenvectors. Throws an estimation error if no admissible
// quadruple falls inside the window.
cplx smoothed_tri_spectrum(const FdftTable& table, const EigenSystem& eig, const Quad& target,
                           double b4, const Components& comps, Variant variant, int guard = 0);

enum class SecondOrder { plugin, analytic };

struct SigmaOptions {
    double b4 = 0.0;             // 0: default_b4(T)
    bool fourth_order = true;
    int guard = 2;               // manifold guard band, in frequency indices
    double fourth_clip = 1.0;    // |fourth| <= clip * second; negative disables
    SecondOrder second_order = SecondOrder::plugin;
    double floor = 1e-8;
    double floor_budget = 0.05;  // tolerated share of floored eigenvalues
    int threads = 1;
};

struct SigmaMatrix {
    RMat S;
    int M = 0;
    Variant variant = Variant::eigen;
    std::vector<double> second;   // per lag
    std::vector<double> fourth;   // per lag, before clipping
    long regularized = 0;
    long clipped = 0;
    long floor_hits = 0;

    double diag(int m) const { return S(m, m); }
};

SigmaMatrix estimate_sigma_eigen(const FdftTable& table, const SpectralEstimate& est,
                                 const EigenSystem& eig, const std::vector<int>& lags, int L,
                                 const SigmaOptions& opts = {});

SigmaMatrix estimate_sigma_fixed(const FdftTable& table, const SpectralEstimate& est,
                                 const std::vector<int>& directions, const std::vector<int>& lags,
                                 const SigmaOptions& opts = {});

} // namespace fdstat

#endif
