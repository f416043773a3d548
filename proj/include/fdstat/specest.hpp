#ifndef FDSTAT_SPECEST_HPP
#define FDSTAT_SPECEST_HPP

#include <vector>

#include "fdstat/common.hpp"
#include "fdstat/fdft.hpp"

namespace fdstat {

// K(x) = 6(0.25 - x^2) on |x| <= 1/2, zero elsewhere.
double kernel_profile(double x);

// Bandwidths in radians. Both rates are taken in cycles per observation and
// converted, so the windows cover T^(4/5) and T^(5/6) Fourier frequencies.
double default_bandwidth(long T);
double default_b4(long T);

struct KernelSpec {
    double b = 0.0;
};

// Periodically extended K_b(x) = K(x/b)/b, x a signed gap in radians.
double kernel_weight(const KernelSpec& spec, double x);

// Largest frequency offset o with K_b(2 pi o / T) inside the support.
long kernel_halfwidth(double b, long T);

// fhat[r] is the estimate at frequency index r mod T; (l1,l2) = <F psi_l2, psi_l1>.
struct SpectralEstimate {
    std::vector<CMat> fhat;
    double bandwidth = 0.0;

    long T() const { return static_cast<long>(fhat.size()); }
    int n_basis() const { return fhat.empty() ? 0 : static_cast<int>(fhat.front().rows()); }
    const CMat& at(long j) const { return fhat[wrap(j, T())]; }
};

// Needs b * T >= 4 and b < 2 pi. Frequencies above T/2 are filled by
// conjugation, so real-data symmetry holds exactly.
SpectralEstimate estimate_spectral_density(const FdftTable& table, const KernelSpec& spec,
                                           int threads = 1);

struct EigenSystem {
    RMat values;                // T x n, descending per row
    std::vector<CMat> vectors;  // columns phase-canonicalized

    long T() const { return values.rows(); }
    int n_basis() const { return static_cast<int>(values.cols()); }
    double value(long j, int l) const { return values(wrap(j, T()), l); }
    auto vec(long j, int l) const { return vectors[wrap(j, T())].col(l); }
};

EigenSystem eigendecompose(const SpectralEstimate& est, int threads = 1);

// e^{-i theta} v with theta the argument of the first coordinate above 1e-8.
CVec canonical_phase(const CVec& v);

double atve(const EigenSystem& eig, int L);

// Eigenvalue used as a divisor, floored at 1e-12 * lambda_1 of the same frequency.
// hits, when given, counts floor crossings.
double floored_eigenvalue(const EigenSystem& eig, long j, int l, long* hits = nullptr);

} // namespace fdstat

#endif
