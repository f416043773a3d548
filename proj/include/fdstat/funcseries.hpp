#ifndef FDSTAT_FUNCSERIES_HPP
#define FDSTAT_FUNCSERIES_HPP

#include "fdstat/common.hpp"

namespace fdstat {

inline constexpr int kDefaultBasisSize = 15;

// Orthonormal Fourier system on [0,1].
struct BasisDescriptor {
    int n_basis = kDefaultBasisSize;
};

// Row t holds the first n_basis Fourier coefficients of curve X_t.
struct FunctionalSeries {
    RMat coeffs;
    BasisDescriptor basis;
    bool demeaned = false;

    long T() const { return coeffs.rows(); }
    int n_basis() const { return static_cast<int>(coeffs.cols()); }
};

// Checks T >= 8, finite entries, and column count against the basis.
FunctionalSeries make_series(RMat coeffs, bool demeaned = false);
void validate(const FunctionalSeries& series);

// l is 1-based: psi_1 = 1, psi_{2k} = sqrt2 cos(2 pi k tau), psi_{2k+1} = sqrt2 sin(2 pi k tau).
double fourier_basis_eval(int l, double tau);

// Uniform grid of G points including both endpoints of [0,1].
RVec uniform_grid(int G);

// Composite trapezoid projection of T x G curve samples onto the basis.
// Requires G >= 2 * n_basis.
FunctionalSeries project_curves(const RMat& samples, const BasisDescriptor& basis);

FunctionalSeries demean(const FunctionalSeries& series);

// Evaluates every curve on a uniform grid of G points.
RMat reconstruct(const FunctionalSeries& series, int G);

} // namespace fdstat

#endif
