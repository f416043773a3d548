#include "fdstat/funcseries.hpp"

#include <cmath>
#include <string>

namespace fdstat {

void validate(const FunctionalSeries& series)
{
    require(series.T() >= 8, ErrorKind::argument,
            "series needs T >= 8, got " + std::to_string(series.T()));
    require(series.n_basis() == series.basis.n_basis && series.basis.n_basis >= 1,
            ErrorKind::argument, "coefficient columns do not match the basis size");
    require(series.coeffs.allFinite(), ErrorKind::argument, "series has non-finite coefficients");
}

FunctionalSeries make_series(RMat coeffs, bool demeaned)
{
    FunctionalSeries s;
    s.basis.n_basis = static_cast<int>(coeffs.cols());
    s.coeffs = std::move(coeffs);
    s.demeaned = demeaned;
    validate(s);
    return s;
}

double fourier_basis_eval(int l, double tau)
{
    require(l >= 1, ErrorKind::argument, "basis index must be >= 1");
    require(tau >= 0.0 && tau <= 1.0, ErrorKind::argument, "tau must lie in [0,1]");
    if (l == 1) return 1.0;
    const int k = l / 2;
    const double arg = kTwoPi * k * tau;
    return std::sqrt(2.0) * (l % 2 == 0 ? std::cos(arg) : std::sin(arg));
}

RVec uniform_grid(int G)
{
    require(G >= 2, ErrorKind::argument, "grid needs at least 2 points");
    RVec g(G);
    for (int i = 0; i < G; ++i) g[i] = static_cast<double>(i) / (G - 1);
    g[G - 1] = 1.0;
    return g;
}

namespace {

RMat basis_matrix(const RVec& grid, int n_basis)
{
    RMat B(grid.size(), n_basis);
    for (Eigen::Index g = 0; g < grid.size(); ++g)
        for (int l = 0; l < n_basis; ++l) B(g, l) = fourier_basis_eval(l + 1, grid[g]);
    return B;
}

} // namespace

FunctionalSeries project_curves(const RMat& samples, const BasisDescriptor& basis)
{
    const int G = static_cast<int>(samples.cols());
    require(basis.n_basis >= 1, ErrorKind::argument, "basis size must be >= 1");
    require(G >= 2 * basis.n_basis, ErrorKind::resolution,
            "grid of " + std::to_string(G) + " points too coarse for " +
                std::to_string(basis.n_basis) + " basis functions");
    require(samples.allFinite(), ErrorKind::input, "curve samples contain non-finite values");

    RVec w = RVec::Constant(G, 1.0 / (G - 1));
    w[0] *= 0.5;
    w[G - 1] *= 0.5;
    RMat B = basis_matrix(uniform_grid(G), basis.n_basis);
    RMat coeffs = samples * w.asDiagonal() * B;

    FunctionalSeries s;
    s.coeffs = std::move(coeffs);
    s.basis = basis;
    validate(s);
    return s;
}

FunctionalSeries demean(const FunctionalSeries& series)
{
    FunctionalSeries out = series;
    out.coeffs.rowwise() -= series.coeffs.colwise().mean();
    out.demeaned = true;
    return out;
}

RMat reconstruct(const FunctionalSeries& series, int G)
{
    RMat B = basis_matrix(uniform_grid(G), series.n_basis());
    return series.coeffs * B.transpose();
}

} // namespace fdstat
