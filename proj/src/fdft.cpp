#include "fdstat/fdft.hpp"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace fdstat {

namespace {

bool smooth_length(long n)
{
    for (long p : {2L, 3L, 5L, 7L, 11L, 13L})
        while (n % p == 0) n /= p;
    return n == 1;
}

// Twiddles from exact integer phases to keep rounding independent of j*t size.
CVec direct_dft_column(const Eigen::Ref<const RVec>& x)
{
    const long T = x.size();
    CVec out(T);
    for (long j = 0; j < T; ++j) {
        cplx acc = 0.0;
        for (long t = 0; t < T; ++t) {
            const double ang = -kTwoPi * static_cast<double>((j * t) % T) / T;
            acc += x[t] * cplx(std::cos(ang), std::sin(ang));
        }
        out[j] = acc;
    }
    return out;
}

} // namespace

FdftTable fdft_all(const FunctionalSeries& series, DftMethod method)
{
    validate(series);
    const long T = series.T();
    const int L = series.n_basis();
    const bool use_fft =
        method == DftMethod::fft || (method == DftMethod::automatic && smooth_length(T));
    const double scale = 1.0 / std::sqrt(kTwoPi * T);

    FdftTable table;
    table.scores.resize(T, L);
    if (use_fft) {
        Eigen::FFT<double> fft;
        std::vector<double> in(T);
        std::vector<cplx> out;
        for (int l = 0; l < L; ++l) {
            for (long t = 0; t < T; ++t) in[t] = series.coeffs(t, l);
            fft.fwd(out, in);
            for (long j = 0; j < T; ++j) table.scores(j, l) = out[j] * scale;
        }
    } else {
        for (int l = 0; l < L; ++l)
            table.scores.col(l) = direct_dft_column(series.coeffs.col(l)) * scale;
    }
    return table;
}

FunctionalSeries inverse_fdft(const FdftTable& table, ResiduePolicy policy)
{
    const long T = table.T();
    const int L = table.n_basis();
    require(T >= 1, ErrorKind::argument, "empty fDFT table");
    const double scale = std::sqrt(kTwoPi / T);

    CMat x(T, L);
    Eigen::FFT<double> fft;
    std::vector<cplx> in(T), out;
    for (int l = 0; l < L; ++l) {
        for (long j = 0; j < T; ++j) in[j] = table.scores(j, l);
        // Eigen's inverse divides by T; undo that to get the plain sum.
        fft.inv(out, in);
        for (long t = 0; t < T; ++t) x(t, l) = out[t] * static_cast<double>(T) * scale;
    }

    RMat re = x.real();
    if (policy == ResiduePolicy::strict) {
        const double tol = 1e-10 * std::max(1.0, re.cwiseAbs().maxCoeff());
        const double resid = x.imag().cwiseAbs().maxCoeff();
        require(resid <= tol, ErrorKind::inconsistency,
                "inverse fDFT has imaginary residue " + std::to_string(resid));
    }
    FunctionalSeries s;
    s.basis.n_basis = L;
    s.coeffs = std::move(re);
    return s;
}

cplx periodogram_score(const FdftTable& table, long j, int l1, int l2)
{
    return table.at(j, l1) * std::conj(table.at(j, l2));
}

} // namespace fdstat
