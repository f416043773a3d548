#ifndef FDSTAT_FDFT_HPP
#define FDSTAT_FDFT_HPP

#include "fdstat/common.hpp"
#include "fdstat/funcseries.hpp"

namespace fdstat {

// Row r holds the scores at omega_j = 2 pi j / T for every j = r mod T, so the
// 1-based row j = T lives in row 0.
struct FdftTable {
    CMat scores;

    long T() const { return scores.rows(); }
    int n_basis() const { return static_cast<int>(scores.cols()); }
    auto row(long j) const { return scores.row(wrap(j, T())); }
    cplx at(long j, int l) const { return scores(wrap(j, T()), l); }
};

enum class DftMethod { automatic, fft, direct };

// Uses the FFT when T has no prime factor above 13, the direct sum otherwise.
FdftTable fdft_all(const FunctionalSeries& series, DftMethod method = DftMethod::automatic);

enum class ResiduePolicy { strict, discard };

// strict: imaginary residue above 1e-10 (relative to max(1, |coeffs|)) raises
// an inconsistency error. discard: keeps the real part silently.
FunctionalSeries inverse_fdft(const FdftTable& table, ResiduePolicy policy = ResiduePolicy::strict);

// scores[j][l1] * conj(scores[j][l2]); l1, l2 are 0-based.
cplx periodogram_score(const FdftTable& table, long j, int l1, int l2);

} // namespace fdstat

#endif
