#ifndef FDSTAT_TUNING_HPP
#define FDSTAT_TUNING_HPP

#include <vector>

#include "fdstat/specest.hpp"

namespace fdstat {

struct TuningParams {
    double zeta1 = 0.70;
    double zeta2 = 0.90;
    double xi = 0.15;
    double xi1 = 0.5;
    double xi2 = 0.25;
    double xi3 = 0.125;
    double zeta2_fast = 0.995;
    double xi_fast = 0.01;

    void validate() const;
};

// Infimum over all frequencies of the l-th eigenvalue, l 0-based.
double inf_eigenvalue(const EigenSystem& eig, int l);

bool fast_decay_check(const EigenSystem& eig, const TuningParams& params);

// Natural-log lag penalty; result clamped to [1, n_basis].
int select_L(const EigenSystem& eig, int M, const TuningParams& params);

// 0-based indices ranked by frequency-averaged diagonal energy, shortest
// prefix reaching the threshold share.
std::vector<int> select_fixed_directions(const SpectralEstimate& est, double threshold = 0.90);

// Share of frequency-averaged diagonal energy carried by the given directions.
double direction_energy_share(const SpectralEstimate& est, const std::vector<int>& directions);

} // namespace fdstat

#endif
