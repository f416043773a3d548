#ifndef FDSTAT_TESTSTAT_HPP
#define FDSTAT_TESTSTAT_HPP

#include <optional>
#include <vector>

#include "fdstat/fdft.hpp"
#include "fdstat/fourthorder.hpp"
#include "fdstat/funcseries.hpp"
#include "fdstat/specest.hpp"
#include "fdstat/tuning.hpp"

namespace fdstat {

// Per lag: an L x 1 column (eigen) or an L x L matrix (fixed).
struct GammaSet {
    Variant variant = Variant::eigen;
    std::vector<int> lags;
    std::vector<CMat> values;
};

struct TestConfig {
    Variant variant = Variant::eigen;
    int M = 1;
    std::vector<int> lags;        // empty: 1..M
    double b = 0.0;               // 0: default_bandwidth(T)
    TuningParams tuning;
    std::optional<int> L_override;
    double fixed_threshold = 0.90;
    double alpha = 0.05;
    SigmaOptions sigma;
    DftMethod dft = DftMethod::automatic;
    int threads = 1;

    std::vector<int> resolved_lags() const;
    void validate(long T) const;
};

struct Diagnostics {
    long eigen_floor_hits = 0;
    long sigma_regularized = 0;
    long fourth_clipped = 0;
    bool fast_decay = false;
    std::vector<double> sigma_second;
    std::vector<double> sigma_fourth;
};

struct TestResult {
    Variant variant = Variant::eigen;
    long T = 0;
    int M = 0;
    std::vector<int> lags;
    int L = 0;                    // eigen: components; fixed: direction count
    std::vector<int> directions;  // fixed only, 0-based
    double aTVE = 0.0;
    double Q = 0.0;
    int df = 0;
    double p = 1.0;
    bool reject_05 = false;
    bool reject_01 = false;
    bool reject_alpha = false;
    std::vector<cplx> betas;
    std::vector<double> sigma;
    Diagnostics diagnostics;
};

// (1/T) sum_j d_j^l conj(d_{j+h}^l) / sqrt(lambda_j^l lambda_{j+h}^l), d_j^l = phi_j^{l,H} D_j.
cplx gamma_eigen(const FdftTable& table, const EigenSystem& eig, int h, int l, long* floor_hits = nullptr);

// (1/T) sum_j D_j^l conj(D_{j+h}^{l'}) / sqrt(F_j^{ll} F_{j+h}^{l'l'}).
cplx gamma_fixed(const FdftTable& table, const SpectralEstimate& est, int h, int l, int lp);

GammaSet gammas_eigen(const FdftTable& table, const EigenSystem& eig, const std::vector<int>& lags,
                      int L, long* floor_hits = nullptr);
GammaSet gammas_fixed(const FdftTable& table, const SpectralEstimate& est,
                      const std::vector<int>& lags, const std::vector<int>& directions);

// eigen: sum of the L entries; fixed: sum of all entries.
cplx beta_h(const GammaSet& gammas, int h);

// (Re beta_1..Re beta_M, Im beta_1..Im beta_M).
RVec build_bM(const std::vector<cplx>& betas);

// T * b' Sigma^{-1} b; elementwise for diagonal Sigma, LDLT otherwise.
double quadratic_form(const RVec& bM, const RMat& sigma, long T);
double quadratic_form(const RVec& bM, const SigmaMatrix& sigma, long T);

// Upper tail of chi-square with df degrees of freedom.
double p_value(double Q, int df);

TestResult run_test(const FunctionalSeries& series, const TestConfig& config);

// Pipeline from a precomputed spectral stage; used for metamorphic checks.
TestResult run_test_from(const FdftTable& table, const SpectralEstimate& est,
                         const EigenSystem& eig, const TestConfig& config);

} // namespace fdstat

#endif
