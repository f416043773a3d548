#ifndef FDSTAT_MCHARNESS_HPP
#define FDSTAT_MCHARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdstat/dgp.hpp"
#include "fdstat/teststat.hpp"

namespace fdstat {

struct ExperimentSpec {
    std::vector<Model> models{Model::a};
    std::vector<long> Ts{256};
    std::vector<Variant> variants{Variant::eigen};
    std::vector<int> Ms{1};
    InnovationLaw law = InnovationLaw::gaussian;
    double df = 0.0;
    int burn_in = 200;
    int L_max = kDefaultBasisSize;
    int R = 200;
    std::uint64_t seed = 20240601;
    TestConfig test;             // variant and M are overridden per cell
    int threads = 1;
    double failure_budget = 0.01;
    bool allow_T1024 = false;
    bool keep_values = true;     // retain per-replication Q, L in the summary

    void validate() const;
};

struct CellSummary {
    Model model = Model::a;
    long T = 0;
    Variant variant = Variant::eigen;
    int M = 1;
    int R = 0;
    int failures = 0;
    double median_Q = 0.0;
    double mean_Q = 0.0;
    double rej05 = 0.0;   // percent
    double rej01 = 0.0;   // percent
    double avg_L = 0.0;
    double aTVE = 0.0;
    std::vector<double> Q;
    std::vector<int> L;
    std::vector<std::string> failure_messages;

    std::string cell_name() const;
};

struct SummaryTable {
    std::vector<CellSummary> cells;
};

// Seed of replication r in a cell; identical across variants and M so that
// cells on the same (model, T) are paired.
std::uint64_t replication_seed(std::uint64_t master, Model model, long T, int r);

CellSummary run_cell(const ExperimentSpec& spec, Model model, long T, Variant variant, int M);
SummaryTable run_experiment(const ExperimentSpec& spec);

struct DensityRow {
    double x = 0.0;
    double empirical = 0.0;
    double chi2 = 0.0;
};

// Histogram density on a grid from 0 to past both max(Q) and the chi-square
// tail, plus the chi-square reference density at the bin centres. trim drops
// that fraction of the largest values first.
std::vector<DensityRow> empirical_density(std::vector<double> values, int df, int bins = 0,
                                          double trim = 0.0);

double chi2_density(double x, int df);

// Sup distance between the empirical CDF of values and the chi-square CDF.
double ks_distance(std::vector<double> values, int df);

struct ContourGrid {
    int G = 0;
    RMat values;  // G x G, row = tau, col = tau'
};

// Average over R replications of |sum_{l,l'} gamma_1(l,l') psi_l(tau) psi_l'(tau')|^2.
// Fixed variant uses all basis directions; eigen maps gamma_1(l) through the
// frequency-averaged eigenvector coordinates.
ContourGrid contour_gamma(const ExperimentSpec& spec, Model model, long T, Variant variant,
                          int G = 64);

// Same average over given series. A series that is identically zero
// contributes an all-zero surface.
ContourGrid contour_from_series(const std::vector<FunctionalSeries>& series, Variant variant,
                                const TestConfig& cfg, int G = 64, int threads = 1);

void write_summary_csv(const SummaryTable& table, const std::string& path);
void write_density_csv(const std::vector<DensityRow>& rows, const std::string& path);
void write_contour_csv(const ContourGrid& grid, const std::string& path);
void write_summary_csv(const SummaryTable& table, std::ostream& out);
void write_density_csv(const std::vector<DensityRow>& rows, std::ostream& out);
void write_contour_csv(const ContourGrid& grid, std::ostream& out);

} // namespace fdstat

#endif
