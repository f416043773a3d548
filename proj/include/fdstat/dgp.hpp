#ifndef FDSTAT_DGP_HPP
#define FDSTAT_DGP_HPP

#include <cstdint>
#include <random>
#include <string>

#include "fdstat/funcseries.hpp"

namespace fdstat {

using Rng = std::mt19937_64;

// Stateless 64-bit mixer used to derive independent substreams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

enum class Model { a, b, c, d, e, f, g, h };

Model parse_model(const std::string& s);
std::string to_string(Model m);
bool is_stationary(Model m);

enum class VarianceProfile { exp_sum, power };  // exp(-l-l'), 1/(l + l'^1.5)

struct OperatorSpec {
    VarianceProfile nu = VarianceProfile::exp_sum;
    double kappa = 0.0;
};

// Entries N(0, nu_{l,l'}) (1-based l, l'), rescaled to Frobenius norm |kappa|
// and multiplied by sign(kappa).
RMat gen_operator_matrix(const OperatorSpec& spec, int L_max, Rng& rng);
RMat gen_operator_matrix(const OperatorSpec& spec, int L_max, std::uint64_t seed);

enum class InnovationLaw { gaussian, student_t, beta66 };

InnovationLaw parse_law(const std::string& s);
std::string to_string(InnovationLaw law);

// Coefficient standard deviations sqrt(exp((l-1)/10)).
RVec default_innovation_sd(int L_max);

// iid standardized draws times sd[l]; df is used by the t law only.
RMat innovations(InnovationLaw law, double df, long T, const RVec& sd, Rng& rng);

struct DgpSpec {
    Model model = Model::a;
    long T = 256;
    int L_max = kDefaultBasisSize;
    InnovationLaw law = InnovationLaw::gaussian;
    double df = 0.0;          // 0: model default (g: 19, h: 10)
    int burn_in = 200;
    std::uint64_t seed = 1;
    bool sqrt_abs_variance = false;  // model d/h: scale by sqrt|sigma^2(t)|
    int max_redraws = 100;

    void validate() const;
};

// Companion-matrix spectral radius of the VAR with the given lag operators.
double companion_radius(const RMat& A1, const RMat& A2);

FunctionalSeries simulate(const DgpSpec& spec);

} // namespace fdstat

#endif
