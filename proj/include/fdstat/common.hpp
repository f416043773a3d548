#ifndef FDSTAT_COMMON_HPP
#define FDSTAT_COMMON_HPP

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fdstat {

using cplx = std::complex<double>;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ErrorKind {
    argument,
    input,
    resolution,
    configuration,
    inconsistency,
    degenerate_spectrum,
    numerical,
    manifold,
    estimation,
    stability,
    unstable_normalization,
    linear_algebra,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Bad user input or configuration, as opposed to a numerical failure.
    bool is_input_error() const noexcept
    {
        return kind_ == ErrorKind::argument || kind_ == ErrorKind::input ||
               kind_ == ErrorKind::resolution || kind_ == ErrorKind::configuration;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what)
{
    if (!cond) fail(kind, what);
}

// Reduce any signed index into [0, n).
inline long wrap(long i, long n)
{
    long r = i % n;
    return r < 0 ? r + n : r;
}

// Centered representative of i mod n in (-n/2, n/2].
inline long centered(long i, long n)
{
    long r = wrap(i, n);
    return r > n / 2 ? r - n : r;
}

enum class Variant { eigen, fixed };

const char* to_string(Variant v);
Variant parse_variant(const std::string& s);

} // namespace fdstat

#endif
