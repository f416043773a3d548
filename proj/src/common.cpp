#include "fdstat/common.hpp"

namespace fdstat {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::argument: return "argument";
    case ErrorKind::input: return "input";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::inconsistency: return "inconsistency";
    case ErrorKind::degenerate_spectrum: return "degenerate_spectrum";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::manifold: return "manifold";
    case ErrorKind::estimation: return "estimation";
    case ErrorKind::stability: return "stability";
    case ErrorKind::unstable_normalization: return "unstable_normalization";
    case ErrorKind::linear_algebra: return "linear_algebra";
    }
    return "unknown";
}

const char* to_string(Variant v)
{
    return v == Variant::eigen ? "eigen" : "fixed";
}

Variant parse_variant(const std::string& s)
{
    if (s == "eigen" || s == "e") return Variant::eigen;
    if (s == "fixed" || s == "f") return Variant::fixed;
    fail(ErrorKind::argument, "unknown variant '" + s + "' (expected eigen or fixed)");
}

} // namespace fdstat
