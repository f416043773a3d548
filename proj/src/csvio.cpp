#include "fdstat/csvio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fdstat {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool to_double(const std::string& s, double& v)
{
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e;
}

bool starts_with(const std::string& s, const std::string& prefix)
{
    return s.rfind(prefix, 0) == 0;
}

} // namespace

CsvTable parse_csv(std::istream& in)
{
    CsvTable t;
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> f = split(line);
        std::vector<double> vals(f.size());
        bool numeric = true;
        for (std::size_t i = 0; i < f.size(); ++i) numeric = numeric && to_double(f[i], vals[i]);
        if (!numeric) {
            require(rows.empty() && t.header.empty(), ErrorKind::input,
                    "non-numeric field on line " + std::to_string(lineno));
            t.header = f;
            width = f.size();
            continue;
        }
        if (width == 0) width = f.size();
        require(f.size() == width, ErrorKind::input,
                "line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                    " fields, expected " + std::to_string(width));
        for (double v : vals)
            require(std::isfinite(v), ErrorKind::input, "non-finite value on line " + std::to_string(lineno));
        rows.push_back(std::move(vals));
    }
    require(!rows.empty(), ErrorKind::input, "no data rows");
    t.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c) t.data(r, c) = rows[r][c];
    return t;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream f(path);
    require(f.good(), ErrorKind::input, "cannot open " + path);
    return parse_csv(f);
}

CsvLayout detect_layout(const CsvTable& table)
{
    if (table.header.empty()) return CsvLayout::coefficients;
    bool tau = true, coef = true;
    for (const std::string& h : table.header) {
        tau = tau && starts_with(h, "tau_");
        coef = coef && starts_with(h, "c");
    }
    if (tau) return CsvLayout::curves;
    if (coef) return CsvLayout::coefficients;
    fail(ErrorKind::input, "header must be all tau_* (curve samples) or all c* (coefficients)");
}

FunctionalSeries series_from_csv(const CsvTable& table, const BasisDescriptor& basis, bool demean_series)
{
    FunctionalSeries s;
    if (detect_layout(table) == CsvLayout::curves) {
        s = project_curves(table.data, basis);
    } else {
        s = make_series(table.data);
    }
    return demean_series ? demean(s) : s;
}

void write_series_csv(const FunctionalSeries& series, std::ostream& f)
{
    f.precision(17);
    for (int l = 0; l < series.n_basis(); ++l) f << (l ? "," : "") << 'c' << l + 1;
    f << '\n';
    for (long t = 0; t < series.T(); ++t) {
        for (int l = 0; l < series.n_basis(); ++l) f << (l ? "," : "") << series.coeffs(t, l);
        f << '\n';
    }
}

void write_series_csv(const FunctionalSeries& series, const std::string& path)
{
    std::ofstream f(path);
    require(f.good(), ErrorKind::input, "cannot open " + path + " for writing");
    write_series_csv(series, f);
}

} // namespace fdstat
