#ifndef FDSTAT_CSVIO_HPP
#define FDSTAT_CSVIO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "fdstat/funcseries.hpp"

namespace fdstat {

struct CsvTable {
    std::vector<std::string> header;  // empty when the first row is numeric
    RMat data;
};

// Comma separated, one row per line. A first row with any non-numeric field
// is taken as the header. Ragged or non-numeric rows raise an input error.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

enum class CsvLayout { coefficients, curves };

// Header columns tau_* are curve samples, c* (or no header) basis coefficients.
CsvLayout detect_layout(const CsvTable& table);

// Curves are projected onto the basis; coefficient files take their basis size
// from the column count. The result is demeaned unless asked not to.
FunctionalSeries series_from_csv(const CsvTable& table, const BasisDescriptor& basis,
                                 bool demean_series = true);

void write_series_csv(const FunctionalSeries& series, std::ostream& out);
void write_series_csv(const FunctionalSeries& series, const std::string& path);

} // namespace fdstat

#endif
