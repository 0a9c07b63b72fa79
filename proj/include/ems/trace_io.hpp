#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ems/simulate.hpp"

namespace ems {

/// Columns of a trace CSV: t, road, y, second state, third state, u.
struct CsvTrace {
    std::vector<std::string> header;
    std::vector<double> t;
    std::vector<double> road;
    std::vector<double> y;
    std::vector<double> state2;
    std::vector<double> state3;
    std::vector<double> u;

    std::size_t size() const { return t.size(); }
};

/// Header is `t,road,y,body_velocity,x3,u` for the physical realization and
/// `t,road,y,x2,x3,u` for the companion one. Values use the shortest
/// round-trip decimal form.
void write_trace_csv(const SimTrace& trace, std::ostream& out);
std::string trace_csv_header(Realization r);

/// Throws DomainError on malformed rows.
CsvTrace read_trace_csv(std::istream& in);

} // namespace ems
