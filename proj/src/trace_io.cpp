#include "ems/trace_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "ems/errors.hpp"
#include "ems/format.hpp"

namespace ems {

std::string trace_csv_header(Realization r) {
    return r == Realization::physical ? "t,road,y,body_velocity,x3,u" : "t,road,y,x2,x3,u";
}

void write_trace_csv(const SimTrace& trace, std::ostream& out) {
    out << trace_csv_header(trace.realization) << '\n';
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const Vector& x = trace.states[k];
        if (x.size() < 3) {
            throw DimensionError("trace CSV needs at least three plant states");
        }
        out << format_double(trace.t[k]) << ',' << format_double(trace.road[k]) << ','
            << format_double(trace.y[k]) << ',' << format_double(x(1)) << ','
            << format_double(x(2)) << ',' << format_double(trace.u[k]) << '\n';
    }
}

CsvTrace read_trace_csv(std::istream& in) {
    CsvTrace out;
    std::string line;
    if (!std::getline(in, line)) {
        throw DomainError("trace CSV is empty");
    }
    {
        std::istringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) {
            out.header.push_back(col);
        }
    }
    if (out.header.size() != 6) {
        throw DomainError("trace CSV header must have 6 columns");
    }
    std::vector<double>* cols[] = {&out.t, &out.road, &out.y, &out.state2, &out.state3, &out.u};
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        std::size_t pos = 0;
        for (std::size_t c = 0; c < 6; ++c) {
            const std::size_t end = c + 1 < 6 ? line.find(',', pos) : line.size();
            if (end == std::string::npos) {
                throw DomainError("trace CSV row " + std::to_string(row) + " has too few fields");
            }
            double v = 0.0;
            const auto res = std::from_chars(line.data() + pos, line.data() + end, v);
            if (res.ec != std::errc() || res.ptr != line.data() + end) {
                throw DomainError("trace CSV row " + std::to_string(row) + " has a bad number");
            }
            cols[c]->push_back(v);
            pos = end + 1;
        }
    }
    return out;
}

} // namespace ems
