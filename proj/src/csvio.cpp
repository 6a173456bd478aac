#include "regpack/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace regpack::csvio {

std::string format_sig(double v, int significant) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(double t, const std::vector<double>& values) {
    if (values.size() + 1 != header_.size())
        throw std::runtime_error("CsvWriter: row width does not match header");
    rows_.emplace_back(t, values);
}

std::string CsvWriter::to_string() const {
    std::ostringstream out;
    for (size_t i = 0; i < header_.size(); ++i) {
        if (i) out << ',';
        out << header_[i];
    }
    out << "\r\n";
    for (const auto& [t, vals] : rows_) {
        out << format_sig(t, 9);
        for (double v : vals) out << ',' << format_sig(v, 12);
        out << "\r\n";
    }
    return out.str();
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("CsvWriter: cannot open " + path);
    f << to_string();
}

} // namespace regpack::csvio
