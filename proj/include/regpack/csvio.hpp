#pragma once

#include <string>
#include <vector>

namespace regpack::csvio {

/// RFC-4180 CSV writer: comma-separated, CRLF line endings, header row.
/// Times are rendered with 9 significant digits, data with 12.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(double t, const std::vector<double>& values);
    void write(const std::string& path) const;
    std::string to_string() const;

private:
    std::vector<std::string> header_;
    std::vector<std::pair<double, std::vector<double>>> rows_;
};

std::string format_sig(double v, int significant);

} // namespace regpack::csvio
