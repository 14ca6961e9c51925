#ifndef LEAFFLOW_CSVIO_HPP
#define LEAFFLOW_CSVIO_HPP

#include <string>
#include <vector>

namespace leafflow {

/// Column-oriented CSV with a header row.  Values print with 17
/// significant digits so re-ingestion reproduces the doubles bit-exactly.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

std::string format_double(double v);

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace leafflow

#endif
