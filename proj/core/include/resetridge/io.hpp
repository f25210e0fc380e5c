#pragma once

#include <string>
#include <vector>

#include "resetridge/spectral.hpp"

namespace resetridge {

// Shortest-faithful text form of a double: %.17g, always round-trips.
std::string format_double(double v);

// One CSV line from already-formatted cells.
std::string csv_line(const std::vector<std::string>& cells);
std::string csv_line(const std::vector<double>& cells);

// Writes header + rows to path; throws std::runtime_error on I/O failure.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Regression data with header column names x1..xd,y (the label column must be
// last and named "y"). Throws std::invalid_argument on malformed content.
DesignData load_design_csv(const std::string& path);

// Parses a CSV of doubles with a header row; returns header + row-major data.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& path);

// log-spaced grid with n points from lo to hi inclusive
std::vector<double> log_spaced(double lo, double hi, int n);
// linearly spaced grid with n points from lo to hi inclusive
std::vector<double> lin_spaced(double lo, double hi, int n);

// FNV-1a hash of a string, hex-encoded; used to fingerprint configs in results
std::string fnv1a_hex(const std::string& text);

}  // namespace resetridge
