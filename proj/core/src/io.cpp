#include "resetridge/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace resetridge {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    return line;
}

std::string csv_line(const std::vector<double>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += format_double(cells[i]);
    }
    return line;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << csv_line(header) << '\n';
    for (const auto& row : rows) out << csv_line(row) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell, const std::string& path, std::size_t lineno) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                    ": not a number: '" + cell + "'");
    }
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    if (pos != cell.size())
        throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                    ": trailing junk in number: '" + cell + "'");
    return v;
}

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open: " + path);
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty()) continue;
        if (table.header.empty()) {
            for (auto& c : split_line(line)) table.header.push_back(strip(c));
            continue;
        }
        const auto cells = split_line(line);
        if (cells.size() != table.header.size())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected " + std::to_string(table.header.size()) +
                                        " columns, got " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(strip(c), path, lineno));
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw std::invalid_argument(path + ": empty file");
    return table;
}

DesignData load_design_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    if (t.header.size() < 2)
        throw std::invalid_argument(path + ": need at least one feature column and 'y'");
    if (t.header.back() != "y")
        throw std::invalid_argument(path + ": last column must be named 'y'");
    if (t.rows.empty()) throw std::invalid_argument(path + ": no data rows");
    const long n = static_cast<long>(t.rows.size());
    const long d = static_cast<long>(t.header.size()) - 1;
    DesignData data;
    data.x.resize(n, d);
    data.y.resize(n);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < d; ++j) data.x(i, j) = t.rows[i][j];
        data.y[i] = t.rows[i][d];
    }
    return data;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("log_spaced: need 0 < lo < hi");
    if (n < 2) throw std::invalid_argument("log_spaced: need n >= 2");
    std::vector<double> g(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        g[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> lin_spaced(double lo, double hi, int n) {
    if (!(hi > lo)) throw std::invalid_argument("lin_spaced: need lo < hi");
    if (n < 2) throw std::invalid_argument("lin_spaced: need n >= 2");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace resetridge
