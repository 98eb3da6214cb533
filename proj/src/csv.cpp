#include "pekit/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace pekit {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string& text, const std::filesystem::path& path, size_t line_no) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) {
        ++begin;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    while (ptr != end && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) {
        ++ptr;
    }
    if (ec != std::errc() || ptr != end) {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": cannot parse value '" + text + "'");
    }
    return value;
}

} // namespace

TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }

    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw IoError(path.string() + ":1: empty file, expected header k,z1,...");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "k") {
        throw IoError(path.string() + ":1: bad header '" + line +
                      "', expected k,z1,...,z<eta>");
    }
    for (size_t j = 1; j < header.size(); ++j) {
        if (header[j] != "z" + std::to_string(j)) {
            throw IoError(path.string() + ":1: bad header column '" + header[j] +
                          "', expected z" + std::to_string(j));
        }
    }
    const Eigen::Index eta = static_cast<Eigen::Index>(header.size() - 1);

    std::vector<Eigen::VectorXd> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != eta + 1) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(eta + 1) + " fields, got " +
                          std::to_string(fields.size()));
        }
        Eigen::VectorXd sample(eta);
        for (Eigen::Index j = 0; j < eta; ++j) {
            sample(j) = parse_double(fields[static_cast<size_t>(j) + 1], path, line_no);
        }
        rows.push_back(std::move(sample));
    }
    if (rows.empty()) {
        throw IoError(path.string() + ": no samples");
    }

    Eigen::MatrixXd samples(eta, static_cast<Eigen::Index>(rows.size()));
    for (Eigen::Index k = 0; k < samples.cols(); ++k) {
        samples.col(k) = rows[static_cast<size_t>(k)];
    }
    return TimeSeries(std::move(samples));
}

void write_timeseries_csv(const TimeSeries& z, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "k";
    for (Eigen::Index j = 1; j <= z.dim(); ++j) {
        out << ",z" << j;
    }
    out << "\n";
    char buf[64];
    for (Eigen::Index k = 0; k < z.length(); ++k) {
        out << k;
        for (Eigen::Index j = 0; j < z.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", z.samples()(j, k));
            out << ',' << buf;
        }
        out << "\n";
    }
    write_file_atomic(path, out.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        }
        out << content;
        if (!out) {
            throw IoError("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                      "': " + ec.message());
    }
}

} // namespace pekit
