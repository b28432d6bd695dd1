// SPDX-License-Identifier: Apache-2.0
//
// File I/O helpers shared by the CLI and persistence code: fixed-precision
// number formatting (12 significant digits, so repeated runs diff byte-equal),
// dense matrix CSV round-trip, and atomic file writes (temp + rename).

#pragma once

#include <Eigen/Dense>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavegc {

/// Formats a double with 12 significant digits.
inline std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::string(buf);
}

/// Writes `content` to `path` atomically: temp file in the same directory,
/// then rename over the target.
inline void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Serializes a matrix as CSV, one row per line, `# comment` lines allowed.
inline std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::string& header = "") {
    std::ostringstream out;
    if (!header.empty()) out << header << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << fmt12(m(i, j));
        }
        out << "\n";
    }
    return out.str();
}

/// Parses numeric CSV. Skips blank lines, `#` comments, and a single
/// non-numeric header row if present.
inline Eigen::MatrixXd matrix_from_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
                if (pos != cell.size()) { numeric = false; break; }
                row.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty()) continue;  // header row
            throw std::runtime_error("csv: non-numeric cell at line " + std::to_string(lineno));
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("csv: ragged row at line " + std::to_string(lineno));
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

inline Eigen::MatrixXd matrix_from_csv_file(const std::string& path) {
    return matrix_from_csv(read_file(path));
}

}  // namespace wavegc
