#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rie {

// Repo-wide matrix formats.
//
//   CSV:    first line "rows,cols", then row-major comma-separated float64.
//   Binary: magic "RIEM", little-endian u32 rows, u32 cols,
//           row-major little-endian f64.

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void save_matrix_csv(const Eigen::MatrixXd& m, std::ostream& os) {
    os << m.rows() << "," << m.cols() << "\n";
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j) os << ',';
            os << buf;
        }
        os << '\n';
    }
}

inline Eigen::MatrixXd load_matrix_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw io_error("empty matrix file");
    long rows = 0, cols = 0;
    if (std::sscanf(line.c_str(), "%ld,%ld", &rows, &cols) != 2 || rows <= 0 ||
        cols <= 0)
        throw io_error("bad matrix header: " + line);
    Eigen::MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (!std::getline(is, line))
            throw io_error("truncated matrix file at row " + std::to_string(i));
        std::stringstream ss(line);
        std::string cell;
        for (long j = 0; j < cols; ++j) {
            if (!std::getline(ss, cell, ','))
                throw io_error("short row " + std::to_string(i));
            m(i, j) = std::stod(cell);
        }
    }
    return m;
}

inline void save_matrix_riem(const Eigen::MatrixXd& m, std::ostream& os) {
    static_assert(sizeof(double) == 8);
    os.write("RIEM", 4);
    const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
    os.write(reinterpret_cast<const char*>(&rows), 4);
    os.write(reinterpret_cast<const char*>(&cols), 4);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            os.write(reinterpret_cast<const char*>(&v), 8);
        }
}

inline Eigen::MatrixXd load_matrix_riem(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "RIEM", 4) != 0)
        throw io_error("bad RIEM magic");
    std::uint32_t rows = 0, cols = 0;
    is.read(reinterpret_cast<char*>(&rows), 4);
    is.read(reinterpret_cast<char*>(&cols), 4);
    if (!is || rows == 0 || cols == 0) throw io_error("bad RIEM header");
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t j = 0; j < cols; ++j) {
            double v;
            is.read(reinterpret_cast<char*>(&v), 8);
            if (!is) throw io_error("truncated RIEM file");
            m(i, j) = v;
        }
    return m;
}

// Format is detected on read (magic bytes) and chosen on write by the
// ".riem" extension.
inline bool has_riem_extension(const std::string& path) {
    return path.size() >= 5 && path.compare(path.size() - 5, 5, ".riem") == 0;
}

inline Eigen::MatrixXd load_matrix(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path);
    char magic[4] = {};
    f.read(magic, 4);
    f.seekg(0);
    if (std::memcmp(magic, "RIEM", 4) == 0) return load_matrix_riem(f);
    return load_matrix_csv(f);
}

inline void save_matrix(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path + " for writing");
    if (has_riem_extension(path))
        save_matrix_riem(m, f);
    else
        save_matrix_csv(m, f);
}

}  // namespace rie
