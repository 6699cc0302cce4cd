#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rhc/errors.hpp"

// Serialization helpers. Number formatting goes through std::to_chars
// (shortest round-trip form, '.' decimal, no locale), so a given result
// always produces the same bytes. CSV uses '\n' line endings and leaves
// missing values empty.

namespace rhc::harness {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
        columns_ = header.size();
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::invalid_argument("CsvWriter: column mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
    std::size_t columns_ = 0;
};

inline std::string cell(double v) { return std::isnan(v) ? std::string() : format_double(v); }
inline std::string cell(long v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "1" : "0"; }
inline std::string cell(std::uint64_t v) { return std::to_string(v); }

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty())
        throw rhc::ConfigError("field '" + field + "' must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    for (const auto& r : j) {
        if (!r.is_array() || r.empty())
            throw rhc::ConfigError("field '" + field + "' rows must be non-empty arrays");
        if (cols < 0) cols = static_cast<Eigen::Index>(r.size());
        if (static_cast<Eigen::Index>(r.size()) != cols)
            throw rhc::ConfigError("field '" + field + "' must be rectangular");
    }
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index jc = 0; jc < cols; ++jc) {
            const auto& v = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(jc)];
            if (!v.is_number())
                throw rhc::ConfigError("field '" + field + "' entries must be numbers");
            M(i, jc) = v.get<double>();
        }
    return M;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace rhc::harness
