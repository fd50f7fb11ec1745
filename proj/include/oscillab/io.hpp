#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace oscillab::io {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Shortest decimal string that round-trips the given binary64 value.
std::string format_double(double value);

/// FNV-1a 64-bit checksum, rendered as 16 hex digits.
std::string checksum_hex(std::string_view data);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

/// Dense matrix as comma-separated rows, one row per line.
Matrix read_matrix_csv(const std::filesystem::path& path);
std::string matrix_csv(const Matrix& m);

/// One CSV row from doubles, using round-trip formatting.
std::string csv_row(const std::vector<double>& cells);

}  // namespace oscillab::io
