#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace pcicorr {

/// Formats a double so that parsing the text recovers the exact value
/// (shortest representation up to 17 significant digits).
std::string format_double(double value);

/// Writes a matrix as CSV with header <prefix>_0,...,<prefix>_{cols-1} and
/// one row per line (LF endings).
void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path,
                     const std::string& prefix = "col");

/// Reads a CSV written by save_matrix_csv; the header row is validated to
/// have one field per column and then discarded.
Eigen::MatrixXd load_matrix_csv(const std::string& path);

/// Integer column with header "label", one value per line.
void save_labels_csv(const Eigen::VectorXi& labels, const std::string& path);
Eigen::VectorXi load_labels_csv(const std::string& path);

/// Reads a whole file into memory; throws std::runtime_error if missing.
std::string read_file(const std::string& path);

/// Writes bytes to a file, creating parent directories as needed.
void write_file(const std::string& path, const std::string& bytes);

/// FNV-1a 64-bit digest of a file's bytes, as 16 lowercase hex digits.
std::string file_digest(const std::string& path);

/// Splits a line on commas; fields are not trimmed.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace pcicorr
