#include "pcicorr/csvio.hpp"

#include "pcicorr/rng.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pcicorr {

std::string format_double(double value) {
  // Shortest round-trip representation: try increasing precision until the
  // text parses back to the same bits.
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path,
                     const std::string& prefix) {
  std::ostringstream out;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c) out << ',';
    out << prefix << '_' << c;
  }
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  write_file(path, out.str());
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty CSV");
  const std::size_t cols = split_csv_line(line).size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != cols)
      throw std::runtime_error(path + ": ragged CSV row");
    for (const auto& f : fields) {
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(f, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": bad numeric field '" + f + "'");
      }
      if (pos != f.size())
        throw std::runtime_error(path + ": bad numeric field '" + f + "'");
      values.push_back(v);
    }
    ++rows;
  }
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = values[r * cols + c];
  return m;
}

void save_labels_csv(const Eigen::VectorXi& labels, const std::string& path) {
  std::ostringstream out;
  out << "label\n";
  for (Eigen::Index i = 0; i < labels.size(); ++i) out << labels(i) << '\n';
  write_file(path, out.str());
}

Eigen::VectorXi load_labels_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line)[0] != "label")
    throw std::runtime_error(path + ": expected 'label' header");
  std::vector<int> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(std::stoi(line));
  }
  Eigen::VectorXi labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) labels(i) = values[i];
  return labels;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string file_digest(const std::string& path) {
  const std::uint64_t h = fnv1a64(read_file(path));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pcicorr
