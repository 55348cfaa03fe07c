#include "mlyap/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "mlyap/random.hpp"

namespace mlyap {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
  out << text;
}

MatrixXd parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      cell = trim(cell);
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad matrix entry '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::ConfigError, "empty matrix");
  const std::size_t n = rows.size();
  MatrixXd A(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw Error(ErrorCode::ConfigError, "matrix CSV must be square");
    }
    for (std::size_t j = 0; j < n; ++j) A(i, j) = rows[i][j];
  }
  return A;
}

MatrixXd read_matrix_csv(const std::string& path) {
  return parse_matrix_csv(read_text_file(path));
}

std::string matrix_csv(const MatrixXd& A) {
  std::string out;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) out += ',';
      out += fmt(A(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string hash_hex(const std::string& text) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

std::string csv_metadata(const std::string& config_hash, std::uint64_t seed) {
  std::string out = "# tool=";
  out += kToolName;
  out += " version=";
  out += kToolVersion;
  out += "\n# config_hash=" + config_hash + "\n# seed=" + std::to_string(seed) +
         "\n";
  return out;
}

std::string series_csv(const MomentSeries& s) {
  std::string out = "t,p,estimate,stderr,flagged_runs\n";
  for (int t = 0; t <= s.t_max; ++t) {
    for (std::size_t k = 0; k < s.p_orders.size(); ++k) {
      out += std::to_string(t) + ',' + fmt(s.p_orders[k]) + ',' +
             fmt(s.estimates[t][k]) + ',' + fmt(s.stderr_[t][k]) + ',' +
             std::to_string(s.flagged_runs[t]) + '\n';
    }
  }
  return out;
}

}  // namespace mlyap
