#include "regret/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace regret {

void write_matrix(std::ostream& out, const Mat& M) {
  out << M.rows() << ' ' << M.cols() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out << (j ? " " : "") << M(i, j);
    out << '\n';
  }
}

void write_matrix(const std::string& path, const Mat& M) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_matrix(f, M);
}

Mat read_matrix(std::istream& in) {
  long rows = -1, cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw std::runtime_error("matrix file: bad header");
  Mat M(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      if (!(in >> M(i, j))) throw std::runtime_error("matrix file: expected " + std::to_string(rows * cols) + " entries");
  return M;
}

Mat read_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return read_matrix(f);
}

}  // namespace regret
