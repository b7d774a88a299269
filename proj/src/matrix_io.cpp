#include "qsfunm/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace qsfunm {

namespace {

double parse_double(const std::string& s, const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput("malformed number in token '" + token + "'");
  }
  if (used != s.size()) throw InvalidInput("malformed number in token '" + token + "'");
  return v;
}

}  // namespace

Complex parse_complex(const std::string& token) {
  const auto comma = token.find(',');
  if (comma == std::string::npos) return {parse_double(token, token), 0.0};
  return {parse_double(token.substr(0, comma), token),
          parse_double(token.substr(comma + 1), token)};
}

std::string format_real(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string format_complex(Complex z) {
  return format_real(z.real()) + "," + format_real(z.imag());
}

void write_matrix(std::ostream& os, const DenseMatrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ' ';
      os << format_complex(m(i, j));
    }
    os << '\n';
  }
}

DenseMatrix read_matrix(std::istream& is) {
  long rows = -1, cols = -1;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) {
    throw InvalidInput("matrix header must be 'm n' with nonnegative sizes");
  }
  DenseMatrix m(rows, cols);
  std::string token;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(is >> token)) {
        throw InvalidInput("matrix data truncated at entry (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
      }
      m(i, j) = parse_complex(token);
    }
  }
  return m;
}

void save_matrix(const std::string& path, const DenseMatrix& m) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot open '" + path + "' for writing");
  write_matrix(os, m);
}

DenseMatrix load_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open '" + path + "'");
  return read_matrix(is);
}

}  // namespace qsfunm
