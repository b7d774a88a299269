#pragma once

#include <iosfwd>
#include <string>

#include "qsfunm/dense.hpp"

namespace qsfunm {

/// Text format shared by every file the library reads or writes:
///
///     m n
///     re,im re,im ...   (n pairs per line, m lines)
///
/// Writers emit 17 significant digits so a write/read cycle is exact.
void write_matrix(std::ostream& os, const DenseMatrix& m);
DenseMatrix read_matrix(std::istream& is);

void save_matrix(const std::string& path, const DenseMatrix& m);
DenseMatrix load_matrix(const std::string& path);

/// Parses "re,im" or a bare real "re".
Complex parse_complex(const std::string& token);
std::string format_complex(Complex z);
std::string format_real(double x);

}  // namespace qsfunm
