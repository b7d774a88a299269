#pragma once

#include <iosfwd>
#include <string>

#include "qsfunm/hodlr.hpp"

namespace qsfunm {

/// Text container for HodlrMatrixC, written depth-first:
///
///     HODLR-TEXT 1
///     LEAF m               followed by the m x m block
///     BRANCH m m1 m2 rTR rBL
///                          followed by TR.left, TR.right, BL.left, BL.right,
///                          then the two children
///
/// Every payload uses the shared matrix text format.
void write_hodlr(std::ostream& os, const HodlrMatrixC& h);
HodlrMatrixC read_hodlr(std::istream& is);

void save_hodlr(const std::string& path, const HodlrMatrixC& h);
HodlrMatrixC load_hodlr(const std::string& path);

}  // namespace qsfunm
