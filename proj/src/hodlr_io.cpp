#include "qsfunm/hodlr_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "qsfunm/matrix_io.hpp"

namespace qsfunm {

namespace {

constexpr const char* kMagic = "HODLR-TEXT";

void write_node(std::ostream& os, const HodlrMatrixC& h) {
  if (h.is_leaf()) {
    os << "LEAF " << h.size() << '\n';
    write_matrix(os, h.dense_block());
    return;
  }
  os << "BRANCH " << h.size() << ' ' << h.top_left().size() << ' ' << h.bottom_right().size()
     << ' ' << h.top_right().rank() << ' ' << h.bottom_left().rank() << '\n';
  write_matrix(os, h.top_right().left);
  write_matrix(os, h.top_right().right);
  write_matrix(os, h.bottom_left().left);
  write_matrix(os, h.bottom_left().right);
  write_node(os, h.top_left());
  write_node(os, h.bottom_right());
}

DenseMatrix read_sized(std::istream& is, Index rows, Index cols, const char* what) {
  DenseMatrix m = read_matrix(is);
  if (m.rows() != rows || m.cols() != cols) {
    throw InvalidInput(std::string("HODLR file: ") + what + " has shape " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                       ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  return m;
}

HodlrMatrixC read_node(std::istream& is) {
  std::string tag;
  if (!(is >> tag)) throw InvalidInput("HODLR file: truncated node");
  if (tag == "LEAF") {
    long m = -1;
    if (!(is >> m) || m < 0) throw InvalidInput("HODLR file: bad LEAF size");
    return HodlrMatrixC::leaf(read_sized(is, m, m, "leaf block"));
  }
  if (tag != "BRANCH") throw InvalidInput("HODLR file: unknown node tag '" + tag + "'");
  long m = -1, m1 = -1, m2 = -1, rtr = -1, rbl = -1;
  if (!(is >> m >> m1 >> m2 >> rtr >> rbl) || m1 < 0 || m2 < 0 || rtr < 0 || rbl < 0 ||
      m != m1 + m2) {
    throw InvalidInput("HODLR file: bad BRANCH header");
  }
  DenseMatrix trl = read_sized(is, m1, rtr, "top-right left factor");
  DenseMatrix trr = read_sized(is, m2, rtr, "top-right right factor");
  DenseMatrix bll = read_sized(is, m2, rbl, "bottom-left left factor");
  DenseMatrix blr = read_sized(is, m1, rbl, "bottom-left right factor");
  HodlrMatrixC tl = read_node(is);
  HodlrMatrixC br = read_node(is);
  if (tl.size() != m1 || br.size() != m2) throw InvalidInput("HODLR file: child size mismatch");
  return HodlrMatrixC::branch(std::move(tl), std::move(br),
                              LowRankBlock<Complex>(std::move(trl), std::move(trr)),
                              LowRankBlock<Complex>(std::move(bll), std::move(blr)));
}

}  // namespace

void write_hodlr(std::ostream& os, const HodlrMatrixC& h) {
  os << kMagic << " 1\n";
  write_node(os, h);
}

HodlrMatrixC read_hodlr(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != kMagic || version != 1) {
    throw InvalidInput("not a HODLR-TEXT 1 file");
  }
  return read_node(is);
}

void save_hodlr(const std::string& path, const HodlrMatrixC& h) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot open '" + path + "' for writing");
  write_hodlr(os, h);
}

HodlrMatrixC load_hodlr(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open '" + path + "'");
  return read_hodlr(is);
}

}  // namespace qsfunm
