#pragma once

/** @file matrix_market.hpp
    @brief Matrix Market I/O.

    SparseSymMatrix is written as `coordinate real symmetric` (lower triangle,
    as the format prescribes) and read from `coordinate real symmetric` or
    `coordinate real general` (the latter must be numerically symmetric).
    Rectangular dense blocks (near-kernel bases, coarse bases) use
    `coordinate real general` for sparse-ish content or `array real general`.
*/

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"
#include "geneo/core/sparse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace geneo::mm {

namespace detail {

struct Header {
  std::string format;    // coordinate | array
  std::string field;     // real | integer | pattern
  std::string symmetry;  // general | symmetric
};

inline std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline Header read_header(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line)) throw ParseError("Matrix Market: empty input");
  std::istringstream hs(line);
  std::string banner, object;
  Header h;
  hs >> banner >> object >> h.format >> h.field >> h.symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") throw ParseError("Matrix Market: bad banner '" + line + "'");
  h.format = lower(h.format);
  h.field = lower(h.field);
  h.symmetry = lower(h.symmetry);
  if (h.format != "coordinate" && h.format != "array") throw ParseError("Matrix Market: unsupported format '" + h.format + "'");
  if (h.field != "real" && h.field != "integer" && h.field != "double" && h.field != "pattern")
    throw ParseError("Matrix Market: unsupported field '" + h.field + "'");
  if (h.symmetry != "general" && h.symmetry != "symmetric") throw ParseError("Matrix Market: unsupported symmetry '" + h.symmetry + "'");
  if (h.format == "array" && h.field == "pattern") throw ParseError("Matrix Market: pattern arrays are not valid");
  return h;
}

inline std::string next_data_line(std::istream& in)
{
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return line;
  }
  throw ParseError("Matrix Market: unexpected end of input");
}

inline void write_value(std::ostream& out, double v) { out << std::setprecision(17) << v; }

} // namespace detail

struct CoordinateData {
  Index rows = 0;
  Index cols = 0;
  bool symmetric = false;
  std::vector<Triplet> entries; // zero-based
};

inline CoordinateData read_coordinate(std::istream& in)
{
  const auto h = detail::read_header(in);
  if (h.format != "coordinate") throw ParseError("Matrix Market: expected coordinate format");
  std::istringstream size_line(detail::next_data_line(in));
  long long rows = 0, cols = 0, nnz = 0;
  if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) throw ParseError("Matrix Market: bad size line");
  CoordinateData d;
  d.rows = rows;
  d.cols = cols;
  d.symmetric = h.symmetry == "symmetric";
  if (d.symmetric && rows != cols) throw ParseError("Matrix Market: symmetric matrix must be square");
  d.entries.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k) {
    std::istringstream ls(detail::next_data_line(in));
    long long r = 0, c = 0;
    double v = 1.0;
    if (!(ls >> r >> c)) throw ParseError("Matrix Market: bad entry line " + std::to_string(k + 1));
    if (h.field != "pattern" && !(ls >> v)) throw ParseError("Matrix Market: missing value on entry line " + std::to_string(k + 1));
    if (r < 1 || c < 1 || r > rows || c > cols) throw ParseError("Matrix Market: entry index out of range on entry line " + std::to_string(k + 1));
    d.entries.push_back({static_cast<Index>(r - 1), static_cast<Index>(c - 1), v});
  }
  return d;
}

/// Read a symmetric sparse matrix. A `general` file is accepted if it is
/// symmetric to 1e-14 relative; its upper triangle is kept.
inline SparseSymMatrix read_sparse_sym(std::istream& in)
{
  const auto d = read_coordinate(in);
  if (d.rows != d.cols) throw ParseError("Matrix Market: symmetric matrix must be square");
  SparseSymMatrix a(d.rows);
  if (d.symmetric) {
    for (const auto& t : d.entries) a.add(t.row, t.col, t.value);
    a.finalize();
    return a;
  }
  SparseSymMatrix upper(d.rows), lower_part(d.rows);
  for (const auto& t : d.entries) {
    if (t.row <= t.col) upper.add(t.row, t.col, t.value);
    if (t.row >= t.col) lower_part.add(t.col, t.row, t.value);
  }
  upper.finalize();
  lower_part.finalize();
  const auto ue = upper.upper_entries();
  const auto le = lower_part.upper_entries();
  double scale = 0.0;
  for (const auto& t : ue) scale = std::max(scale, std::abs(t.value));
  auto mismatch = [&](const SparseSymMatrix& x, const std::vector<Triplet>& entries) {
    for (const auto& t : entries)
      if (std::abs(x.coeff(t.row, t.col) - t.value) > 1e-14 * scale) return true;
    return false;
  };
  if (mismatch(lower_part, ue) || mismatch(upper, le)) throw ParseError("Matrix Market: general matrix is not symmetric");
  return upper;
}

inline void write_sparse_sym(std::ostream& out, const SparseSymMatrix& a, const std::string& comment = {})
{
  const auto entries = a.upper_entries();
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  if (!comment.empty()) out << "% " << comment << "\n";
  out << a.dim() << " " << a.dim() << " " << entries.size() << "\n";
  for (const auto& t : entries) {
    // lower triangle: (col, row)
    out << t.col + 1 << " " << t.row + 1 << " ";
    detail::write_value(out, t.value);
    out << "\n";
  }
}

/// Write a rectangular matrix as `coordinate real general`, skipping exact zeros.
inline void write_coordinate_general(std::ostream& out, const Matrix& m, const std::string& comment = {})
{
  std::size_t nnz = 0;
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      if (m(r, c) != 0.0) ++nnz;
  out << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) out << "% " << comment << "\n";
  out << m.rows() << " " << m.cols() << " " << nnz << "\n";
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      if (m(r, c) != 0.0) {
        out << r + 1 << " " << c + 1 << " ";
        detail::write_value(out, m(r, c));
        out << "\n";
      }
}

inline void write_array(std::ostream& out, const Matrix& m, const std::string& comment = {})
{
  out << "%%MatrixMarket matrix array real general\n";
  if (!comment.empty()) out << "% " << comment << "\n";
  out << m.rows() << " " << m.cols() << "\n";
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r) {
      detail::write_value(out, m(r, c));
      out << "\n";
    }
}

/// Read any supported file into a dense matrix (symmetric files are expanded).
inline Matrix read_dense(std::istream& in)
{
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream probe(text);
  const auto h = detail::read_header(probe);
  std::istringstream body(text);
  if (h.format == "coordinate") {
    const auto d = read_coordinate(body);
    Matrix m = Matrix::Zero(d.rows, d.cols);
    for (const auto& t : d.entries) {
      m(t.row, t.col) += t.value;
      if (d.symmetric && t.row != t.col) m(t.col, t.row) += t.value;
    }
    return m;
  }
  detail::read_header(body);
  std::istringstream size_line(detail::next_data_line(body));
  long long rows = 0, cols = 0;
  if (!(size_line >> rows >> cols) || rows < 0 || cols < 0) throw ParseError("Matrix Market: bad array size line");
  if (h.symmetry == "symmetric" && rows != cols) throw ParseError("Matrix Market: symmetric array must be square");
  Matrix m = Matrix::Zero(rows, cols);
  for (long long c = 0; c < cols; ++c)
    for (long long r = (h.symmetry == "symmetric" ? c : 0); r < rows; ++r) {
      std::istringstream ls(detail::next_data_line(body));
      double v = 0.0;
      if (!(ls >> v)) throw ParseError("Matrix Market: bad array value");
      m(r, c) = v;
      if (h.symmetry == "symmetric") m(c, r) = v;
    }
  return m;
}

inline SparseSymMatrix read_sparse_sym_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ParseError("Matrix Market: cannot open '" + path + "'");
  return read_sparse_sym(in);
}

inline Matrix read_dense_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ParseError("Matrix Market: cannot open '" + path + "'");
  return read_dense(in);
}

} // namespace geneo::mm
