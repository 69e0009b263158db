#pragma once

// File formats:
//   matrix CSV   "rows,cols" header, then one comma-separated line per row,
//                17 significant digits.
//   phase CSV    "N,K,L,S1,S2,trials,successes,success_rate" rows and a
//                trailing "# line: C=<value>" comment.
//   PGM          P2 or P5 with maxval <= 255 on input, P5 on output.

#include "bhull/imaging.hpp"
#include "bhull/lab.hpp"
#include "bhull/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bhull::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view s, const std::string& where) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw FormatError(where + ": invalid number '" + std::string(s) + "'");
  return v;
}

inline long parse_long(std::string_view s, const std::string& where) {
  s = trim(s);
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError(where + ": invalid integer '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class Stream>
Stream open_or_throw(const std::string& path, std::ios::openmode mode) {
  Stream f(path, mode);
  if (!f) throw FormatError("cannot open " + path);
  return f;
}

}  // namespace detail

inline void write_matrix_csv(std::ostream& os, const Matrix& M) {
  os << M.rows() << ',' << M.cols() << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ',';
      os << format_double(M(i, j));
    }
    os << '\n';
  }
}

inline Matrix read_matrix_csv(std::istream& is, const std::string& name = "matrix") {
  std::string line;
  if (!std::getline(is, line)) throw FormatError(name + ": missing header");
  const auto head = detail::split(line, ',');
  if (head.size() != 2) throw FormatError(name + ": header must be 'rows,cols'");
  const long rows = detail::parse_long(head[0], name);
  const long cols = detail::parse_long(head[1], name);
  if (rows < 0 || cols < 0) throw FormatError(name + ": negative dimension");
  Matrix M(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(is, line))
      throw FormatError(name + ": expected " + std::to_string(rows) + " rows, got " +
                        std::to_string(i));
    const auto fields = detail::split(line, ',');
    if (long(fields.size()) != cols)
      throw FormatError(name + ": row " + std::to_string(i + 1) + " has " +
                        std::to_string(fields.size()) + " values, expected " +
                        std::to_string(cols));
    for (long j = 0; j < cols; ++j) M(i, j) = detail::parse_double(fields[j], name);
  }
  while (std::getline(is, line))
    if (!detail::trim(line).empty()) throw FormatError(name + ": trailing data after last row");
  return M;
}

inline void save_matrix_csv(const std::string& path, const Matrix& M) {
  auto f = detail::open_or_throw<std::ofstream>(path, std::ios::out | std::ios::trunc);
  write_matrix_csv(f, M);
  if (!f) throw FormatError("write failed: " + path);
}

inline Matrix load_matrix_csv(const std::string& path) {
  auto f = detail::open_or_throw<std::ifstream>(path, std::ios::in);
  return read_matrix_csv(f, path);
}

// Accepts an n x 1 or 1 x n matrix.
inline Vector load_vector_csv(const std::string& path) {
  const Matrix M = load_matrix_csv(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw FormatError(path + ": expected a vector (n x 1)");
}

inline void save_vector_csv(const std::string& path, const Vector& v) { save_matrix_csv(path, v); }

inline void write_phase_csv(std::ostream& os, const std::vector<PhaseCell>& cells,
                            double line_constant) {
  os << "N,K,L,S1,S2,trials,successes,success_rate\n";
  for (const auto& c : cells)
    os << c.N << ',' << c.K << ',' << c.L << ',' << c.S1 << ',' << c.S2 << ',' << c.trials << ','
       << c.successes << ',' << format_double(c.success_rate()) << '\n';
  os << "# line: C=" << format_double(line_constant) << '\n';
}

inline std::vector<PhaseCell> read_phase_csv(std::istream& is, double* line_constant = nullptr) {
  std::string line;
  if (!std::getline(is, line) || detail::trim(line) != "N,K,L,S1,S2,trials,successes,success_rate")
    throw FormatError("phase csv: bad header");
  std::vector<PhaseCell> cells;
  while (std::getline(is, line)) {
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    if (t.starts_with("# line: C=")) {
      if (line_constant) *line_constant = detail::parse_double(t.substr(10), "phase csv");
      continue;
    }
    const auto f = detail::split(t, ',');
    if (f.size() != 8) throw FormatError("phase csv: expected 8 fields");
    PhaseCell c;
    c.N = int(detail::parse_long(f[0], "phase csv"));
    c.K = int(detail::parse_long(f[1], "phase csv"));
    c.L = int(detail::parse_long(f[2], "phase csv"));
    c.S1 = int(detail::parse_long(f[3], "phase csv"));
    c.S2 = int(detail::parse_long(f[4], "phase csv"));
    c.trials = int(detail::parse_long(f[5], "phase csv"));
    c.successes = int(detail::parse_long(f[6], "phase csv"));
    cells.push_back(c);
  }
  return cells;
}

namespace detail {

inline void skip_pnm_space(std::istream& is) {
  while (true) {
    const int c = is.peek();
    if (c == '#') {
      std::string comment;
      std::getline(is, comment);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      is.get();
    } else {
      return;
    }
  }
}

inline long read_pnm_int(std::istream& is, const char* what) {
  skip_pnm_space(is);
  long v = -1;
  if (!(is >> v) || v < 0) throw FormatError(std::string("pgm: invalid ") + what);
  return v;
}

}  // namespace detail

inline GrayImage read_pgm(std::istream& is) {
  char magic[2] = {0, 0};
  if (!is.read(magic, 2) || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
    throw FormatError("pgm: expected P2 or P5 magic number");
  const long width = detail::read_pnm_int(is, "width");
  const long height = detail::read_pnm_int(is, "height");
  const long maxval = detail::read_pnm_int(is, "maxval");
  if (width < 1 || height < 1) throw FormatError("pgm: empty image");
  if (maxval < 1 || maxval > 255) throw FormatError("pgm: maxval must be in [1, 255]");

  GrayImage img = GrayImage::filled(int(height), int(width), 0.0);
  if (magic[1] == '5') {
    // Exactly one whitespace byte separates maxval from the raster.
    is.get();
    std::vector<unsigned char> raster(size_t(width) * height);
    if (!is.read(reinterpret_cast<char*>(raster.data()), std::streamsize(raster.size())))
      throw FormatError("pgm: truncated raster");
    for (long r = 0; r < height; ++r)
      for (long c = 0; c < width; ++c) {
        const unsigned v = raster[size_t(r) * width + c];
        if (long(v) > maxval) throw FormatError("pgm: pixel exceeds maxval");
        img.at(int(r), int(c)) = v;
      }
  } else {
    for (long r = 0; r < height; ++r)
      for (long c = 0; c < width; ++c) {
        const long v = detail::read_pnm_int(is, "pixel");
        if (v > maxval) throw FormatError("pgm: pixel exceeds maxval");
        img.at(int(r), int(c)) = double(v);
      }
  }
  return img;
}

// P5, maxval 255; pixels rounded and clamped to [0, 255].
inline void write_pgm(std::ostream& os, const GrayImage& img) {
  img.validate();
  os << "P5\n" << img.q << ' ' << img.p << "\n255\n";
  std::vector<unsigned char> raster(size_t(img.p) * img.q);
  for (int r = 0; r < img.p; ++r)
    for (int c = 0; c < img.q; ++c)
      raster[size_t(r) * img.q + c] =
          static_cast<unsigned char>(std::clamp(std::lround(img.at(r, c)), 0L, 255L));
  os.write(reinterpret_cast<const char*>(raster.data()), std::streamsize(raster.size()));
}

inline GrayImage load_pgm(const std::string& path) {
  auto f = detail::open_or_throw<std::ifstream>(path, std::ios::in | std::ios::binary);
  return read_pgm(f);
}

inline void save_pgm(const std::string& path, const GrayImage& img) {
  auto f = detail::open_or_throw<std::ofstream>(path, std::ios::out | std::ios::binary | std::ios::trunc);
  write_pgm(f, img);
  if (!f) throw FormatError("write failed: " + path);
}

}  // namespace bhull::io
