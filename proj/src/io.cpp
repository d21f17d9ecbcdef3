#include "arknls/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace arknls {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank_or_comment(const std::string& line) {
  const auto it = std::find_if_not(line.begin(), line.end(),
                                   [](unsigned char c) { return std::isspace(c); });
  return it == line.end() || *it == '%';
}

class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : path_(path.string()), in_(path) {
    if (!in_) throw std::runtime_error("cannot open " + path_);
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!blank_or_comment(line)) return true;
    }
    return false;
  }
  bool next_raw(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_, line_no_, what);
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

std::size_t parse_count(const LineReader& reader, const std::string& tok) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (errno != 0 || end == tok.c_str() || *end != '\0' || v < 0) {
    reader.fail("expected a nonnegative integer, got '" + tok + "'");
  }
  return static_cast<std::size_t>(v);
}

double parse_value(const LineReader& reader, const std::string& tok) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
    reader.fail("expected a finite real value, got '" + tok + "'");
  }
  if (v < 0.0) reader.fail("negative entry " + tok + " (input must be nonnegative)");
  return v;
}

void print_value(std::FILE* f, double v) { std::fprintf(f, "%.17g", v); }

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "w"));
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  return f;
}

void close_checked(FilePtr f, const std::filesystem::path& path) {
  const bool bad = std::ferror(f.get()) != 0;
  if (std::fclose(f.release()) != 0 || bad) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace

Matrix read_matrix_market(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next_raw(line)) reader.fail("empty file");
  const auto header = split_ws(line);
  if (header.size() != 5 || header[0] != "%%MatrixMarket" || lower(header[1]) != "matrix") {
    reader.fail("malformed header: expected '%%MatrixMarket matrix <format> <field> <symmetry>'");
  }
  const std::string format = lower(header[2]);
  const std::string field = lower(header[3]);
  const std::string symmetry = lower(header[4]);
  if (format != "array" && format != "coordinate") reader.fail("unknown format '" + header[2] + "'");
  if (field != "real" && field != "pattern") {
    reader.fail("unsupported field '" + header[3] + "' (only real and pattern are accepted)");
  }
  if (field == "pattern" && format == "array") reader.fail("pattern field requires coordinate format");
  if (symmetry != "general" && symmetry != "symmetric") {
    reader.fail("unsupported symmetry '" + header[4] + "'");
  }
  const bool symmetric = symmetry == "symmetric";

  if (!reader.next(line)) reader.fail("missing size line");
  const auto size = split_ws(line);

  if (format == "array") {
    if (size.size() != 2) reader.fail("array size line must be 'rows cols'");
    const std::size_t m = parse_count(reader, size[0]);
    const std::size_t n = parse_count(reader, size[1]);
    if (symmetric && m != n) reader.fail("symmetric matrix must be square");
    DenseMatrix out(m, n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = symmetric ? j : 0; i < m; ++i) {
        if (!reader.next(line)) reader.fail("unexpected end of file");
        const auto tok = split_ws(line);
        if (tok.size() != 1) reader.fail("expected one value per line");
        const double v = parse_value(reader, tok[0]);
        out(i, j) = v;
        if (symmetric) out(j, i) = v;
      }
    }
    if (reader.next(line)) reader.fail("trailing data after " + std::to_string(m * n) + " values");
    return out;
  }

  if (size.size() != 3) reader.fail("coordinate size line must be 'rows cols nnz'");
  const std::size_t m = parse_count(reader, size[0]);
  const std::size_t n = parse_count(reader, size[1]);
  const std::size_t nnz = parse_count(reader, size[2]);
  if (symmetric && m != n) reader.fail("symmetric matrix must be square");
  std::vector<SparseMatrixCSR::Triplet> triplets;
  triplets.reserve(symmetric ? 2 * nnz : nnz);
  const std::size_t expected_tokens = field == "pattern" ? 2 : 3;
  for (std::size_t e = 0; e < nnz; ++e) {
    if (!reader.next(line)) reader.fail("unexpected end of file after " + std::to_string(e) + " entries");
    const auto tok = split_ws(line);
    if (tok.size() != expected_tokens) {
      reader.fail("expected " + std::to_string(expected_tokens) + " fields per entry");
    }
    const std::size_t i = parse_count(reader, tok[0]);
    const std::size_t j = parse_count(reader, tok[1]);
    if (i < 1 || i > m || j < 1 || j > n) {
      reader.fail("index (" + tok[0] + ", " + tok[1] + ") out of range");
    }
    const double v = field == "pattern" ? 1.0 : parse_value(reader, tok[2]);
    triplets.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) triplets.push_back({j - 1, i - 1, v});
  }
  if (reader.next(line)) reader.fail("more entries than declared");
  return SparseMatrixCSR::from_triplets(m, n, std::move(triplets));
}

void write_matrix_market(MatrixRef matrix, const std::filesystem::path& path) {
  FilePtr f = open_for_write(path);
  if (!matrix.is_sparse()) {
    const DenseMatrix& d = matrix.dense();
    std::fprintf(f.get(), "%%%%MatrixMarket matrix array real general\n%zu %zu\n", d.rows(), d.cols());
    for (double v : d.data()) {
      print_value(f.get(), v);
      std::fputc('\n', f.get());
    }
  } else {
    const SparseMatrixCSR& s = matrix.sparse();
    std::fprintf(f.get(), "%%%%MatrixMarket matrix coordinate real general\n%zu %zu %zu\n", s.rows(),
                 s.cols(), s.nnz());
    for (std::size_t i = 0; i < s.rows(); ++i) {
      const auto idx = s.row_indices(i);
      const auto val = s.row_values(i);
      for (std::size_t p = 0; p < idx.size(); ++p) {
        std::fprintf(f.get(), "%zu %zu ", i + 1, idx[p] + 1);
        print_value(f.get(), val[p]);
        std::fputc('\n', f.get());
      }
    }
  }
  close_checked(std::move(f), path);
}

void write_trace_csv(const SolveTrace& trace, const std::filesystem::path& path) {
  if (trace.records.empty()) throw std::invalid_argument("write_trace_csv: empty trace");
  FilePtr f = open_for_write(path);
  std::fputs("sweep,elapsed_s,rel_residual\n", f.get());
  for (const auto& rec : trace.records) {
    std::fprintf(f.get(), "%zu,%.10g,%.10g\n", rec.sweep, rec.elapsed_s, rec.rel_residual);
  }
  close_checked(std::move(f), path);
}

SolveTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != "sweep,elapsed_s,rel_residual") {
    throw ParseError(path.string(), line_no, "expected header 'sweep,elapsed_s,rel_residual'");
  }
  SolveTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TraceRecord rec;
    char* end = nullptr;
    const char* p = line.c_str();
    rec.sweep = std::strtoull(p, &end, 10);
    bool ok = end != p && *end == ',';
    if (ok) {
      p = end + 1;
      rec.elapsed_s = std::strtod(p, &end);
      ok = end != p && *end == ',';
    }
    if (ok) {
      p = end + 1;
      rec.rel_residual = std::strtod(p, &end);
      ok = end != p && *end == '\0';
    }
    if (!ok) throw ParseError(path.string(), line_no, "malformed trace row '" + line + "'");
    trace.records.push_back(rec);
  }
  return trace;
}

}  // namespace arknls
