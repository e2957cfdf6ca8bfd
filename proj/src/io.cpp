#include "hypervec/io.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hypervec::io {

namespace {

void write_bytes(std::ostream& out, const unsigned char* bytes, std::size_t n) {
  out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(n));
  if (!out) throw std::runtime_error("write failed");
}

void read_bytes(std::istream& in, unsigned char* bytes, std::size_t n) {
  in.read(reinterpret_cast<char*>(bytes), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n)) {
    throw std::runtime_error("unexpected end of stream");
  }
}

}  // namespace

void write_u16(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  write_bytes(out, b, 2);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(out, b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(out, b, 8);
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  read_bytes(in, b, 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  read_bytes(in, b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  read_bytes(in, b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

void write_magic(std::ostream& out, const char (&magic)[5]) {
  write_bytes(out, reinterpret_cast<const unsigned char*>(magic), 4);
}

void expect_magic(std::istream& in, const char (&magic)[5]) {
  unsigned char b[4];
  read_bytes(in, b, 4);
  for (int i = 0; i < 4; ++i) {
    if (b[i] != static_cast<unsigned char>(magic[i])) {
      throw std::runtime_error(std::string("bad magic, expected ") + magic);
    }
  }
}

void write_packed(std::ostream& out, const PackedBitMatrix& m) {
  write_magic(out, "HVPB");
  write_u16(out, kContainerVersion);
  write_u64(out, m.rows());
  write_u64(out, m.dim());
  for (std::uint32_t w : m.words()) write_u32(out, w);
}

PackedBitMatrix read_packed(std::istream& in) {
  expect_magic(in, "HVPB");
  const std::uint16_t version = read_u16(in);
  if (version != kContainerVersion) {
    throw std::runtime_error("unsupported packed-matrix version " + std::to_string(version));
  }
  const std::uint64_t rows = read_u64(in);
  const std::uint64_t dim = read_u64(in);
  PackedBitMatrix m(rows, dim);
  for (std::uint32_t& w : m.words()) w = read_u32(in);
  if (!m.padding_clean()) {
    throw std::runtime_error("corrupt packed matrix: padding bits set");
  }
  return m;
}

void save_dense_csv(const DenseBitMatrix& m, std::ostream& out) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (j != 0) out << ',';
      out << static_cast<int>(m.at(r, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed");
}

DenseBitMatrix load_dense_csv(std::istream& in) {
  std::vector<std::uint8_t> bits;
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    ++rows;
    std::size_t col = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell =
          line.substr(pos, (comma == std::string::npos ? line.size() : comma) - pos);
      ++col;
      if (cell != "0" && cell != "1") {
        throw std::runtime_error("row " + std::to_string(rows) + ", column " +
                                 std::to_string(col) + ": expected 0 or 1, got '" + cell + "'");
      }
      bits.push_back(cell == "1" ? 1 : 0);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (rows == 1) {
      dim = col;
    } else if (col != dim) {
      throw std::runtime_error("row " + std::to_string(rows) + ": expected " +
                               std::to_string(dim) + " columns, got " + std::to_string(col));
    }
  }
  DenseBitMatrix m(rows, dim);
  m.bits() = std::move(bits);
  return m;
}

void save_dense_csv(const DenseBitMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_dense_csv(m, out);
}

DenseBitMatrix load_dense_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_dense_csv(in);
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace hypervec::io
