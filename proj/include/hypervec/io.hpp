#pragma once

// Binary and CSV I/O: little-endian scalar primitives, the "HVPB" packed
// bit-matrix container, and dense 0/1 CSV import/export. All readers throw
// std::runtime_error on truncation, bad magic, or malformed content.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "hypervec/bitmat.hpp"

namespace hypervec::io {

inline constexpr std::uint16_t kContainerVersion = 1;

void write_u16(std::ostream& out, std::uint16_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
std::uint16_t read_u16(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);

// Fixed-length tag helpers for container magics.
void write_magic(std::ostream& out, const char (&magic)[5]);
void expect_magic(std::istream& in, const char (&magic)[5]);

// "HVPB" container: magic, version u16, rows u64, dim u64, words LE u32.
void write_packed(std::ostream& out, const PackedBitMatrix& m);
PackedBitMatrix read_packed(std::istream& in);

// Dense 0/1 matrices as comma-separated integer rows, one matrix row per
// line. Rejects entries other than 0/1 and ragged rows, reporting the 1-based
// row and column of the offense.
void save_dense_csv(const DenseBitMatrix& m, std::ostream& out);
DenseBitMatrix load_dense_csv(std::istream& in);
void save_dense_csv(const DenseBitMatrix& m, const std::string& path);
DenseBitMatrix load_dense_csv(const std::string& path);

// Opens a file for binary read/write, throwing std::runtime_error with the
// path on failure.
void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace hypervec::io
