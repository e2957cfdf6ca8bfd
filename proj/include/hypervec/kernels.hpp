#pragma once

// Bit-packed hypervector kernels: packing, XOR binding, rotation,
// horizontal/vertical summation, tiled transpose, majority binarization.
// All functions are pure; outputs always have clean padding bits.

#include <cstdint>
#include <span>

#include "hypervec/bitmat.hpp"

namespace hypervec {

// Packs a dense 0/1 matrix, LSB-first within 32-bit words.
// Throws std::invalid_argument on non-binary entries.
PackedBitMatrix pack(const DenseBitMatrix& bits);

// Exact inverse of pack on the first D bits of each row.
DenseBitMatrix unpack(const PackedBitMatrix& m);

// Bitwise XOR per logical position. Shapes must match, or b may have a
// single row that is broadcast across a's rows.
PackedBitMatrix xor_bind(const PackedBitMatrix& a, const PackedBitMatrix& b);

// Circular rotation of every row by `shift` mod D positions: output bit
// (j + shift) mod D equals input bit j.
PackedBitMatrix rotate(const PackedBitMatrix& m, std::size_t shift);

// Per-row popcount over the D logical bits.
CountVector horizontal_sum(const PackedBitMatrix& m);

// Exact bit transposition: result has rows = D, dim = n, and bit (j, i) of
// the result equals bit (i, j) of the input. Processed in bit tiles.
PackedBitMatrix transpose(const PackedBitMatrix& m);

// Per-bit-position count across all rows; equals
// horizontal_sum(transpose(m)) and is computed that way.
CountVector vertical_sum(const PackedBitMatrix& m);

// Majority vote against a contribution total of n: bit j is 1 when
// 2*counts[j] > n, 0 when 2*counts[j] < n, and the tiebreak bit on equality.
// Throws std::invalid_argument when a count exceeds n or shapes disagree.
PackedBitMatrix majority_binarize(const CountVector& counts, std::uint64_t n,
                                  const PackedBitMatrix& tiebreak);

// --- word-level helpers shared by encoding/model hot paths ---

// Popcount of a row's words (padding is zero by invariant).
std::uint64_t popcount_words(std::span<const std::uint32_t> words);

// Popcount of (a XOR b) without materializing the result.
std::uint64_t hamming_words(std::span<const std::uint32_t> a,
                            std::span<const std::uint32_t> b);

// out = a XOR b over equal-length word spans.
void xor_words(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
               std::span<std::uint32_t> out);

// Copies `len` bits from src starting at bit src_off into dst starting at
// bit dst_off. Bits outside the destination range are preserved. The spans
// are word arrays; ranges must not overlap.
void copy_bit_range(std::span<const std::uint32_t> src, std::size_t src_off,
                    std::span<std::uint32_t> dst, std::size_t dst_off, std::size_t len);

}  // namespace hypervec
