#pragma once

// Bit-matrix containers: PackedBitMatrix stores n rows of D logical bits in
// 32-bit words (LSB-first within each word, row-major); DenseBitMatrix stores
// one byte per bit and is the interchange/oracle representation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace hypervec {

/// Row-major bit matrix packed into 32-bit words.
///
/// Logical bit j of a row lives in word j/32 at in-word position j%32
/// (least-significant-bit first). Padding bits at positions >= dim in the
/// last word of each row are always zero; every operation preserves this.
class PackedBitMatrix {
 public:
  static constexpr std::size_t kWordBits = 32;

  PackedBitMatrix() = default;

  // Zero-filled matrix of `rows` x `dim` logical bits.
  PackedBitMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), words_(rows * words_per_row_for(dim), 0u) {}

  static std::size_t words_per_row_for(std::size_t dim) {
    return (dim + kWordBits - 1) / kWordBits;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t words_per_row() const { return words_per_row_for(dim_); }
  [[nodiscard]] std::size_t byte_size() const { return words_.size() * sizeof(std::uint32_t); }

  [[nodiscard]] std::span<const std::uint32_t> row(std::size_t i) const {
    return {words_.data() + i * words_per_row(), words_per_row()};
  }
  [[nodiscard]] std::span<std::uint32_t> row(std::size_t i) {
    return {words_.data() + i * words_per_row(), words_per_row()};
  }

  [[nodiscard]] bool bit(std::size_t r, std::size_t j) const {
    return (words_[r * words_per_row() + j / kWordBits] >> (j % kWordBits)) & 1u;
  }
  void set_bit(std::size_t r, std::size_t j, bool value) {
    std::uint32_t& w = words_[r * words_per_row() + j / kWordBits];
    const std::uint32_t mask = 1u << (j % kWordBits);
    if (value) {
      w |= mask;
    } else {
      w &= ~mask;
    }
  }

  [[nodiscard]] const std::vector<std::uint32_t>& words() const { return words_; }
  [[nodiscard]] std::vector<std::uint32_t>& words() { return words_; }

  // Mask set on bits >= dim in the last word of a row (0 when dim is a
  // multiple of 32 or the matrix has no columns).
  [[nodiscard]] std::uint32_t padding_mask() const {
    const std::size_t rem = dim_ % kWordBits;
    return rem == 0 ? 0u : ~((1u << rem) - 1u);
  }

  // True when every padding bit in every row is zero.
  [[nodiscard]] bool padding_clean() const {
    const std::uint32_t mask = padding_mask();
    if (mask == 0 || words_per_row() == 0) return true;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (row(r)[words_per_row() - 1] & mask) return false;
    }
    return true;
  }

  // Clears padding bits in every row.
  void mask_padding() {
    const std::uint32_t mask = padding_mask();
    if (mask == 0 || words_per_row() == 0) return;
    for (std::size_t r = 0; r < rows_; ++r) {
      row(r)[words_per_row() - 1] &= ~mask;
    }
  }

  bool operator==(const PackedBitMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> words_;
};

/// Byte-per-bit matrix (values 0/1). 8x the footprint of the packed form;
/// used as the pack/unpack interchange format and by the naive oracle.
class DenseBitMatrix {
 public:
  DenseBitMatrix() = default;

  DenseBitMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), bits_(rows * dim, 0) {}

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t byte_size() const { return bits_.size(); }

  [[nodiscard]] std::uint8_t at(std::size_t r, std::size_t j) const { return bits_[r * dim_ + j]; }
  [[nodiscard]] std::uint8_t& at(std::size_t r, std::size_t j) { return bits_[r * dim_ + j]; }

  [[nodiscard]] std::span<const std::uint8_t> row(std::size_t i) const {
    return {bits_.data() + i * dim_, dim_};
  }
  [[nodiscard]] std::span<std::uint8_t> row(std::size_t i) {
    return {bits_.data() + i * dim_, dim_};
  }

  [[nodiscard]] const std::vector<std::uint8_t>& bits() const { return bits_; }
  [[nodiscard]] std::vector<std::uint8_t>& bits() { return bits_; }

  // All entries must be 0 or 1.
  [[nodiscard]] bool is_binary() const {
    for (std::uint8_t b : bits_) {
      if (b > 1) return false;
    }
    return true;
  }

  bool operator==(const DenseBitMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Exact per-position counts (pre-normalization sums, popcounts). Wide enough
/// for any row count below 2^32.
using CountVector = std::vector<std::uint64_t>;

}  // namespace hypervec
