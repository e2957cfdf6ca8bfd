#include "hypervec/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

namespace hypervec {

namespace {

// In-register transpose of a 32x32 bit tile under the LSB-first convention
// (word w[i] bit j holds tile bit (i, j)). Mirrored form of the classic
// masked-swap network, which assumes MSB-first.
void transpose32(std::uint32_t w[32]) {
  std::uint32_t mask = 0xFFFF0000u;
  for (unsigned j = 16; j != 0; j >>= 1, mask ^= mask >> j) {
    for (unsigned k = 0; k < 32; k = (k + j + 1) & ~j) {
      const std::uint32_t t = (w[k] ^ (w[k + j] << j)) & mask;
      w[k] ^= t;
      w[k + j] ^= t >> j;
    }
  }
}

// Reads up to 32 bits starting at bit position `pos`, zero-extended.
inline std::uint32_t get_bits(std::span<const std::uint32_t> words, std::size_t pos,
                              unsigned count) {
  const std::size_t wi = pos / 32;
  const unsigned off = pos % 32;
  std::uint32_t v = words[wi] >> off;
  if (off != 0 && off + count > 32) {
    v |= words[wi + 1] << (32 - off);
  }
  if (count < 32) {
    v &= (1u << count) - 1u;
  }
  return v;
}

}  // namespace

PackedBitMatrix pack(const DenseBitMatrix& bits) {
  for (std::size_t i = 0; i < bits.bits().size(); ++i) {
    if (bits.bits()[i] > 1) {
      throw std::invalid_argument("pack: non-binary entry " +
                                  std::to_string(int(bits.bits()[i])) + " at flat index " +
                                  std::to_string(i));
    }
  }
  PackedBitMatrix out(bits.rows(), bits.dim());
  for (std::size_t r = 0; r < bits.rows(); ++r) {
    auto src = bits.row(r);
    auto dst = out.row(r);
    for (std::size_t j = 0; j < bits.dim(); ++j) {
      dst[j / 32] |= static_cast<std::uint32_t>(src[j]) << (j % 32);
    }
  }
  return out;
}

DenseBitMatrix unpack(const PackedBitMatrix& m) {
  DenseBitMatrix out(m.rows(), m.dim());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    auto dst = out.row(r);
    for (std::size_t j = 0; j < m.dim(); ++j) {
      dst[j] = (src[j / 32] >> (j % 32)) & 1u;
    }
  }
  return out;
}

PackedBitMatrix xor_bind(const PackedBitMatrix& a, const PackedBitMatrix& b) {
  if (a.dim() != b.dim() || (b.rows() != a.rows() && b.rows() != 1)) {
    throw std::invalid_argument("xor_bind: shape mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.dim()) + ")");
  }
  PackedBitMatrix out(a.rows(), a.dim());
  const bool broadcast = b.rows() == 1;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    xor_words(a.row(r), b.row(broadcast ? 0 : r), out.row(r));
  }
  return out;
}

PackedBitMatrix rotate(const PackedBitMatrix& m, std::size_t shift) {
  const std::size_t d = m.dim();
  if (d == 0) return m;
  const std::size_t s = shift % d;
  if (s == 0) return m;
  PackedBitMatrix out(m.rows(), d);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    // bit j -> bit (j + s) mod d
    copy_bit_range(m.row(r), 0, out.row(r), s, d - s);
    copy_bit_range(m.row(r), d - s, out.row(r), 0, s);
  }
  return out;
}

CountVector horizontal_sum(const PackedBitMatrix& m) {
  CountVector sums(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    sums[r] = popcount_words(m.row(r));
  }
  return sums;
}

PackedBitMatrix transpose(const PackedBitMatrix& m) {
  PackedBitMatrix out(m.dim(), m.rows());
  const std::size_t in_wpr = m.words_per_row();
  const std::size_t out_wpr = out.words_per_row();
  if (in_wpr == 0 || out_wpr == 0) return out;
  const std::uint32_t* in = m.words().data();
  std::uint32_t* dst = out.words().data();
  const std::size_t row_blocks = (m.rows() + 31) / 32;
  std::uint32_t tile[32];
  for (std::size_t br = 0; br < row_blocks; ++br) {
    for (std::size_t bc = 0; bc < in_wpr; ++bc) {
      for (std::size_t r = 0; r < 32; ++r) {
        const std::size_t row = br * 32 + r;
        tile[r] = row < m.rows() ? in[row * in_wpr + bc] : 0u;
      }
      transpose32(tile);
      const std::size_t col_base = bc * 32;
      const std::size_t cols = m.dim() - col_base < 32 ? m.dim() - col_base : 32;
      for (std::size_t c = 0; c < cols; ++c) {
        dst[(col_base + c) * out_wpr + br] = tile[c];
      }
    }
  }
  return out;
}

CountVector vertical_sum(const PackedBitMatrix& m) {
  if (m.rows() == 0) return CountVector(m.dim(), 0);
  return horizontal_sum(transpose(m));
}

PackedBitMatrix majority_binarize(const CountVector& counts, std::uint64_t n,
                                  const PackedBitMatrix& tiebreak) {
  if (tiebreak.rows() != 1 || tiebreak.dim() != counts.size()) {
    throw std::invalid_argument("majority_binarize: tiebreak must be 1x" +
                                std::to_string(counts.size()));
  }
  PackedBitMatrix out(1, counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] > n) {
      throw std::invalid_argument("majority_binarize: count " + std::to_string(counts[j]) +
                                  " exceeds total " + std::to_string(n) + " at position " +
                                  std::to_string(j));
    }
    const std::uint64_t twice = 2 * counts[j];
    const bool bit = twice > n ? true : (twice < n ? false : tiebreak.bit(0, j));
    if (bit) out.set_bit(0, j, true);
  }
  return out;
}

namespace {

// Loads two consecutive 32-bit words as one 64-bit value (alignment-safe);
// halves the popcount work in the scoring hot loops.
inline std::uint64_t load_u64(const std::uint32_t* p) {
  std::uint64_t v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

}  // namespace

std::uint64_t popcount_words(std::span<const std::uint32_t> words) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  for (; i + 2 <= words.size(); i += 2) {
    total += static_cast<unsigned>(std::popcount(load_u64(words.data() + i)));
  }
  if (i < words.size()) total += static_cast<unsigned>(std::popcount(words[i]));
  return total;
}

std::uint64_t hamming_words(std::span<const std::uint32_t> a,
                            std::span<const std::uint32_t> b) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  for (; i + 2 <= a.size(); i += 2) {
    total += static_cast<unsigned>(
        std::popcount(load_u64(a.data() + i) ^ load_u64(b.data() + i)));
  }
  if (i < a.size()) total += static_cast<unsigned>(std::popcount(a[i] ^ b[i]));
  return total;
}

void xor_words(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
               std::span<std::uint32_t> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
}

void copy_bit_range(std::span<const std::uint32_t> src, std::size_t src_off,
                    std::span<std::uint32_t> dst, std::size_t dst_off, std::size_t len) {
  std::size_t copied = 0;
  while (copied < len) {
    const std::size_t dpos = dst_off + copied;
    const std::size_t dw = dpos / 32;
    const unsigned doff = dpos % 32;
    const unsigned chunk =
        static_cast<unsigned>(std::min<std::size_t>(32 - doff, len - copied));
    const std::uint32_t bits = get_bits(src, src_off + copied, chunk);
    const std::uint32_t field_mask =
        (chunk == 32 ? ~0u : ((1u << chunk) - 1u)) << doff;
    dst[dw] = (dst[dw] & ~field_mask) | ((bits << doff) & field_mask);
    copied += chunk;
  }
}

}  // namespace hypervec
