#pragma once

// Seeded synthetic classification data. Every (class, feature) pair gets a
// fixed centre on a bin grid; samples scatter around the centre by at most
// `jitter` bin widths, so jitter < 0.5 keeps each class's discretized
// pattern pure while still producing real-valued inputs.

#include <cstdint>

#include "hypervec/data.hpp"

namespace synth {

struct SynthSpec {
  std::size_t rows = 1000;
  std::size_t features = 30;
  std::size_t classes = 5;
  std::size_t segments = 1;  // contiguous, non-decreasing block ids; 1 = no column
  std::size_t grid_bins = 16;
  double jitter = 0.3;  // bin widths of uniform noise around each centre
  std::uint64_t seed = 7;
};

// Centre bin for a class/feature pair; distinct classes disagree on most features.
std::size_t centre_bin(std::size_t cls, std::size_t feature, std::size_t grid_bins);

hypervec::Dataset make_synth(const SynthSpec& spec);

}  // namespace synth
