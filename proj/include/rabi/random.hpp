#pragma once

#include <cstdint>
#include <random>

namespace rabi {

// What a per-sample stream is used for. Field and position draws come from
// separate streams so that two methods run with the same seed see identical
// field samples.
enum class StreamPurpose : std::uint32_t {
  field = 1,
  position = 2,
  synthetic = 3,
};

using RandomStream = std::mt19937_64;

// Stream for one sample, derived from the master seed by counter. The result
// depends only on (seed, sample, purpose), never on scheduling.
inline RandomStream make_stream(std::uint64_t seed, std::uint64_t sample,
                                StreamPurpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample),
                    static_cast<std::uint32_t>(sample >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return RandomStream(seq);
}

}  // namespace rabi
