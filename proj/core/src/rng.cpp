#include "vcsim/rng.hpp"

namespace vcsim {

std::uint64_t stream_key(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t b) {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ static_cast<std::uint64_t>(stream));
  k = mix64(k ^ a);
  return mix64(k ^ (b * 0xD1B54A32D192ED03ULL));
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index) {
  return stream_key(master_seed, Stream::Replication, index);
}

}  // namespace vcsim
