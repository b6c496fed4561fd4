#include "toc/sampling.hpp"

namespace toc::sampling {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t node_key(std::uint64_t seed, Stream stream, int layer, int index) {
  std::uint64_t key = splitmix64(seed ^ static_cast<std::uint64_t>(stream));
  key = splitmix64(key ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(layer)));
  key = splitmix64(key ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(index)));
  return key;
}

std::size_t uniform_index(std::uint64_t key, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(key) * n) >> 64);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ hash);
}

}  // namespace toc::sampling
