#pragma once

#include <cstdint>
#include <string_view>

namespace toc::sampling {

// Streams keep the model draw and the prompt draw for one node independent.
enum class Stream : std::uint64_t { model = 0x6d6f64656cULL, prompt = 0x70726f6d7074ULL };

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based draw: a pure function of its arguments, so concurrently
// generated nodes cannot perturb each other's choices.
std::uint64_t node_key(std::uint64_t seed, Stream stream, int layer, int index);

// Maps a 64-bit key onto [0, n) by multiply-shift.
std::size_t uniform_index(std::uint64_t key, std::size_t n);

// FNV-1a over `text`, mixed with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view text);

}  // namespace toc::sampling
