#include "ter/rng.hpp"

#include "ter/error.hpp"

namespace ter {
namespace {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t SeededRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ull;
  return mix64(state_);
}

double SeededRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

float SeededRng::next_uniform(float lo, float hi) {
  return static_cast<float>(lo + (static_cast<double>(hi) - lo) * next_unit());
}

std::uint64_t SeededRng::next_below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::Arg, "next_below requires n > 0");
  // Lemire multiply-shift; bias is negligible for n << 2^64 and the
  // mapping is fully deterministic.
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

SeededRng SeededRng::split(std::string_view tag, std::uint64_t index) const {
  return SeededRng(mix64(state_ ^ fnv1a(tag) ^ mix64(index + 1)));
}

}  // namespace ter
