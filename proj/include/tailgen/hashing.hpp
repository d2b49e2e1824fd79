#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace tailgen {

// 64-bit FNV-1a. Used for content addressing and seed derivation; stable
// across platforms and runs by construction.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t state = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

inline std::uint64_t fnv1a_bytes(const void* data, std::size_t n,
                                 std::uint64_t state = 0xcbf29ce484222325ULL) {
  return fnv1a(std::string_view(static_cast<const char*>(data), n), state);
}

// splitmix64 finalizer; decorrelates combined hashes.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

/// Derive a child seed from a parent seed plus a role tag and indices.
/// Per-item seeding keeps artifacts independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  return mix64(hash_combine(hash_combine(fnv1a(tag), parent), hash_combine(a, b)));
}

inline std::string to_hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf, 16);
}

// xorshift64*; cheap deterministic byte stream for procedural pixels.
struct XorShift64 {
  std::uint64_t state;
  explicit XorShift64(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545f4914f6cdd1dULL;
  }
};

}  // namespace tailgen
