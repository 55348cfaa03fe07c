#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mlyap {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, used to fold purpose strings into seeds.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for the stream identified by (master seed, purpose, counter).
/// Streams with different purposes or counters are independent, so a
/// computation keyed by run index gives the same draws on any thread.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::string_view purpose,
                                    std::uint64_t counter) {
  return mix64(mix64(master ^ fnv1a(purpose)) + mix64(counter));
}

inline Engine make_engine(std::uint64_t master, std::string_view purpose,
                          std::uint64_t counter) {
  return Engine(derive_seed(master, purpose, counter));
}

}  // namespace mlyap
