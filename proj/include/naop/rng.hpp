#pragma once

#include <cstdint>
#include <string_view>

namespace naop {

/// splitmix64 finalizer; used to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return mix64(parent ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t hash_string(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Uniform double in [0, 1) from a 64-bit hash.
constexpr double unit_from_bits(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

}  // namespace naop
