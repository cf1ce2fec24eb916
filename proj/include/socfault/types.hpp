#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <string>

namespace socfault {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i8 = std::int8_t;
using i32 = std::int32_t;
using i64 = std::int64_t;

inline constexpr u32 kLineBytes = 64;
inline constexpr u32 kBeatBytes = 16;
inline constexpr u32 kBeatsPerLine = kLineBytes / kBeatBytes;

enum class Level : u8 { L1I, L1D, L2, DRAM };

const char* level_name(Level lv);

/// splitmix64 finalizer; also the mixing step of the block MAC.
constexpr u64 mix64(u64 z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Minimal deterministic RNG (splitmix64 stream).
class SplitMix64 {
public:
    explicit SplitMix64(u64 seed) : state_(seed) {}

    u64 next() {
        state_ += 0x9E3779B97F4A7C15ull;
        u64 z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound). bound must be nonzero.
    u64 next_below(u64 bound) { return next() % bound; }

    /// Uniform double in [0, 1).
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    u64 state_;
};

/// FNV-1a over raw bytes, used for state and log digests.
class Fnv1a {
public:
    void add(const void* data, std::size_t len) {
        const u8* p = static_cast<const u8*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x00000100000001B3ull;
        }
    }
    void add_u64(u64 v) { add(&v, sizeof v); }
    void add_u32(u32 v) { add(&v, sizeof v); }
    void add_u8(u8 v) { add(&v, sizeof v); }
    u64 value() const { return hash_; }

private:
    u64 hash_ = 0xCBF29CE484222325ull;
};

std::string hex(u64 v);
std::string hex_bytes(const u8* data, std::size_t len);

} // namespace socfault
