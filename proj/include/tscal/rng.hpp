#pragma once

#include <cstdint>
#include <string_view>

namespace tscal {

// Counter-based random stream. Every draw is a pure function of
// (seed, stream name, substream, draw index), so results never depend on
// thread scheduling or call interleaving across streams.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view name, std::uint64_t substream = 0)
        : key_(derive_key(seed, name, substream)) {}

    std::uint64_t next_u64() {
        return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ull);
    }

    // Uniform on the open interval (0,1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t draws() const { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t derive_key(std::uint64_t seed, std::string_view name,
                                    std::uint64_t substream) {
        // FNV-1a over (seed, name, substream), then one avalanche pass.
        std::uint64_t h = 0xCBF29CE484222325ull;
        auto absorb = [&h](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= (v >> (8 * i)) & 0xFFull;
                h *= 0x100000001B3ull;
            }
        };
        absorb(seed);
        for (unsigned char c : name) {
            h ^= c;
            h *= 0x100000001B3ull;
        }
        absorb(substream);
        return mix(h);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stable 64-bit tag for deriving per-task seeds from strings.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t extra = 0) {
    RngStream s(seed, tag, extra);
    return s.next_u64();
}

} // namespace tscal
