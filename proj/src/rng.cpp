#include "coc/rng.hpp"

#include <cmath>

namespace coc {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}
}  // namespace

std::uint64_t RngStream::next_u64() {
    state_ += kGamma;
    return mix64(state_);
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_double_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_gauss_;
    }
    const double u1 = next_double_pos();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_gauss_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

double RngStream::next_exponential() {
    return -std::log(next_double_pos());
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
    // Multiply-shift; bias is O(n / 2^64), irrelevant at our sizes.
    const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
}

namespace {
inline std::uint64_t fold(std::uint64_t key, std::uint64_t label) {
    return mix64(key ^ (label + kGamma + (key << 6) + (key >> 2)));
}
}  // namespace

std::uint64_t derive_key(std::uint64_t seed) { return mix64(seed + kGamma); }
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a) { return fold(derive_key(seed), a); }
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return fold(derive_key(seed, a), b);
}
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return fold(derive_key(seed, a, b), c);
}
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                         std::uint64_t d) {
    return fold(derive_key(seed, a, b, c), d);
}

std::uint64_t hash_label(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace coc
