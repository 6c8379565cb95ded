#pragma once

#include <cstdint>
#include <string_view>

namespace coc {

// Counter-based generator (splitmix64 output function over a keyed counter).
// Streams are identified purely by a 64-bit key derived from (seed, labels...),
// so any parallel or reordered execution schedule draws identical values.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53-bit resolution.
    double next_double();
    // Uniform on (0, 1]; safe as a log() argument.
    double next_double_pos();
    // Standard normal via Box-Muller (pairs are cached).
    double next_gaussian();
    // Exponential(1).
    double next_exponential();
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t state_;
    double cached_gauss_ = 0.0;
    bool has_cached_ = false;
};

// Stream-key derivation: fold labels into the seed one at a time.
// derive_key(s, a, b) != derive_key(s, b, a) by construction.
std::uint64_t derive_key(std::uint64_t seed);
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a);
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                         std::uint64_t d);

// FNV-1a, for folding opaque string ids (centre ids) into stream keys.
std::uint64_t hash_label(std::string_view s);

// Purpose labels keep streams for different uses disjoint.
namespace stream {
inline constexpr std::uint64_t kMixture = 0x6d697874;       // mixture MC draws
inline constexpr std::uint64_t kNpIndices = 0x6e706278;     // nonparametric resampling
inline constexpr std::uint64_t kMultipliers = 0x77746278;   // weighted-bootstrap multipliers
inline constexpr std::uint64_t kUniversal = 0x756e6278;     // universal gaussian perturbations
inline constexpr std::uint64_t kSimulate = 0x73696d75;      // synthetic data generation
inline constexpr std::uint64_t kIngestSample = 0x696e6773;  // per-destination subsampling
inline constexpr std::uint64_t kReplicate = 0x7265706c;     // per-replication sub-seeds
inline constexpr std::uint64_t kOracle = 0x6f72636c;        // direct-simulation oracles in tests
}  // namespace stream

}  // namespace coc
