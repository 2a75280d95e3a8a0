#pragma once

#include <cstdint>

namespace fraclab {

// All randomness in the library is derived by hashing, never by stream
// position.  The variate attached to a cube is a pure function of
// (base_seed, trial, attempt, address path), so realizations are identical
// across runs, worker counts and evaluation orders, and raising a retention
// probability can only add cubes (monotone coupling).
//
// Derivation rule (stable, part of the file-format/record contract):
//   trial state    S = mix64(base_seed ^ mix64(trial))
//   attempt state  S = mix64(S ^ mix64(kSaltAttempt + attempt))   (rejection resampling)
//   child state    S_child = mix64(S_parent ^ mix64(child_linear_index))
//   retention u    unit_uniform(mix64(S_cube ^ kSaltRetain))
//   litter u       unit_uniform(mix64(S_node ^ kSaltFamily))     (all-or-nothing models)
//   removal choice mix64(S_node ^ kSaltRemoval) % family_size    (deterministic Cantor builds)

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b));
}

// 53-bit uniform in [0,1)
inline double unit_uniform(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline constexpr std::uint64_t kSaltRetain  = 0x52455441494eull;  // "RETAIN"
inline constexpr std::uint64_t kSaltFamily  = 0x46414d494c59ull;  // "FAMILY"
inline constexpr std::uint64_t kSaltRemoval = 0x52454d4f5645ull;  // "REMOVE"
inline constexpr std::uint64_t kSaltAttempt = 0x415454454d50ull;  // "ATTEMP"
inline constexpr std::uint64_t kSaltSample  = 0x53414d504c45ull;  // "SAMPLE"

struct SeedSpec {
    std::uint64_t base_seed = 0;

    std::uint64_t trial_state(std::uint64_t trial, std::uint64_t attempt = 0) const {
        std::uint64_t s = mix64(base_seed, trial);
        if (attempt != 0) s = mix64(s, kSaltAttempt + attempt);
        return s;
    }
};

inline std::uint64_t child_state(std::uint64_t parent_state, std::uint32_t child_linear) {
    return mix64(parent_state, child_linear);
}

inline double retain_uniform(std::uint64_t cube_state) {
    return unit_uniform(mix64(cube_state ^ kSaltRetain));
}

inline double family_uniform(std::uint64_t node_state) {
    return unit_uniform(mix64(node_state ^ kSaltFamily));
}

}  // namespace fraclab
