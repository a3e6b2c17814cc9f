#include "manifoldwalk/rng.hpp"

#include <cmath>

namespace mwalk {
namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer: bijective, avalanching.
uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

}  // namespace

RandomStream::RandomStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    base_ = mix64(seed + kGolden * mix64(stream_id + 0x632be59bd9b4e019ULL));
    // Distinct odd increments put streams on different orbits entirely.
    gamma_ = mix64(stream_id * kGolden + seed + 0xd1b54a32d192ed03ULL) | 1ULL;
}

uint64_t RandomStream::next_u64() {
    ++counter_;
    return mix64(base_ + gamma_ * counter_);
}

double RandomStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
    // First draw is mapped to (0, 1] so the log is always finite.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace mwalk
