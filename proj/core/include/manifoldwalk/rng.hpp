#pragma once

// Counter-based splittable random streams.  Draw i of stream (seed, id) is a
// pure function of (seed, id, i), so walkers can be sharded across threads in
// any order and a stream can be reopened at an arbitrary counter to replay a
// walk from a checkpoint.

#include <cstdint>

namespace mwalk {

class RandomStream {
public:
    explicit RandomStream(uint64_t seed, uint64_t stream_id = 0);

    uint64_t next_u64();
    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01();
    // Standard normal via Box-Muller; consumes exactly two u64 draws and
    // caches nothing, so counter arithmetic stays exact across checkpoints.
    double normal();

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_id_; }
    uint64_t counter() const { return counter_; }
    void seek(uint64_t counter) { counter_ = counter; }

private:
    uint64_t seed_ = 0;
    uint64_t stream_id_ = 0;
    uint64_t base_ = 0;
    uint64_t gamma_ = 0;
    uint64_t counter_ = 0;
};

}  // namespace mwalk
