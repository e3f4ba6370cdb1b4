#pragma once

#include <array>
#include <cstdint>

namespace ounts {

// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// A random stream addressed by (seed, stream_id, lane). The seed is the
// cipher key; stream_id and lane occupy the upper counter words and the
// draw index the lower ones, so any two addresses produce disjoint,
// independent sequences and no state is shared between streams.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t lane = 0);

    std::uint64_t next_u64();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint32_t lane() const { return lane_; }

    // Spare normal from the polar method; owned by the stream so that
    // the sequence stays a pure function of the stream address.
    bool has_spare_normal = false;
    double spare_normal = 0.0;

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint32_t lane_;
    std::uint32_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

}  // namespace ounts
