#pragma once

#include <cstdint>

namespace admitlab {

// Counter-based generator: the value for (key, counter) is the SplitMix64 finalizer applied to
// key + (counter + 1) * golden. Any student/feature cell can be drawn independently of every
// other cell, which keeps results identical for any partition of work across threads.
std::uint64_t mix64(std::uint64_t x);

class CounterRng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(seed ^ mix64(stream + kGolden))) {}

    std::uint64_t at(std::uint64_t counter) const { return mix64(key_ + (counter + 1) * kGolden); }
    // Uniform on (0,1), never exactly 0 or 1.
    double uniform_at(std::uint64_t counter) const {
        return (static_cast<double>(at(counter) >> 11) + 0.5) * 0x1.0p-53;
    }
    double normal_at(std::uint64_t counter) const;

    // Sequential interface for small sequential consumers.
    std::uint64_t next() { return at(pos_++); }
    double uniform() { return uniform_at(pos_++); }
    double normal() { return normal_at(pos_++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * n) % n; }

private:
    std::uint64_t key_;
    std::uint64_t pos_ = 0;
};

}  // namespace admitlab
