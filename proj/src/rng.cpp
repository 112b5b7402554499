#include "admitlab/rng.hpp"

#include "admitlab/statfns.hpp"

namespace admitlab {

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

double CounterRng::normal_at(std::uint64_t counter) const {
    return stat::quantile(uniform_at(counter));
}

}  // namespace admitlab
