#ifndef SBMMRF_RANDOM_HPP
#define SBMMRF_RANDOM_HPP

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace sbmmrf {

// Every stochastic routine draws from a 64-bit Mersenne Twister (MT19937-64) seeded with a
// single 64-bit value. Distributions come from Boost.Random, whose algorithms are fixed across
// platforms, so a seed identifies a stream bit-for-bit.
using Rng = boost::random::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream-split rule: child seed for independent stream `stream` of `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    return splitmix64(base ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

} // namespace sbmmrf

#endif // SBMMRF_RANDOM_HPP
