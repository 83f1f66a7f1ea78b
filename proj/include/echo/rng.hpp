// rng.hpp - counter-based splittable random number generator
//
// Stateless output function: draw i of stream (seed, stream, substream) is a
// hash of the key and the counter, so streams can be created per ion / per
// event and consumed in any schedule while staying bit-reproducible.
// The mix function is the SplitMix64 finalizer (Steele, Lea & Flood 2014).
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace echo {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0,
                        std::uint64_t substream = 0)
        : key_(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ substream)) {}

    /// Independent child stream; does not disturb this stream's counter.
    CounterRng fork(std::uint64_t substream) const {
        CounterRng child(0);
        child.key_ = splitmix64(key_ ^ splitmix64(substream ^ 0xA5A5A5A5A5A5A5A5ull));
        return child;
    }

    std::uint64_t next_u64() { return splitmix64(key_ + counter_++ * 0x9E3779B97F4A7C15ull); }

    /// Uniform on the open interval (0, 1); never 0 or 1, safe for log/tan.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        return r * std::cos(2.0 * std::numbers::pi * uniform());
    }

    /// Exponential inter-arrival time for the given rate (> 0).
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Cauchy (Lorentzian) deviate with the given half-width scale.
    double cauchy(double scale) {
        return scale * std::tan(std::numbers::pi * (uniform() - 0.5));
    }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace echo
