#pragma once

#include <cstdint>
#include <random>

#include "statefuzz/tensor.hpp"

namespace statefuzz {

// Deterministic random source. Every stochastic choice in the library is
// drawn from one of these, seeded explicitly, so identical seeds replay
// identical runs byte for byte.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Derive an independent stream, e.g. per (run, input) in a campaign.
    static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
        std::uint64_t h = seed;
        h = mix(h ^ (0x9e3779b97f4a7c15ULL + a));
        h = mix(h ^ (0xbf58476d1ce4e5b9ULL + b));
        return Rng(h);
    }

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(engine_);
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
        return d(engine_);
    }

    double gaussian(double stddev) {
        std::normal_distribution<double> d(0.0, stddev);
        return d(engine_);
    }

    Tensor uniform_tensor(std::vector<std::size_t> shape, double lo, double hi) {
        Tensor t(std::move(shape));
        for (auto& v : t.vec()) v = uniform(lo, hi);
        return t;
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

    std::mt19937_64 engine_;
};

}  // namespace statefuzz
