#ifndef FMCHAN_RNG_HPP
#define FMCHAN_RNG_HPP

#include <cmath>
#include <cstdint>

namespace fmchan {

// Named sub-streams fanned out from one user-facing seed. Keeping them apart
// means e.g. changing the batch schedule cannot shift the noise draws.
enum class Stream : std::uint64_t {
    Dataset = 0,
    Pilots = 1,
    Noise = 2,
    TrainingBatch = 3,
    EstimatorInit = 4,
    EstimatorRenoise = 5,
};

// Counter-based generator: the output sequence is a pure function of an
// immutable key and a draw counter (splitmix64 over the counter). Forking
// derives a child key from (key, child id) only, so a fork taken before or
// after any number of draws yields the same child stream, and per-index forks
// make parallel generation bit-identical to sequential.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream_id)
        : key_(mix(mix(seed + kGolden) ^ mix(stream_id ^ kStreamSalt))), counter_(0) {}

    Rng(std::uint64_t seed, Stream stream) : Rng(seed, static_cast<std::uint64_t>(stream)) {}

    Rng fork(std::uint64_t child_id) const {
        return Rng(FromKey{}, mix((key_ ^ kForkSalt) + (child_id + 1) * kGolden));
    }
    Rng fork(Stream stream) const { return fork(static_cast<std::uint64_t>(stream)); }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller; explicit so sequences are pinned by this
    // code rather than by the standard library's unspecified algorithm.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t key() const { return key_; }

private:
    struct FromKey {};
    Rng(FromKey, std::uint64_t key) : key_(key), counter_(0) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += kGolden;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kStreamSalt = 0x53F4A7C15E3779B9ULL;
    static constexpr std::uint64_t kForkSalt = 0xD1B54A32D192ED03ULL;

    std::uint64_t key_;
    std::uint64_t counter_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace fmchan

#endif
