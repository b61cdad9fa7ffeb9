#ifndef FMCHAN_CHANNEL_HPP
#define FMCHAN_CHANNEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fmchan/tensor.hpp"

namespace fmchan {

struct ArrayGeometry {
    int n_t = 64;
    int n_r = 16;
    double spacing_wavelengths = 0.5;

    void validate() const;
};

// Geometric clustered multipath profile. The cluster/LOS bearing angles are a
// fixed function of `seed`, so one profile describes one propagation
// environment and per-sample randomness lives in ray gains and ray angle
// jitter only.
struct ClusterProfile {
    std::string name = "custom";
    int num_clusters = 8;
    int rays_per_cluster = 20;
    double angular_spread_deg = 5.0;
    double cluster_power_decay_db = 3.0;
    bool los = false;
    double rician_k_db = 13.0;
    std::uint64_t seed = 0;

    void validate() const;

    static ClusterProfile nlos_c_like(std::uint64_t seed);
    static ClusterProfile los_d_like(std::uint64_t seed);
    // Recognizes "nlos-c-like" and "los-d-like".
    static ClusterProfile named(const std::string& name, std::uint64_t seed);

    std::string to_json() const;
    static ClusterProfile from_json(const std::string& text);
};

struct ChannelDataset {
    ArrayGeometry geometry;
    ClusterProfile profile;
    std::vector<ComplexMatrix> samples;
    // Average per-entry power over the whole set before normalization.
    double normalization_power = 1.0;
};

// Uniform linear array response: entry m = exp(i*2*pi*spacing*m*sin(angle)).
std::vector<cplx> steering_vector(int n_antennas, double spacing_wavelengths, double angle_deg);

// One channel realization. Expected per-entry power is 1 by construction:
// cluster powers follow the configured exponential decay and sum to 1, each
// cluster's power is split evenly over its rays, and a LOS component (when
// enabled) takes the Rician K/(K+1) share against 1/(K+1) for the diffuse sum.
ComplexMatrix generate_channel(const ArrayGeometry& geometry, const ClusterProfile& profile,
                               Rng rng);

// num_samples realizations normalized so the mean per-entry power over the
// whole set is exactly 1. Generation forks one RNG stream per sample index,
// so a parallel build equals the sequential one bit for bit.
ChannelDataset build_dataset(const ArrayGeometry& geometry, const ClusterProfile& profile,
                             int num_samples, const Rng& rng, int threads = 1);

void save_dataset(const ChannelDataset& dataset, const std::string& path);
ChannelDataset load_dataset(const std::string& path);

} // namespace fmchan

#endif
