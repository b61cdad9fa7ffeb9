#ifndef FMCHAN_VELOCITY_NET_HPP
#define FMCHAN_VELOCITY_NET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fmchan/autodiff.hpp"
#include "fmchan/rng.hpp"
#include "fmchan/tensor.hpp"

namespace fmchan {

// U-Net shape-preserving velocity field over a 2 x rows x cols input.
// widths[i] is the feature width of encoder/decoder level i; every level
// halves the spatial dims, so rows and cols must be divisible by 2^levels.
struct VelocityNetArch {
    int rows = 0;
    int cols = 0;
    std::vector<int> widths;
    int temb_dim = 64;

    int levels() const { return static_cast<int>(widths.size()); }
    void validate() const;

    std::string to_json() const;
    static VelocityNetArch from_json(const std::string& text);

    // The two configurations the CLI exposes. The full network lands at
    // roughly 3.7M parameters on a 16x64 aperture.
    static VelocityNetArch full(int rows, int cols) {
        return VelocityNetArch{rows, cols, {64, 128, 256}, 64};
    }
    static VelocityNetArch lite(int rows, int cols) {
        return VelocityNetArch{rows, cols, {16, 32}, 32};
    }
    static VelocityNetArch named(const std::string& name, int rows, int cols);
};

struct ParamSegment {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
    int fan_in = 0;      // 0 for biases
    bool zero_init = false;
    ad::Shape shape;
};

class VelocityNet {
public:
    explicit VelocityNet(VelocityNetArch arch);

    const VelocityNetArch& arch() const { return arch_; }
    const std::vector<ParamSegment>& segments() const { return segments_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Builds the network on `tape` for a batch input node of shape
    // (N, 2, rows, cols) with one time value per batch element. Returns the
    // output node; if param_leaf_ids is non-null it receives one leaf id per
    // segment, in segment order.
    int build_graph(ad::Tape& tape, int input_node, const std::vector<double>& t_batch,
                    std::vector<int>* param_leaf_ids = nullptr) const;

    // Single-sample evaluation; t must lie in [0,1].
    RealTensor3 forward(const RealTensor3& x, double t) const;

private:
    VelocityNetArch arch_;
    std::vector<ParamSegment> segments_;
    std::vector<double> params_;
};

// Sinusoidal features of t: temb_dim/2 sines then temb_dim/2 cosines at
// frequencies spaced geometrically from 1 to 1e4.
std::vector<double> time_embedding(double t, int temb_dim);

// He-normal weights (variance 2/fan_in), zero biases, and an exactly zero
// final projection so a fresh network is the zero velocity field.
void init_params(VelocityNet& net, Rng& rng);

void save_checkpoint(const VelocityNet& net, const std::string& path);
VelocityNet load_checkpoint(const std::string& path);

} // namespace fmchan

#endif
