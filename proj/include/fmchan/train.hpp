#ifndef FMCHAN_TRAIN_HPP
#define FMCHAN_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fmchan/adam.hpp"
#include "fmchan/channel.hpp"
#include "fmchan/velocity_net.hpp"

namespace fmchan {

// Deliberately knows nothing about pilots or noise: training sees channel
// samples only, so one trained field serves every SNR and pilot pattern.

struct TrainConfig {
    int epochs = 400;
    int steps_per_epoch = 311;
    int batch_size = 32;
    double learning_rate = 1e-4;
    std::uint64_t seed = 0;
    int checkpoint_every_epochs = 10;
    std::string checkpoint_path; // empty disables checkpointing
    std::string arch = "lite";   // lite | full
    int threads = 1;

    void validate() const;
};

struct TrainLog {
    std::vector<double> step_loss;
    std::vector<double> step_wallclock_ms;
    std::vector<double> epoch_mean_loss;
    std::vector<double> epoch_wallclock_ms;

    void save_csv(const std::string& path) const; // step,epoch,loss,wallclock_ms
};

struct CfmSample {
    RealTensor3 x0;
    RealTensor3 x1;
    double t = 0.0;
};

// (1-t)*x0 + t*x1 elementwise.
RealTensor3 interpolate(const RealTensor3& x0, const RealTensor3& x1, double t);

// Mean over the batch of |psi(x_t, t) - (x1 - x0)|^2. When grad_out is
// non-null it receives d(loss)/d(params), summed deterministically in batch
// order regardless of thread count.
double cfm_loss(const VelocityNet& net, const std::vector<CfmSample>& batch,
                std::vector<double>* grad_out = nullptr, int threads = 1);

struct TrainResult {
    VelocityNet net;
    TrainLog log;
};

// The full loop: per step, sample a batch from the dataset (uniform, with
// replacement), pair with Gaussian sources and uniform times, and take one
// Adam step on the flow matching loss. A non-finite loss aborts with the last
// cadence checkpoint left on disk.
TrainResult train(const ChannelDataset& dataset, const TrainConfig& config,
                  const VelocityNetArch& arch);
TrainResult train(const ChannelDataset& dataset, const TrainConfig& config);

} // namespace fmchan

#endif
