#ifndef FMCHAN_ESTIMATOR_HPP
#define FMCHAN_ESTIMATOR_HPP

#include <functional>

#include "fmchan/channel.hpp"
#include "fmchan/tensor.hpp"
#include "fmchan/velocity_net.hpp"

namespace fmchan {

struct EstimatorConfig {
    int iterations = 100; // K
    // Step size gamma_k = gamma_c * sigma^2 / N_p unless fixed_gamma > 0.
    // Random unit-power pilots push eigenvalues of P P^H up to ~4*N_p, so the
    // fidelity multiplier 1 - gamma_c*lambda/N_p only stays in [-1,1] for
    // gamma_c <= 1/2; 0.25 keeps it nonnegative over the whole spectrum.
    double gamma_c = 0.25;
    double fixed_gamma = 0.0;
    int m_samples = 1;
    // Re-noising draws match the training source distribution by default
    // (stacked planes unit variance, i.e. CN(0,2) per complex entry). The
    // literal flag switches to CN(0,1).
    bool paper_literal_noise = false;

    void validate() const;
};

struct PilotObservation {
    ComplexMatrix y; // N_r x N_p
    ComplexMatrix p; // N_t x N_p
    double sigma2 = 1.0;
    double snr_db = 0.0;
    double alpha = 1.0;

    int n_r() const { return y.rows(); }
    int n_t() const { return p.rows(); }
    int n_p() const { return p.cols(); }
    void validate() const;
};

// Y = H P + N with per-entry noise variance sigma^2 = N_t / 10^(snr_db/10).
PilotObservation simulate_observation(const ComplexMatrix& h, const ComplexMatrix& p,
                                      double snr_db, Rng noise_rng);

// Stream id for per-sample estimator base RNGs; estimate() forks the named
// init and re-noise streams from the base it is given.
inline constexpr std::uint64_t kEstimatorBaseStream = 0xE57;

// Any velocity field with the network's calling convention; lets oracle
// fields stand in for a trained net in tests.
using VelocityFn = std::function<RealTensor3(const RealTensor3&, double)>;

inline VelocityFn as_velocity(const VelocityNet& net) {
    return [&net](const RealTensor3& x, double t) { return net.forward(x, t); };
}

// One-shot extrapolation to the path endpoint: x + (1-t)*velocity(x,t).
// Undefined at t = 1.
RealTensor3 denoise(const VelocityFn& velocity, const RealTensor3& x, double t);
RealTensor3 denoise(const VelocityNet& net, const RealTensor3& x, double t);

// Gradient step on the pilot data-fidelity term:
// H + gamma * (Y - H P) P^H / sigma^2.
ComplexMatrix fidelity_step(const ComplexMatrix& h_k, const PilotObservation& obs,
                            double gamma_k);

// S((1-t)*eps + t*z) with eps i.i.d. complex Gaussian.
RealTensor3 renoise(const ComplexMatrix& z, double t, Rng& rng,
                    bool paper_literal_noise = false);

// Plug-and-play proximal gradient descent over K uniform time steps
// t_k = k/K: fidelity step, re-noise, denoise, repeat.
ComplexMatrix estimate(const VelocityFn& velocity, const PilotObservation& obs,
                       const EstimatorConfig& config, const Rng& rng);
ComplexMatrix estimate(const VelocityNet& net, const PilotObservation& obs,
                       const EstimatorConfig& config, const Rng& rng);

// Average of config.m_samples independent runs (forked init/re-noise
// streams keyed by run index).
ComplexMatrix estimate_mmse(const VelocityNet& net, const PilotObservation& obs,
                            const EstimatorConfig& config, const Rng& rng);

// Minimum-norm least squares: Y P^H (P P^H)^+.
ComplexMatrix estimate_ls(const PilotObservation& obs);

// Linear MMSE with a sample covariance prior over vec(H) (column-major),
// zero mean assumed. Dense solve; guarded to N_r*N_t <= 4096.
ComplexMatrix channel_covariance(const ChannelDataset& train_dataset);
ComplexMatrix estimate_lmmse(const PilotObservation& obs, const ComplexMatrix& covariance);
ComplexMatrix estimate_lmmse(const PilotObservation& obs, const ChannelDataset& train_dataset);

} // namespace fmchan

#endif
