#ifndef FMCHAN_ADAM_HPP
#define FMCHAN_ADAM_HPP

#include <vector>

#include "fmchan/errors.hpp"

namespace fmchan {

struct AdamState {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamState(std::size_t n, double lr = 1e-4)
        : learning_rate(lr), m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update in place. Non-finite gradients abort with
// the failing step index before touching the parameters.
void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads);

} // namespace fmchan

#endif
