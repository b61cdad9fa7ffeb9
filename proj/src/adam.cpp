#include "fmchan/adam.hpp"

#include <cmath>

namespace fmchan {

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw StructuralError("adam_step: parameter/gradient/state sizes disagree");
    for (double g : grads)
        if (!std::isfinite(g))
            throw TrainingError("adam_step: non-finite gradient", state.step + 1);

    state.step += 1;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

} // namespace fmchan
