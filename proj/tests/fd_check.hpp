#ifndef FMCHAN_TESTS_FD_CHECK_HPP
#define FMCHAN_TESTS_FD_CHECK_HPP

// Central finite-difference oracle for reverse-mode gradients. Lives in test
// code only; it never calls the backward pass it is checking.

#include <cmath>
#include <functional>
#include <vector>

#include "fmchan/autodiff.hpp"
#include "fmchan/rng.hpp"

namespace fmchan::fdtest {

// Builds a scalar loss node on the tape from already-inserted leaves.
using GraphBuilder = std::function<int(ad::Tape&, const std::vector<int>&)>;

inline double eval_loss(const std::vector<ad::Tensor>& inputs, const GraphBuilder& build) {
    ad::Tape tape;
    std::vector<int> ids;
    ids.reserve(inputs.size());
    for (const ad::Tensor& t : inputs) ids.push_back(tape.leaf(t));
    return tape.value(build(tape, ids)).ptr()[0];
}

struct FdReport {
    double max_rel_err = 0.0;
    int checked = 0;
};

inline FdReport fd_check(std::vector<ad::Tensor> inputs, const GraphBuilder& build, Rng& rng,
                         int probes_per_input = 6, double step = 1e-4) {
    // Analytic gradients.
    ad::Tape tape;
    std::vector<int> ids;
    for (const ad::Tensor& t : inputs) ids.push_back(tape.leaf(t));
    tape.backward(build(tape, ids));

    FdReport report;
    for (std::size_t which = 0; which < inputs.size(); ++which) {
        const std::size_t n = inputs[which].size();
        if (n == 0) continue;
        for (int probe = 0; probe < probes_per_input; ++probe) {
            const std::size_t idx = rng.next_u64() % n;
            const double analytic = tape.grad(ids[which]).ptr()[idx];

            const double saved = inputs[which].ptr()[idx];
            inputs[which].ptr()[idx] = saved + step;
            const double plus = eval_loss(inputs, build);
            inputs[which].ptr()[idx] = saved - step;
            const double minus = eval_loss(inputs, build);
            inputs[which].ptr()[idx] = saved;

            const double fd = (plus - minus) / (2.0 * step);
            const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
            report.max_rel_err = std::max(report.max_rel_err, std::abs(fd - analytic) / denom);
            report.checked += 1;
        }
    }
    return report;
}

inline ad::Tensor random_tensor(ad::Shape shape, Rng& rng, double scale = 1.0) {
    ad::Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t.ptr()[i] = scale * rng.next_gaussian();
    return t;
}

} // namespace fmchan::fdtest

#endif
