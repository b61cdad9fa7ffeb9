#include "fmchan/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "fmchan/threading.hpp"

namespace fmchan {

void TrainConfig::validate() const {
    if (epochs < 1 || steps_per_epoch < 1 || batch_size < 1)
        throw DomainError("train config: epochs, steps and batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw DomainError("train config: learning rate must be > 0");
    if (checkpoint_every_epochs < 1)
        throw DomainError("train config: checkpoint cadence must be >= 1");
}

void TrainLog::save_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open train log for writing: " + path);
    out << "step,epoch,loss,wallclock_ms\n";
    const std::size_t steps_per_epoch =
        epoch_mean_loss.empty() ? step_loss.size() : step_loss.size() / epoch_mean_loss.size();
    char buf[128];
    for (std::size_t i = 0; i < step_loss.size(); ++i) {
        const std::size_t epoch = steps_per_epoch ? i / steps_per_epoch : 0;
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.9g,%.3f\n", i, epoch, step_loss[i],
                      i < step_wallclock_ms.size() ? step_wallclock_ms[i] : 0.0);
        out << buf;
    }
}

RealTensor3 interpolate(const RealTensor3& x0, const RealTensor3& x1, double t) {
    if (!x0.same_shape(x1)) throw StructuralError("interpolate: shapes disagree");
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("interpolate: t must be in [0,1]");
    RealTensor3 out(x0.rows(), x0.cols());
    const double* a = x0.data();
    const double* b = x1.data();
    double* o = out.data();
    const double u = 1.0 - t;
    for (std::size_t i = 0; i < out.size(); ++i) o[i] = u * a[i] + t * b[i];
    return out;
}

namespace {

// One sample's loss and (optionally) parameter gradient.
double sample_loss(const VelocityNet& net, const CfmSample& s, std::vector<double>* grad) {
    ad::Tape tape;
    ad::Tensor in(ad::Shape::t4(1, 2, s.x0.rows(), s.x0.cols()));
    {
        const RealTensor3 xt = interpolate(s.x0, s.x1, s.t);
        std::memcpy(in.ptr(), xt.data(), xt.size() * sizeof(double));
    }
    std::vector<int> param_leaves;
    const int out = net.build_graph(tape, tape.leaf(std::move(in)), {s.t}, &param_leaves);

    ad::Tensor target(tape.value(out).shape);
    {
        double* tp = target.ptr();
        const double* a = s.x1.data();
        const double* b = s.x0.data();
        for (std::size_t i = 0; i < target.size(); ++i) tp[i] = a[i] - b[i];
    }
    const int loss = tape.sum_squares(tape.sub(out, tape.leaf(std::move(target))));
    const double loss_value = tape.value(loss).ptr()[0];
    if (grad) {
        tape.backward(loss);
        const auto& segs = net.segments();
        for (std::size_t k = 0; k < segs.size(); ++k) {
            const double* g = tape.grad(param_leaves[k]).ptr();
            double* dst = grad->data() + segs[k].offset;
            for (std::size_t i = 0; i < segs[k].size; ++i) dst[i] += g[i];
        }
    }
    return loss_value;
}

} // namespace

double cfm_loss(const VelocityNet& net, const std::vector<CfmSample>& batch,
                std::vector<double>* grad_out, int threads) {
    if (batch.empty()) throw DomainError("cfm_loss: batch must be non-empty");
    for (const CfmSample& s : batch) {
        if (!s.x0.same_shape(s.x1)) throw StructuralError("cfm_loss: x0/x1 shapes disagree");
        if (!(s.t >= 0.0 && s.t <= 1.0)) throw DomainError("cfm_loss: t must be in [0,1]");
    }
    const std::size_t b = batch.size();
    std::vector<double> losses(b, 0.0);
    std::vector<std::vector<double>> grads;
    if (grad_out) grads.assign(b, std::vector<double>(net.param_count(), 0.0));

    parallel_for(b, threads, [&](std::size_t i) {
        losses[i] = sample_loss(net, batch[i], grad_out ? &grads[i] : nullptr);
    });

    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) total += losses[i];
    total /= static_cast<double>(b);
    if (!std::isfinite(total)) throw TrainingError("cfm_loss: non-finite loss", 0);

    if (grad_out) {
        grad_out->assign(net.param_count(), 0.0);
        const double inv_b = 1.0 / static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i) {
            const std::vector<double>& g = grads[i];
            for (std::size_t k = 0; k < g.size(); ++k) (*grad_out)[k] += g[k];
        }
        for (double& v : *grad_out) v *= inv_b;
    }
    return total;
}

namespace {

void write_checkpoint_atomic(const VelocityNet& net, const std::string& path) {
    const std::string tmp = path + ".tmp";
    save_checkpoint(net, tmp);
    std::filesystem::rename(tmp, path);
}

} // namespace

TrainResult train(const ChannelDataset& dataset, const TrainConfig& config,
                  const VelocityNetArch& arch) {
    config.validate();
    if (dataset.samples.empty()) throw DomainError("train: dataset is empty");
    if (arch.rows != dataset.geometry.n_r || arch.cols != dataset.geometry.n_t)
        throw StructuralError("train: arch input " + std::to_string(arch.rows) + "x" +
                              std::to_string(arch.cols) + " does not match dataset " +
                              std::to_string(dataset.geometry.n_r) + "x" +
                              std::to_string(dataset.geometry.n_t));
    arch.validate();

    VelocityNet net(arch);
    Rng rng(config.seed, Stream::TrainingBatch);
    init_params(net, rng);

    AdamState adam(net.param_count(), config.learning_rate);
    TrainLog log;
    log.step_loss.reserve(static_cast<std::size_t>(config.epochs) * config.steps_per_epoch);

    const std::size_t n = dataset.samples.size();
    std::vector<RealTensor3> stacked(n);
    for (std::size_t i = 0; i < n; ++i) stacked[i] = stack(dataset.samples[i]);

    std::vector<double> grads(net.param_count());
    long global_step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        const auto epoch_start = std::chrono::steady_clock::now();
        for (int step = 0; step < config.steps_per_epoch; ++step, ++global_step) {
            const auto step_start = std::chrono::steady_clock::now();

            std::vector<CfmSample> batch(config.batch_size);
            for (int i = 0; i < config.batch_size; ++i)
                batch[i].x1 = stacked[rng.next_u64() % n];
            for (int i = 0; i < config.batch_size; ++i)
                batch[i].x0 = draw_gaussian_tensor(rng, arch.rows, arch.cols);
            for (int i = 0; i < config.batch_size; ++i) batch[i].t = rng.next_double();

            double loss = 0.0;
            try {
                loss = cfm_loss(net, batch, &grads, config.threads);
                adam_step(adam, net.params(), grads);
            } catch (const TrainingError&) {
                // Cadence checkpoints written so far stay on disk.
                throw TrainingError("train: non-finite loss or gradient", global_step);
            }

            const auto step_end = std::chrono::steady_clock::now();
            log.step_loss.push_back(loss);
            log.step_wallclock_ms.push_back(
                std::chrono::duration<double, std::milli>(step_end - step_start).count());
            epoch_loss += loss;
        }
        const auto epoch_end = std::chrono::steady_clock::now();
        log.epoch_mean_loss.push_back(epoch_loss / config.steps_per_epoch);
        log.epoch_wallclock_ms.push_back(
            std::chrono::duration<double, std::milli>(epoch_end - epoch_start).count());

        if (!config.checkpoint_path.empty() &&
            ((epoch + 1) % config.checkpoint_every_epochs == 0 || epoch + 1 == config.epochs))
            write_checkpoint_atomic(net, config.checkpoint_path);
    }
    return TrainResult{std::move(net), std::move(log)};
}

TrainResult train(const ChannelDataset& dataset, const TrainConfig& config) {
    return train(dataset, config,
                 VelocityNetArch::named(config.arch, dataset.geometry.n_r,
                                        dataset.geometry.n_t));
}

} // namespace fmchan
