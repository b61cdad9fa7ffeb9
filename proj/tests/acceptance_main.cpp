// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line with
// the measured values; the process exits nonzero if any criterion fails.
//
// The desk-scale model (4x16 aperture, lite arch, 30 epochs x 311 steps) is
// trained once by criterion 6 and reused by criteria 7-9 and 11.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "fd_check.hpp"
#include "fmchan/bench.hpp"
#include "fmchan/estimator.hpp"
#include "fmchan/linalg.hpp"
#include "fmchan/manifest.hpp"
#include "fmchan/train.hpp"

using namespace fmchan;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s — %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void run_criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
    try {
        const auto [pass, detail] = fn();
        report(name, pass, detail);
    } catch (const std::exception& e) {
        report(name, false, std::string("exception: ") + e.what());
    }
}

std::string temp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

// ------------------------------------------------------------ shared fixtures

constexpr int kNt = 16;
constexpr int kNr = 4;

struct DeskScale {
    ChannelDataset train_set;
    ChannelDataset test_nlos;
    ChannelDataset test_los;
    std::optional<VelocityNet> net;
    double train_minutes = 0.0;
};

DeskScale desk;

void build_desk_datasets() {
    const ArrayGeometry geom{kNt, kNr, 0.5};
    desk.train_set = build_dataset(geom, ClusterProfile::nlos_c_like(101), 4000,
                                   Rng(101, Stream::Dataset), 1);
    desk.test_nlos = build_dataset(geom, ClusterProfile::nlos_c_like(101), 100,
                                   Rng(202, Stream::Dataset), 1);
    desk.test_los = build_dataset(geom, ClusterProfile::los_d_like(101), 100,
                                  Rng(303, Stream::Dataset), 1);
}

// Mean NMSE in dB for the proposed estimator and LS on one grid point,
// common observations for both methods.
struct PointResult {
    double proposed = 0.0;
    double ls = 0.0;
    std::vector<double> proposed_per_sample;
};

PointResult eval_point(const VelocityNet& net, const ChannelDataset& ds, double snr_db,
                       double alpha, int m_samples = 1) {
    const int n_p = std::max(1, static_cast<int>(std::lround(alpha * kNt)));
    EstimatorConfig cfg; // library defaults: K=100, gamma_c=0.25
    cfg.m_samples = m_samples;
    PointResult r;
    const int alpha_key = static_cast<int>(std::lround(alpha * 100));
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        Rng prng = Rng(9, Stream::Pilots).fork(alpha_key).fork(i);
        Rng nrng = Rng(9, Stream::Noise).fork(alpha_key).fork(i);
        const ComplexMatrix pilots = draw_qpsk_pilots(prng, kNt, n_p);
        const PilotObservation obs =
            simulate_observation(ds.samples[i], pilots, snr_db, nrng);
        const Rng base = Rng(9, kEstimatorBaseStream).fork(i);
        const ComplexMatrix est = m_samples > 1 ? estimate_mmse(net, obs, cfg, base)
                                                : estimate(net, obs, cfg, base);
        const double v = nmse_db(est, ds.samples[i]);
        r.proposed_per_sample.push_back(v);
        r.proposed += v;
        r.ls += nmse_db(estimate_ls(obs), ds.samples[i]);
    }
    r.proposed /= static_cast<double>(ds.samples.size());
    r.ls /= static_cast<double>(ds.samples.size());
    return r;
}

ComplexMatrix random_complex(Rng& rng, int rows, int cols) {
    return draw_complex_gaussian_matrix(rng, rows, cols, 1.0);
}

ComplexMatrix dft_pilots(int n) {
    ComplexMatrix p(n, n);
    for (int j = 0; j < n; ++j)
        for (int q = 0; q < n; ++q) {
            const double phase = -2.0 * M_PI * j * q / n;
            p.at(j, q) = cplx(std::cos(phase), std::sin(phase));
        }
    return p;
}

// ----------------------------------------------------------------- criteria

std::pair<bool, std::string> c1_stacking() {
    const auto t0 = Clock::now();
    Rng rng(1, Stream::Dataset);
    int bad_roundtrip = 0, bad_norm = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int rows = 1 + static_cast<int>(rng.next_u64() % 16);
        const int cols = 1 + static_cast<int>(rng.next_u64() % 64);
        const ComplexMatrix h = random_complex(rng, rows, cols);
        const RealTensor3 x = stack(h);
        const ComplexMatrix back = unstack(x);
        if (std::memcmp(h.data(), back.data(), h.size() * sizeof(cplx)) != 0) ++bad_roundtrip;
        const double frob = h.frobenius_sq();
        if (std::abs(x.sum_sq() - frob) > 4.0 * std::numeric_limits<double>::epsilon() * frob)
            ++bad_norm;
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "1000 matrices up to 16x64: " << bad_roundtrip << " round-trip mismatches, "
      << bad_norm << " norm violations (>4 ulp), " << secs << " s";
    return {bad_roundtrip == 0 && bad_norm == 0 && secs < 1.0, d.str()};
}

std::pair<bool, std::string> c2_autodiff_gate() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    int checks = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(1000 + seed, Stream::Dataset);
        auto track = [&](const fdtest::FdReport& rep) {
            worst = std::max(worst, rep.max_rel_err);
            checks += rep.checked;
        };
        using fdtest::random_tensor;
        using ad::Shape;
        auto ri = [&rng](int lo, int hi) {
            return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
        };
        const int n = ri(1, 2), ci = ri(1, 3), co = ri(1, 3);
        const int h = 2 * ri(1, 3), w = 2 * ri(1, 3);

        track(fdtest::fd_check({random_tensor(Shape::t4(n, ci, h, w), rng),
                                random_tensor(Shape::t4(co, ci, 3, 3), rng, 0.5),
                                random_tensor(Shape::vec(co), rng, 0.2)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.sum_squares(t.conv2d(ids[0], ids[1], ids[2]));
                               },
                               rng, 5));
        track(fdtest::fd_check({random_tensor(Shape::t4(n, ci, h, w), rng),
                                random_tensor(Shape::t4(co, ci, 1, 1), rng, 0.5),
                                random_tensor(Shape::vec(co), rng, 0.2)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.sum_squares(t.conv2d(ids[0], ids[1], ids[2]));
                               },
                               rng, 4));
        track(fdtest::fd_check({random_tensor(Shape::mat(n, 6), rng),
                                random_tensor(Shape::mat(5, 6), rng, 0.5),
                                random_tensor(Shape::vec(5), rng, 0.2)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.sum_squares(t.dense(ids[0], ids[1], ids[2]));
                               },
                               rng, 4));
        track(fdtest::fd_check({random_tensor(Shape::t4(n, ci, h, w), rng)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.sum_squares(t.avg_pool2(ids[0]));
                               },
                               rng, 4));
        track(fdtest::fd_check({random_tensor(Shape::t4(n, ci, h, w), rng)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.sum_squares(t.upsample2(ids[0]));
                               },
                               rng, 4));
        track(fdtest::fd_check({random_tensor(Shape::t4(n, ci, h, w), rng),
                                random_tensor(Shape::t4(n, co, h, w), rng)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.sum_squares(t.concat_channel(ids[0], ids[1]));
                               },
                               rng, 4));
        track(fdtest::fd_check({random_tensor(Shape::t4(n, ci, h, w), rng),
                                random_tensor(Shape::mat(n, ci), rng)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.sum_squares(t.bias_add_channel(ids[0], ids[1]));
                               },
                               rng, 4));
        const Shape s3 = Shape::t3(ri(1, 2), ri(1, 4), ri(1, 4));
        track(fdtest::fd_check({random_tensor(s3, rng)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.sum_squares(t.silu(ids[0]));
                               },
                               rng, 4));
        track(fdtest::fd_check({random_tensor(s3, rng), random_tensor(s3, rng)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.sum(t.mul(t.add(ids[0], ids[1]),
                                                      t.sub(ids[0], ids[1])));
                               },
                               rng, 4));
        track(fdtest::fd_check({random_tensor(s3, rng)},
                               [](ad::Tape& t, const std::vector<int>& ids) {
                                   return t.scale(t.sum_squares(t.scale(ids[0], -0.7)), 0.3);
                               },
                               rng, 4));

        // Full lite-arch flow matching loss, probing the parameters.
        VelocityNet net(VelocityNetArch::lite(4, 4));
        Rng irng(2000 + seed, Stream::TrainingBatch);
        for (const ParamSegment& seg : net.segments()) {
            const double sigma = seg.fan_in > 0 ? std::sqrt(2.0 / seg.fan_in) : 0.05;
            for (std::size_t i = 0; i < seg.size; ++i)
                net.params()[seg.offset + i] = sigma * irng.next_gaussian();
        }
        std::vector<CfmSample> batch(2);
        for (CfmSample& s : batch) {
            s.x0 = draw_gaussian_tensor(rng, 4, 4);
            s.x1 = draw_gaussian_tensor(rng, 4, 4);
            s.t = rng.next_double();
        }
        std::vector<double> grad;
        cfm_loss(net, batch, &grad);
        for (int probe = 0; probe < 12; ++probe) {
            const std::size_t idx = rng.next_u64() % net.param_count();
            const double saved = net.params()[idx];
            const double step = 1e-4;
            net.params()[idx] = saved + step;
            const double plus = cfm_loss(net, batch);
            net.params()[idx] = saved - step;
            const double minus = cfm_loss(net, batch);
            net.params()[idx] = saved;
            const double fd = (plus - minus) / (2.0 * step);
            const double denom = std::max({std::abs(fd), std::abs(grad[idx]), 1e-6});
            worst = std::max(worst, std::abs(fd - grad[idx]) / denom);
            ++checks;
        }
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << checks << " finite-difference probes over 20 seeds, max relative error " << worst
      << " (< 1e-5), " << secs << " s";
    return {worst < 1e-5 && secs < 60.0, d.str()};
}

std::pair<bool, std::string> c3_denoiser_identity() {
    const auto t0 = Clock::now();
    Rng rng(3, Stream::Dataset);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const RealTensor3 x0 = draw_gaussian_tensor(rng, 4, 8);
        const RealTensor3 x1 = draw_gaussian_tensor(rng, 4, 8);
        const double t = 0.99 * rng.next_double();
        RealTensor3 xt(4, 8);
        for (std::size_t i = 0; i < xt.size(); ++i)
            xt.data()[i] = (1.0 - t) * x0.data()[i] + t * x1.data()[i];
        const VelocityFn oracle = [&x1](const RealTensor3& x, double tt) {
            RealTensor3 v(x.rows(), x.cols());
            for (std::size_t i = 0; i < v.size(); ++i)
                v.data()[i] = (x1.data()[i] - x.data()[i]) / (1.0 - tt);
            return v;
        };
        const RealTensor3 out = denoise(oracle, xt, t);
        for (std::size_t i = 0; i < out.size(); ++i)
            worst = std::max(worst, std::abs(out.data()[i] - x1.data()[i]));
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "1000 random (x0,x1,t) triples, max |D_t(x_t) - x1| = " << worst << " (< 1e-9), "
      << secs << " s";
    return {worst < 1e-9 && secs < 1.0, d.str()};
}

std::pair<bool, std::string> c4_constant_target_flow() {
    const auto t0 = Clock::now();
    const ArrayGeometry geom{4, 4, 0.5};
    const ChannelDataset ds = build_dataset(geom, ClusterProfile::nlos_c_like(55), 1,
                                            Rng(55, Stream::Dataset), 1);
    const RealTensor3 target = stack(ds.samples[0]);
    const double baseline = target.sum_sq() + 32.0; // E|x* - x0|^2 for the zero field

    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.steps_per_epoch = 100; // 2000 steps total
    cfg.batch_size = 64;
    cfg.learning_rate = 5e-3;
    cfg.seed = 4;
    const TrainResult r = train(ds, cfg, VelocityNetArch{4, 4, {8, 16}, 32});
    const double final_loss = r.log.epoch_mean_loss.back();

    Rng rng(66, Stream::EstimatorInit);
    double err_sum = 0.0;
    const double tnorm = std::sqrt(target.sum_sq());
    for (int trial = 0; trial < 50; ++trial) {
        RealTensor3 x = draw_gaussian_tensor(rng, 4, 4);
        const int steps = 100;
        for (int k = 0; k < steps; ++k) {
            const RealTensor3 v = r.net.forward(x, static_cast<double>(k) / steps);
            for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += v.data()[i] / steps;
        }
        double dist = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = x.data()[i] - target.data()[i];
            dist += e * e;
        }
        err_sum += std::sqrt(dist) / tnorm;
    }
    const double mean_rel = err_sum / 50.0;
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "2000 steps on a point target: final epoch loss " << final_loss << " (<= "
      << 0.1 * baseline << "), Euler endpoint error " << 100.0 * mean_rel << "% (<= 5%), "
      << secs << " s";
    return {final_loss <= 0.1 * baseline && mean_rel <= 0.05 && secs < 300.0, d.str()};
}

std::pair<bool, std::string> c5_fidelity_one_shot() {
    const auto t0 = Clock::now();
    Rng rng(5, Stream::Dataset);
    const ComplexMatrix p = dft_pilots(kNt);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const ComplexMatrix h = random_complex(rng, kNr, kNt);
        PilotObservation obs;
        obs.p = p;
        obs.y = linalg::matmul(h, p);
        obs.sigma2 = 0.7 + rng.next_double();
        const ComplexMatrix start = random_complex(rng, kNr, kNt);
        const ComplexMatrix z = fidelity_step(start, obs, obs.sigma2 / obs.n_p());
        worst = std::max(worst, std::sqrt((z - h).frobenius_sq() / h.frobenius_sq()));
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "orthogonal full pilots, gamma = sigma^2/N_p: worst relative error " << worst
      << " (< 1e-9), " << secs << " s";
    return {worst < 1e-9 && secs < 1.0, d.str()};
}

const std::vector<double> kSnrGrid = {-10, -5, 0, 5, 10, 15, 20, 25};

std::pair<bool, std::string> c6_desk_scale_quality() {
    const auto t0 = Clock::now();

    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.steps_per_epoch = 311;
    cfg.batch_size = 32;
    cfg.learning_rate = 1e-4;
    cfg.seed = 7;
    cfg.checkpoint_path = temp_path("fmchan_acceptance_model.fmck");
    cfg.checkpoint_every_epochs = 10;
    const auto train_start = Clock::now();
    TrainResult r = train(desk.train_set, cfg, VelocityNetArch::lite(kNr, kNt));
    desk.train_minutes = seconds_since(train_start) / 60.0;
    desk.net = std::move(r.net);

    bool margin_at_0 = false, below_ls_everywhere = true, monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    std::ostringstream curve;
    for (double snr : kSnrGrid) {
        const PointResult pr = eval_point(*desk.net, desk.test_nlos, snr, 1.0);
        curve << std::fixed;
        curve.precision(2);
        curve << " [" << snr << ": " << pr.proposed << " vs LS " << pr.ls << "]";
        if (snr == 0.0 && pr.proposed <= pr.ls - 3.0) margin_at_0 = true;
        if (pr.proposed > pr.ls) below_ls_everywhere = false;
        if (pr.proposed > prev + 0.5) monotone = false;
        prev = pr.proposed;
    }
    const double mins = seconds_since(t0) / 60.0;
    std::ostringstream d;
    d << "NLOS, alpha=1, K=100, 30x311 steps (train " << desk.train_minutes
      << " min): (a) >=3 dB margin at SNR 0: " << (margin_at_0 ? "yes" : "NO")
      << "; (b) <= LS everywhere: " << (below_ls_everywhere ? "yes" : "NO")
      << "; (c) monotone within 0.5 dB: " << (monotone ? "yes" : "NO") << ";" << curve.str()
      << " — " << mins << " min total";
    return {margin_at_0 && below_ls_everywhere && monotone && mins < 30.0, d.str()};
}

std::pair<bool, std::string> c7_out_of_distribution() {
    if (!desk.net) return {false, "no trained model (criterion 6 failed earlier)"};
    bool ok_high_snr = true, finite = true;
    std::ostringstream curve;
    for (double snr : kSnrGrid) {
        const PointResult pr = eval_point(*desk.net, desk.test_los, snr, 1.0);
        for (double v : pr.proposed_per_sample)
            if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) finite = false;
        if (snr >= 10.0 && pr.proposed > pr.ls) ok_high_snr = false;
        curve << std::fixed;
        curve.precision(2);
        curve << " [" << snr << ": " << pr.proposed << " vs LS " << pr.ls << "]";
    }
    std::ostringstream d;
    d << "LOS test set (distribution shift): <= LS at SNR >= 10: " << (ok_high_snr ? "yes" : "NO")
      << "; all estimates finite: " << (finite ? "yes" : "NO") << ";" << curve.str();
    return {ok_high_snr && finite, d.str()};
}

std::pair<bool, std::string> c8_pilot_density_trend() {
    if (!desk.net) return {false, "no trained model (criterion 6 failed earlier)"};
    std::vector<double> means;
    std::ostringstream curve;
    for (double alpha : {0.5, 0.75, 1.0}) {
        const PointResult pr = eval_point(*desk.net, desk.test_nlos, 25.0, alpha);
        means.push_back(pr.proposed);
        curve << std::fixed;
        curve.precision(2);
        curve << " [alpha " << alpha << ": " << pr.proposed << "]";
    }
    const bool ok = means[1] <= means[0] + 0.5 && means[2] <= means[1] + 0.5;
    std::ostringstream d;
    d << "SNR 25 dB: NMSE non-increasing in alpha within 0.5 dB: " << (ok ? "yes" : "NO")
      << ";" << curve.str();
    return {ok, d.str()};
}

std::pair<bool, std::string> c9_mmse_gain() {
    if (!desk.net) return {false, "no trained model (criterion 6 failed earlier)"};
    const PointResult single = eval_point(*desk.net, desk.test_nlos, 10.0, 1.0, 1);
    const PointResult mmse4 = eval_point(*desk.net, desk.test_nlos, 10.0, 1.0, 4);
    const bool ok = mmse4.proposed <= single.proposed + 0.1;
    std::ostringstream d;
    d << std::fixed;
    d.precision(3);
    d << "SNR 10 dB, same observations: single " << single.proposed << " dB, 4-sample average "
      << mmse4.proposed << " dB (<= single + 0.1)";
    return {ok, d.str()};
}

std::pair<bool, std::string> c10_runtime_laws() {
    const auto t0 = Clock::now();
    const int rows = 8, cols = 16;

    VelocityNet lite(VelocityNetArch::lite(rows, cols));
    VelocityNet full(VelocityNetArch::full(rows, cols));
    Rng lrng(1, Stream::TrainingBatch), frng(2, Stream::TrainingBatch);
    init_params(lite, lrng);
    init_params(full, frng);

    Rng drng(3, Stream::Dataset);
    const ComplexMatrix h = random_complex(drng, rows, cols);
    Rng prng(4, Stream::Pilots), nrng(5, Stream::Noise);
    const ComplexMatrix pilots = draw_qpsk_pilots(prng, cols, cols);
    const PilotObservation obs = simulate_observation(h, pilots, 10.0, nrng);

    auto run_estimates = [&obs](const VelocityNet& net, int k) {
        return [&obs, &net, k](int i) {
            EstimatorConfig cfg;
            cfg.iterations = k;
            estimate(net, obs, cfg, Rng(11, kEstimatorBaseStream).fork(i));
        };
    };

    const bench::RuntimeStats lite100 = bench::measure_runtime(run_estimates(lite, 100), 5, 2);
    const bench::RuntimeStats lite200 = bench::measure_runtime(run_estimates(lite, 200), 5, 1);
    const bench::RuntimeStats full100 = bench::measure_runtime(run_estimates(full, 100), 3, 1);

    const double k_ratio = lite200.mean_ms / lite100.mean_ms;
    const double arch_ratio = full100.mean_ms / lite100.mean_ms;
    const bool mem_ok = lite100.peak_mem_bytes < full100.peak_mem_bytes;
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << std::fixed;
    d.precision(2);
    d << "single-threaded at 8x16: K=200/K=100 ratio " << k_ratio
      << " (in [1.6,2.4]); full/lite runtime ratio " << arch_ratio << " (>= 3); peak mem lite "
      << lite100.peak_mem_bytes << " B < full " << full100.peak_mem_bytes << " B: "
      << (mem_ok ? "yes" : "NO") << "; " << secs << " s";
    return {k_ratio >= 1.6 && k_ratio <= 2.4 && arch_ratio >= 3.0 && mem_ok && secs < 600.0,
            d.str()};
}

std::pair<bool, std::string> c11_reproducibility() {
    if (!desk.net) return {false, "no trained model (criterion 6 failed earlier)"};
    std::ostringstream d;

    // Dataset files: regenerate and rewrite, digests must match.
    const ArrayGeometry geom{kNt, kNr, 0.5};
    const std::string f1 = temp_path("fmchan_acceptance_ds1.fmch");
    const std::string f2 = temp_path("fmchan_acceptance_ds2.fmch");
    save_dataset(build_dataset(geom, ClusterProfile::nlos_c_like(101), 50,
                               Rng(101, Stream::Dataset), 1),
                 f1);
    save_dataset(build_dataset(geom, ClusterProfile::nlos_c_like(101), 50,
                               Rng(101, Stream::Dataset), 1),
                 f2);
    const bool ds_ok = digest_file(f1).crc32_hex == digest_file(f2).crc32_hex;
    fs::remove(f1);
    fs::remove(f2);

    // Training: a short run twice, parameters and loss columns bitwise equal.
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.steps_per_epoch = 10;
    cfg.batch_size = 8;
    cfg.seed = 31;
    const TrainResult t1 = train(desk.test_nlos, cfg, VelocityNetArch::lite(kNr, kNt));
    const TrainResult t2 = train(desk.test_nlos, cfg, VelocityNetArch::lite(kNr, kNt));
    const bool train_ok =
        t1.net.params() == t2.net.params() && t1.log.step_loss == t2.log.step_loss;

    // Checkpoint files written twice digest identically.
    const std::string ck1 = temp_path("fmchan_acceptance_ck1.fmck");
    const std::string ck2 = temp_path("fmchan_acceptance_ck2.fmck");
    save_checkpoint(t1.net, ck1);
    save_checkpoint(t2.net, ck2);
    const bool ck_ok = digest_file(ck1).crc32_hex == digest_file(ck2).crc32_hex;
    fs::remove(ck1);
    fs::remove(ck2);

    // Estimation: the full SNR-10 evaluation re-executed, NMSE bitwise equal.
    const PointResult e1 = eval_point(*desk.net, desk.test_nlos, 10.0, 1.0);
    const PointResult e2 = eval_point(*desk.net, desk.test_nlos, 10.0, 1.0);
    const bool est_ok = e1.proposed_per_sample == e2.proposed_per_sample;

    d << "dataset file digests: " << (ds_ok ? "identical" : "DIFFER")
      << "; short training runs: " << (train_ok ? "bitwise equal" : "DIFFER")
      << "; checkpoint digests: " << (ck_ok ? "identical" : "DIFFER")
      << "; 100-sample NMSE re-run: " << (est_ok ? "bitwise equal" : "DIFFER");
    return {ds_ok && train_ok && ck_ok && est_ok, d.str()};
}

} // namespace

int main() {
    std::printf("acceptance suite (desk scale %dx%d)\n", kNr, kNt);
    const auto t0 = Clock::now();
    build_desk_datasets();

    run_criterion("C1 stacking bijection and isometry", c1_stacking);
    run_criterion("C2 autodiff finite-difference gate", c2_autodiff_gate);
    run_criterion("C3 denoiser identity on the straight-line oracle", c3_denoiser_identity);
    run_criterion("C4 constant-target flow sanity", c4_constant_target_flow);
    run_criterion("C5 fidelity-step one-shot recovery", c5_fidelity_one_shot);
    run_criterion("C6 desk-scale estimation quality", c6_desk_scale_quality);
    run_criterion("C7 out-of-distribution robustness", c7_out_of_distribution);
    run_criterion("C8 pilot-density trend", c8_pilot_density_trend);
    run_criterion("C9 approximate-MMSE gain", c9_mmse_gain);
    run_criterion("C10 runtime and memory laws", c10_runtime_laws);
    run_criterion("C11 reproducibility", c11_reproducibility);

    std::printf("%d/11 criteria passed in %.1f min\n", 11 - failures,
                seconds_since(t0) / 60.0);
    return failures == 0 ? 0 : 1;
}
