// fmchan: synthetic clustered MIMO channel datasets, flow-matching velocity
// field training, PnP-PGD channel estimation, and benchmark sweeps.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fmchan/bench.hpp"
#include "fmchan/channel.hpp"
#include "fmchan/estimator.hpp"
#include "fmchan/linalg.hpp"
#include "fmchan/manifest.hpp"
#include "fmchan/threading.hpp"
#include "fmchan/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int default_threads() {
    if (const char* env = std::getenv("FMCHAN_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

void ensure_writable(const std::string& path, bool force) {
    if (!force && fs::exists(path))
        throw fmchan::IoError("refusing to overwrite existing " + path +
                              " (pass --force to allow)");
}

// Flags win over the config file, the config file wins over defaults.
json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw fmchan::IoError("cannot open config file: " + path);
    json j;
    in >> j;
    if (!j.is_object()) throw UsageError("config file must hold a JSON object: " + path);
    return j;
}

template <class T>
void merge_key(const CLI::App* cmd, const json& cfg, const std::string& flag, T& value) {
    if (cmd->count("--" + flag) > 0) return;
    if (cfg.contains(flag)) value = cfg.at(flag).get<T>();
}

// ---------------------------------------------------------------- gen-dataset

struct GenOpts {
    std::string out;
    int num = 1000;
    int nt = 16;
    int nr = 4;
    std::string profile = "nlos-c-like";
    std::uint64_t seed = 1;
    double spacing = 0.5;
    int clusters = -1;
    int rays = -1;
    double spread_deg = -1.0;
    double decay_db = -1.0;
    double rician_k_db = std::nan("");
    std::string config;
    bool force = false;
    int threads = default_threads();
};

int cmd_gen_dataset(const CLI::App* cmd, GenOpts o) {
    const json cfg = load_config_file(o.config);
    merge_key(cmd, cfg, "out", o.out);
    merge_key(cmd, cfg, "num", o.num);
    merge_key(cmd, cfg, "nt", o.nt);
    merge_key(cmd, cfg, "nr", o.nr);
    merge_key(cmd, cfg, "profile", o.profile);
    merge_key(cmd, cfg, "seed", o.seed);
    merge_key(cmd, cfg, "spacing", o.spacing);
    merge_key(cmd, cfg, "threads", o.threads);
    if (o.out.empty()) throw UsageError("gen-dataset: --out is required");
    ensure_writable(o.out, o.force);

    fmchan::RunManifest manifest;
    manifest.command = "gen-dataset";
    manifest.seed = o.seed;
    manifest.started_utc = fmchan::utc_now_iso8601();

    fmchan::ArrayGeometry geom;
    geom.n_t = o.nt;
    geom.n_r = o.nr;
    geom.spacing_wavelengths = o.spacing;
    fmchan::ClusterProfile prof = fmchan::ClusterProfile::named(o.profile, o.seed);
    if (o.clusters > 0) prof.num_clusters = o.clusters;
    if (o.rays > 0) prof.rays_per_cluster = o.rays;
    if (o.spread_deg >= 0.0) prof.angular_spread_deg = o.spread_deg;
    if (o.decay_db >= 0.0) prof.cluster_power_decay_db = o.decay_db;
    if (!std::isnan(o.rician_k_db)) prof.rician_k_db = o.rician_k_db;

    const fmchan::Rng rng(o.seed, fmchan::Stream::Dataset);
    const fmchan::ChannelDataset ds =
        fmchan::build_dataset(geom, prof, o.num, rng, o.threads);
    fmchan::save_dataset(ds, o.out);

    json resolved = {{"out", o.out},       {"num", o.num},
                     {"nt", o.nt},         {"nr", o.nr},
                     {"profile", o.profile}, {"seed", o.seed},
                     {"spacing", o.spacing}, {"threads", o.threads},
                     {"profile_resolved", json::parse(prof.to_json())}};
    manifest.resolved_config_json = resolved.dump();
    manifest.outputs = {o.out};
    manifest.finished_utc = fmchan::utc_now_iso8601();
    manifest.write(o.out + ".manifest.json");

    std::cout << "wrote " << o.num << " samples (" << o.nr << "x" << o.nt << ", " << prof.name
              << ") to " << o.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------- train

struct TrainOpts {
    std::string dataset;
    std::string arch = "lite";
    int epochs = 400;
    int steps = 311;
    int batch = 32;
    double lr = 1e-4;
    std::uint64_t seed = 1;
    std::string out;
    std::string log;
    int ckpt_every = 10;
    std::string config;
    bool force = false;
    int threads = default_threads();
};

int cmd_train(const CLI::App* cmd, TrainOpts o) {
    const json cfg = load_config_file(o.config);
    merge_key(cmd, cfg, "dataset", o.dataset);
    merge_key(cmd, cfg, "arch", o.arch);
    merge_key(cmd, cfg, "epochs", o.epochs);
    merge_key(cmd, cfg, "steps", o.steps);
    merge_key(cmd, cfg, "batch", o.batch);
    merge_key(cmd, cfg, "lr", o.lr);
    merge_key(cmd, cfg, "seed", o.seed);
    merge_key(cmd, cfg, "out", o.out);
    merge_key(cmd, cfg, "ckpt-every", o.ckpt_every);
    merge_key(cmd, cfg, "threads", o.threads);
    if (o.dataset.empty() || o.out.empty())
        throw UsageError("train: --dataset and --out are required");
    if (o.log.empty()) o.log = o.out + ".log.csv";
    ensure_writable(o.out, o.force);
    ensure_writable(o.log, o.force);

    fmchan::RunManifest manifest;
    manifest.command = "train";
    manifest.seed = o.seed;
    manifest.started_utc = fmchan::utc_now_iso8601();
    manifest.inputs = {fmchan::digest_file(o.dataset)};

    const fmchan::ChannelDataset ds = fmchan::load_dataset(o.dataset);
    fmchan::TrainConfig tc;
    tc.epochs = o.epochs;
    tc.steps_per_epoch = o.steps;
    tc.batch_size = o.batch;
    tc.learning_rate = o.lr;
    tc.seed = o.seed;
    tc.checkpoint_every_epochs = o.ckpt_every;
    tc.checkpoint_path = o.out;
    tc.arch = o.arch;
    tc.threads = o.threads;

    // Fail on arch/dataset incompatibilities before burning any training time.
    const fmchan::VelocityNetArch arch =
        fmchan::VelocityNetArch::named(o.arch, ds.geometry.n_r, ds.geometry.n_t);
    arch.validate();

    const fmchan::TrainResult result = fmchan::train(ds, tc, arch);
    result.log.save_csv(o.log);

    const fmchan::VelocityNet& net = result.net;
    std::cout << "trained " << o.arch << " arch (" << net.param_count() << " parameters), "
              << o.epochs << " epochs x " << o.steps << " steps, final epoch mean loss "
              << result.log.epoch_mean_loss.back() << "\n"
              << "checkpoint: " << o.out << "\n";

    json resolved = {{"dataset", o.dataset}, {"arch", o.arch},   {"epochs", o.epochs},
                     {"steps", o.steps},     {"batch", o.batch}, {"lr", o.lr},
                     {"seed", o.seed},       {"out", o.out},     {"log", o.log},
                     {"ckpt-every", o.ckpt_every}, {"threads", o.threads},
                     {"param_count", net.param_count()}};
    manifest.resolved_config_json = resolved.dump();
    manifest.outputs = {o.out, o.log};
    manifest.finished_utc = fmchan::utc_now_iso8601();
    manifest.write(o.out + ".manifest.json");
    return 0;
}

// ------------------------------------------------------------------- estimate

struct EstimateOpts {
    std::string model;
    std::string dataset;
    double snr_db = 10.0;
    double alpha = 1.0;
    int steps = 100;
    double gamma_c = 0.25;
    int m_samples = 1;
    bool paper_literal_noise = false;
    std::uint64_t seed = 1;
    std::string out;
    std::string config;
    bool force = false;
    int threads = default_threads();
};

int cmd_estimate(const CLI::App* cmd, EstimateOpts o) {
    const json cfg = load_config_file(o.config);
    merge_key(cmd, cfg, "model", o.model);
    merge_key(cmd, cfg, "dataset", o.dataset);
    merge_key(cmd, cfg, "snr-db", o.snr_db);
    merge_key(cmd, cfg, "alpha", o.alpha);
    merge_key(cmd, cfg, "steps", o.steps);
    merge_key(cmd, cfg, "gamma-c", o.gamma_c);
    merge_key(cmd, cfg, "m-samples", o.m_samples);
    merge_key(cmd, cfg, "seed", o.seed);
    merge_key(cmd, cfg, "out", o.out);
    merge_key(cmd, cfg, "threads", o.threads);
    if (o.model.empty() || o.dataset.empty() || o.out.empty())
        throw UsageError("estimate: --model, --dataset and --out are required");
    const std::string nmse_csv = o.out + ".nmse.csv";
    ensure_writable(o.out, o.force);
    ensure_writable(nmse_csv, o.force);

    fmchan::RunManifest manifest;
    manifest.command = "estimate";
    manifest.seed = o.seed;
    manifest.started_utc = fmchan::utc_now_iso8601();
    manifest.inputs = {fmchan::digest_file(o.model), fmchan::digest_file(o.dataset)};

    const fmchan::VelocityNet net = fmchan::load_checkpoint(o.model);
    const fmchan::ChannelDataset ds = fmchan::load_dataset(o.dataset);
    if (net.arch().rows != ds.geometry.n_r || net.arch().cols != ds.geometry.n_t)
        throw fmchan::StructuralError(
            "estimate: checkpoint expects " + std::to_string(net.arch().rows) + "x" +
            std::to_string(net.arch().cols) + " but dataset is " +
            std::to_string(ds.geometry.n_r) + "x" + std::to_string(ds.geometry.n_t));

    const int n_p = std::max(1, static_cast<int>(std::lround(o.alpha * ds.geometry.n_t)));
    fmchan::EstimatorConfig ec;
    ec.iterations = o.steps;
    ec.gamma_c = o.gamma_c;
    ec.m_samples = o.m_samples;
    ec.paper_literal_noise = o.paper_literal_noise;

    const std::size_t n = ds.samples.size();
    std::vector<fmchan::ComplexMatrix> estimates(n);
    std::vector<double> nmse(n);
    fmchan::parallel_for(n, o.threads, [&](std::size_t i) {
        fmchan::Rng pilot_rng = fmchan::Rng(o.seed, fmchan::Stream::Pilots).fork(i);
        fmchan::Rng noise_rng = fmchan::Rng(o.seed, fmchan::Stream::Noise).fork(i);
        const fmchan::ComplexMatrix pilots =
            fmchan::draw_qpsk_pilots(pilot_rng, ds.geometry.n_t, n_p);
        const fmchan::PilotObservation obs =
            fmchan::simulate_observation(ds.samples[i], pilots, o.snr_db, noise_rng);
        const fmchan::Rng base = fmchan::Rng(o.seed, fmchan::kEstimatorBaseStream).fork(i);
        estimates[i] = o.m_samples > 1 ? fmchan::estimate_mmse(net, obs, ec, base)
                                       : fmchan::estimate(net, obs, ec, base);
        nmse[i] = fmchan::nmse_db(estimates[i], ds.samples[i]);
    });

    fmchan::ChannelDataset out_ds;
    out_ds.geometry = ds.geometry;
    out_ds.profile = ds.profile;
    out_ds.profile.name += "-estimates";
    out_ds.normalization_power = ds.normalization_power;
    out_ds.samples = std::move(estimates);
    fmchan::save_dataset(out_ds, o.out);

    {
        std::ofstream csv(nmse_csv, std::ios::trunc);
        if (!csv) throw fmchan::IoError("cannot write " + nmse_csv);
        csv << "sample,nmse_db\n";
        double mean = 0.0;
        int finite = 0;
        for (std::size_t i = 0; i < n; ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i, nmse[i]);
            csv << buf;
            if (std::isfinite(nmse[i])) {
                mean += nmse[i];
                ++finite;
            }
        }
        if (finite > 0)
            std::cout << "mean NMSE over " << finite << " samples: " << mean / finite
                      << " dB\n";
    }

    json resolved = {{"model", o.model},   {"dataset", o.dataset}, {"snr-db", o.snr_db},
                     {"alpha", o.alpha},   {"steps", o.steps},     {"gamma-c", o.gamma_c},
                     {"m-samples", o.m_samples}, {"seed", o.seed}, {"out", o.out},
                     {"threads", o.threads},     {"n_p", n_p}};
    manifest.resolved_config_json = resolved.dump();
    manifest.outputs = {o.out, nmse_csv};
    manifest.finished_utc = fmchan::utc_now_iso8601();
    manifest.write(o.out + ".manifest.json");
    return 0;
}

// ---------------------------------------------------------------------- bench

struct BenchOpts {
    std::string spec;
    std::string out_dir;
    bool force = false;
    int threads = 0; // 0: take the spec's value
};

int cmd_bench(const CLI::App*, BenchOpts o) {
    if (o.spec.empty() || o.out_dir.empty())
        throw UsageError("bench: --spec and --out-dir are required");
    std::ifstream in(o.spec);
    if (!in) throw fmchan::IoError("cannot open sweep spec: " + o.spec);
    std::stringstream buf;
    buf << in.rdbuf();
    fmchan::bench::SweepSpec spec = fmchan::bench::SweepSpec::from_json(buf.str());
    if (o.threads > 0) spec.threads = o.threads;
    if (spec.methods.empty()) throw UsageError("bench: spec has an empty method list");
    spec.validate();

    fs::create_directories(o.out_dir);
    const std::string report_csv = o.out_dir + "/report.csv";
    ensure_writable(report_csv, o.force);

    fmchan::RunManifest manifest;
    manifest.command = "bench";
    manifest.seed = spec.seed;
    manifest.started_utc = fmchan::utc_now_iso8601();
    manifest.inputs.push_back(fmchan::digest_file(o.spec));
    for (const auto& [label, path] : spec.test_datasets)
        manifest.inputs.push_back(fmchan::digest_file(path));
    for (const auto& [name, path] : spec.checkpoints)
        manifest.inputs.push_back(fmchan::digest_file(path));
    if (!spec.train_dataset.empty())
        manifest.inputs.push_back(fmchan::digest_file(spec.train_dataset));

    const fmchan::bench::BenchReport report = fmchan::bench::run_sweep(spec);
    fmchan::bench::emit_csv(report, report_csv);
    manifest.outputs.push_back(report_csv);
    const std::string per_sample_csv = o.out_dir + "/report.per_sample.csv";
    fmchan::bench::emit_per_sample_csv(report, per_sample_csv);
    manifest.outputs.push_back(per_sample_csv);

    // One chart per swept axis and profile.
    for (const auto& [label, path] : spec.test_datasets) {
        if (spec.snr_db.size() > 1) {
            for (double a : spec.alpha) {
                fmchan::bench::PlotSpec ps;
                ps.axis = fmchan::bench::SweepAxis::Snr;
                ps.profile = label;
                ps.fixed_value = a;
                std::ostringstream title;
                title << "NMSE vs SNR (" << label << ", alpha=" << a << ")";
                ps.title = title.str();
                std::ostringstream name;
                name << o.out_dir << "/nmse_vs_snr_" << label << "_alpha" << a << ".svg";
                fmchan::bench::emit_svg(report, name.str(), ps);
                manifest.outputs.push_back(name.str());
            }
        }
        if (spec.alpha.size() > 1) {
            for (double s : spec.snr_db) {
                fmchan::bench::PlotSpec ps;
                ps.axis = fmchan::bench::SweepAxis::Alpha;
                ps.profile = label;
                ps.fixed_value = s;
                std::ostringstream title;
                title << "NMSE vs pilot density (" << label << ", SNR=" << s << " dB)";
                ps.title = title.str();
                std::ostringstream name;
                name << o.out_dir << "/nmse_vs_alpha_" << label << "_snr" << s << ".svg";
                fmchan::bench::emit_svg(report, name.str(), ps);
                manifest.outputs.push_back(name.str());
            }
        }
    }

    // Runtime table over the first test set at the first grid point.
    const std::string runtime_csv = o.out_dir + "/runtime.csv";
    {
        fmchan::bench::SweepInputs inputs;
        for (const auto& [label, path] : spec.test_datasets)
            inputs.test_datasets.emplace(label, fmchan::load_dataset(path));
        const auto& [label, ds] = *inputs.test_datasets.begin();
        const int n_t = ds.geometry.n_t;
        const int n_p =
            std::max(1, static_cast<int>(std::lround(spec.alpha.front() * n_t)));
        const double snr = spec.snr_db.front();

        std::map<std::string, fmchan::VelocityNet> nets;
        for (const auto& [name, path] : spec.checkpoints)
            nets.emplace(name, fmchan::load_checkpoint(path));
        std::optional<fmchan::ComplexMatrix> cov;
        if (!spec.train_dataset.empty() &&
            std::find(spec.methods.begin(), spec.methods.end(), "lmmse") != spec.methods.end())
            cov = fmchan::channel_covariance(fmchan::load_dataset(spec.train_dataset));

        std::ofstream rt(runtime_csv, std::ios::trunc);
        rt << "method,mean_ms,p50_ms,p95_ms,peak_mem_bytes,workload\n";
        for (const std::string& m : spec.methods) {
            std::function<void(int)> once;
            fmchan::EstimatorConfig ec;
            ec.iterations = spec.estimator_steps;
            ec.gamma_c = spec.gamma_c;
            ec.m_samples = m == "mmse4" ? spec.mmse_samples : 1;
            const std::string ckpt =
                (m == "mmse4" && !nets.count("mmse4")) ? "proposed" : m;
            auto prep = [&](std::size_t i) {
                const std::size_t s = i % ds.samples.size();
                fmchan::Rng prng = fmchan::Rng(spec.seed, fmchan::Stream::Pilots).fork(s);
                fmchan::Rng nrng = fmchan::Rng(spec.seed, fmchan::Stream::Noise).fork(s);
                return fmchan::simulate_observation(
                    ds.samples[s], fmchan::draw_qpsk_pilots(prng, n_t, n_p), snr, nrng);
            };
            if (m == "ls") {
                once = [&](int i) { fmchan::estimate_ls(prep(i)); };
            } else if (m == "lmmse") {
                if (!cov) continue;
                once = [&](int i) { fmchan::estimate_lmmse(prep(i), *cov); };
            } else if (nets.count(ckpt)) {
                const fmchan::VelocityNet* net = &nets.at(ckpt);
                once = [&, net, ec](int i) {
                    const fmchan::Rng base = fmchan::Rng(spec.seed, fmchan::kEstimatorBaseStream).fork(i);
                    if (ec.m_samples > 1)
                        fmchan::estimate_mmse(*net, prep(i), ec, base);
                    else
                        fmchan::estimate(*net, prep(i), ec, base);
                };
            } else {
                continue; // external method: no runtime row
            }
            const fmchan::bench::RuntimeStats st = fmchan::bench::measure_runtime(
                once, spec.runtime_workload, spec.runtime_warmup);
            rt << m << ',' << st.mean_ms << ',' << st.p50_ms << ',' << st.p95_ms << ','
               << st.peak_mem_bytes << ',' << st.workload << '\n';
        }
    }
    manifest.outputs.push_back(runtime_csv);

    manifest.resolved_config_json = spec.to_json();
    manifest.finished_utc = fmchan::utc_now_iso8601();
    manifest.write(o.out_dir + "/manifest.json");
    std::cout << "bench outputs written to " << o.out_dir << "\n";
    return 0;
}

// -------------------------------------------------------------------- inspect

int cmd_inspect(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fmchan::IoError("cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4) throw fmchan::FormatError(path + ": too short", 0);

    if (std::string(magic, 4) == "FMCH") {
        std::uint32_t version, num, nr, nt, blob_len;
        double norm;
        in.read(reinterpret_cast<char*>(&version), 4);
        in.read(reinterpret_cast<char*>(&num), 4);
        in.read(reinterpret_cast<char*>(&nr), 4);
        in.read(reinterpret_cast<char*>(&nt), 4);
        in.read(reinterpret_cast<char*>(&norm), 8);
        in.read(reinterpret_cast<char*>(&blob_len), 4);
        if (!in) throw fmchan::FormatError(path + ": truncated header", 4);
        std::string blob(blob_len, '\0');
        in.read(blob.data(), blob_len);
        std::cout << "dataset " << path << "\n  version: " << version
                  << "\n  samples: " << num << "\n  shape: " << nr << "x" << nt
                  << "\n  normalization_power: " << norm << "\n  profile: " << blob << "\n";
        return 0;
    }
    if (std::string(magic, 4) == "FMCK") {
        std::uint32_t version, arch_len;
        in.read(reinterpret_cast<char*>(&version), 4);
        in.read(reinterpret_cast<char*>(&arch_len), 4);
        if (!in) throw fmchan::FormatError(path + ": truncated header", 4);
        std::string arch(arch_len, '\0');
        in.read(arch.data(), arch_len);
        std::uint64_t params = 0;
        in.read(reinterpret_cast<char*>(&params), 8);
        std::cout << "checkpoint " << path << "\n  version: " << version
                  << "\n  arch: " << arch << "\n  param_count: " << params << "\n";
        return 0;
    }
    throw fmchan::FormatError(path + ": unknown magic", 0);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flow-matching MIMO channel estimation toolkit"};
    app.require_subcommand(1);

    GenOpts gen;
    CLI::App* cgen = app.add_subcommand("gen-dataset", "generate a clustered channel dataset");
    cgen->add_option("--out", gen.out, "output dataset path (FMCH)");
    cgen->add_option("--num", gen.num, "number of realizations");
    cgen->add_option("--nt", gen.nt, "transmit antennas");
    cgen->add_option("--nr", gen.nr, "receive antennas");
    cgen->add_option("--profile", gen.profile, "nlos-c-like | los-d-like");
    cgen->add_option("--seed", gen.seed, "seed (also fixes the profile environment)");
    cgen->add_option("--spacing", gen.spacing, "element spacing in wavelengths");
    cgen->add_option("--clusters", gen.clusters, "override cluster count");
    cgen->add_option("--rays", gen.rays, "override rays per cluster");
    cgen->add_option("--spread-deg", gen.spread_deg, "override angular spread");
    cgen->add_option("--decay-db", gen.decay_db, "override cluster power decay");
    cgen->add_option("--rician-k-db", gen.rician_k_db, "override Rician K factor");
    cgen->add_option("--config", gen.config, "JSON config (same keys as flags)");
    cgen->add_option("--threads", gen.threads, "worker threads");
    cgen->add_flag("--force", gen.force, "overwrite existing outputs");

    TrainOpts tr;
    CLI::App* ctr = app.add_subcommand("train", "train the velocity field");
    ctr->add_option("--dataset", tr.dataset, "training dataset (FMCH)");
    ctr->add_option("--arch", tr.arch, "lite | full");
    ctr->add_option("--epochs", tr.epochs, "epochs");
    ctr->add_option("--steps", tr.steps, "steps per epoch");
    ctr->add_option("--batch", tr.batch, "batch size");
    ctr->add_option("--lr", tr.lr, "learning rate");
    ctr->add_option("--seed", tr.seed, "seed");
    ctr->add_option("--out", tr.out, "checkpoint output path (FMCK)");
    ctr->add_option("--log", tr.log, "train log csv (default <out>.log.csv)");
    ctr->add_option("--ckpt-every", tr.ckpt_every, "checkpoint cadence in epochs");
    ctr->add_option("--config", tr.config, "JSON config (same keys as flags)");
    ctr->add_option("--threads", tr.threads, "worker threads");
    ctr->add_flag("--force", tr.force, "overwrite existing outputs");

    EstimateOpts est;
    CLI::App* cest = app.add_subcommand("estimate", "estimate channels from pilots");
    cest->add_option("--model", est.model, "checkpoint (FMCK)");
    cest->add_option("--dataset", est.dataset, "test dataset (FMCH)");
    cest->add_option("--snr-db", est.snr_db, "SNR in dB");
    cest->add_option("--alpha", est.alpha, "pilot density N_p/N_t");
    cest->add_option("--steps", est.steps, "PnP-PGD iterations K");
    cest->add_option("--gamma-c", est.gamma_c, "step size factor c in gamma = c*sigma^2/N_p");
    cest->add_option("--m-samples", est.m_samples, "posterior samples to average");
    cest->add_flag("--paper-literal-noise", est.paper_literal_noise,
                   "re-noise with CN(0,1) instead of the training-matched CN(0,2)");
    cest->add_option("--seed", est.seed, "seed");
    cest->add_option("--out", est.out, "estimates output path (FMCH)");
    cest->add_option("--config", est.config, "JSON config (same keys as flags)");
    cest->add_option("--threads", est.threads, "worker threads");
    cest->add_flag("--force", est.force, "overwrite existing outputs");

    BenchOpts be;
    CLI::App* cbe = app.add_subcommand("bench", "run a benchmark sweep");
    cbe->add_option("--spec", be.spec, "sweep spec JSON");
    cbe->add_option("--out-dir", be.out_dir, "output directory");
    cbe->add_option("--threads", be.threads, "worker threads (overrides spec)");
    cbe->add_flag("--force", be.force, "overwrite existing outputs");

    std::string inspect_path;
    CLI::App* cin = app.add_subcommand("inspect", "print dataset/checkpoint headers");
    cin->add_option("path", inspect_path, "file to inspect")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (cgen->parsed()) return cmd_gen_dataset(cgen, gen);
        if (ctr->parsed()) return cmd_train(ctr, tr);
        if (cest->parsed()) return cmd_estimate(cest, est);
        if (cbe->parsed()) return cmd_bench(cbe, be);
        if (cin->parsed()) return cmd_inspect(inspect_path);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
