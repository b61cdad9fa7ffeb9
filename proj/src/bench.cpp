#include "fmchan/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fmchan/linalg.hpp"
#include "fmchan/mem.hpp"
#include "fmchan/threading.hpp"

namespace fmchan::bench {

namespace {

bool is_runnable(const std::string& m) {
    return std::find(kRunnableMethods.begin(), kRunnableMethods.end(), m) !=
           kRunnableMethods.end();
}
bool is_external(const std::string& m) {
    return std::find(kExternalMethods.begin(), kExternalMethods.end(), m) !=
           kExternalMethods.end();
}

std::string fmt_g(double v, int digits = 9) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

} // namespace

void SweepSpec::validate() const {
    if (methods.empty()) throw DomainError("sweep spec: method list is empty");
    for (const std::string& m : methods)
        if (!is_runnable(m) && !is_external(m))
            throw DomainError("sweep spec: unknown method '" + m + "'");
    if (snr_db.empty()) throw DomainError("sweep spec: snr grid is empty");
    if (alpha.empty()) throw DomainError("sweep spec: alpha grid is empty");
    for (double a : alpha)
        if (!(a > 0.0 && a <= 1.0)) throw DomainError("sweep spec: alpha must be in (0,1]");
    if (test_datasets.empty()) throw DomainError("sweep spec: no test datasets");
    if (repetitions < 1) throw DomainError("sweep spec: repetitions must be >= 1");
    if (estimator_steps < 1) throw DomainError("sweep spec: estimator_steps must be >= 1");
    if (mmse_samples < 1) throw DomainError("sweep spec: mmse_samples must be >= 1");
}

std::string SweepSpec::to_json() const {
    nlohmann::json j;
    j["methods"] = methods;
    j["snr_db"] = snr_db;
    j["alpha"] = alpha;
    j["test_datasets"] = test_datasets;
    j["checkpoints"] = checkpoints;
    j["train_dataset"] = train_dataset;
    j["seed"] = seed;
    j["repetitions"] = repetitions;
    j["shared_pilot"] = shared_pilot;
    j["estimator_steps"] = estimator_steps;
    j["gamma_c"] = gamma_c;
    j["mmse_samples"] = mmse_samples;
    j["paper_literal_noise"] = paper_literal_noise;
    j["threads"] = threads;
    j["runtime_workload"] = runtime_workload;
    j["runtime_warmup"] = runtime_warmup;
    j["external_rows"] = external_rows;
    return j.dump(2);
}

SweepSpec SweepSpec::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SweepSpec s;
    s.methods = j.at("methods").get<std::vector<std::string>>();
    s.snr_db = j.at("snr_db").get<std::vector<double>>();
    s.alpha = j.value("alpha", std::vector<double>{1.0});
    if (j.contains("test_datasets"))
        s.test_datasets = j.at("test_datasets").get<std::map<std::string, std::string>>();
    if (j.contains("checkpoints"))
        s.checkpoints = j.at("checkpoints").get<std::map<std::string, std::string>>();
    s.train_dataset = j.value("train_dataset", std::string());
    s.seed = j.value("seed", std::uint64_t{1});
    s.repetitions = j.value("repetitions", 1);
    s.shared_pilot = j.value("shared_pilot", false);
    s.estimator_steps = j.value("estimator_steps", 100);
    s.gamma_c = j.value("gamma_c", 0.25);
    s.mmse_samples = j.value("mmse_samples", 4);
    s.paper_literal_noise = j.value("paper_literal_noise", false);
    s.threads = j.value("threads", 1);
    s.runtime_workload = j.value("runtime_workload", 100);
    s.runtime_warmup = j.value("runtime_warmup", 3);
    s.external_rows = j.value("external_rows", std::string());
    return s;
}

NmseAggregate aggregate_nmse_db(const std::vector<double>& values) {
    NmseAggregate agg;
    double sum = 0.0;
    for (double v : values) {
        if (std::isinf(v) && v < 0.0) {
            agg.exact_recoveries += 1;
            continue;
        }
        sum += v;
        agg.finite_n += 1;
    }
    if (agg.finite_n == 0) {
        agg.mean_db = -std::numeric_limits<double>::infinity();
        agg.std_db = 0.0;
        return agg;
    }
    agg.mean_db = sum / agg.finite_n;
    double var = 0.0;
    for (double v : values) {
        if (std::isinf(v) && v < 0.0) continue;
        var += (v - agg.mean_db) * (v - agg.mean_db);
    }
    agg.std_db = std::sqrt(var / agg.finite_n);
    return agg;
}

namespace {

struct MethodRunner {
    std::string name;
    // Returns the estimate for the given observation; rng is the per-sample base.
    std::function<ComplexMatrix(const PilotObservation&, const Rng&)> run;
};

std::vector<MethodRunner> make_runners(const SweepSpec& spec, const SweepInputs& inputs) {
    std::vector<MethodRunner> runners;
    for (const std::string& m : spec.methods) {
        if (is_external(m)) continue; // rows come from the merge file, if any
        MethodRunner r;
        r.name = m;
        if (m == "ls") {
            r.run = [](const PilotObservation& obs, const Rng&) { return estimate_ls(obs); };
        } else if (m == "lmmse") {
            if (!inputs.lmmse_covariance)
                throw DomainError("sweep: method lmmse needs a train_dataset for its covariance");
            const ComplexMatrix* cov = &*inputs.lmmse_covariance;
            r.run = [cov](const PilotObservation& obs, const Rng&) {
                return estimate_lmmse(obs, *cov);
            };
        } else if (m == "proposed" || m == "proposed-lite" || m == "mmse4") {
            const std::string ckpt_key =
                (m == "mmse4" && !inputs.checkpoints.count("mmse4")) ? "proposed" : m;
            auto it = inputs.checkpoints.find(ckpt_key);
            if (it == inputs.checkpoints.end())
                throw DomainError("sweep: method '" + m + "' needs checkpoint '" + ckpt_key +
                                  "'");
            const VelocityNet* net = &it->second;
            EstimatorConfig cfg;
            cfg.iterations = spec.estimator_steps;
            cfg.gamma_c = spec.gamma_c;
            cfg.m_samples = (m == "mmse4") ? spec.mmse_samples : 1;
            cfg.paper_literal_noise = spec.paper_literal_noise;
            r.run = [net, cfg](const PilotObservation& obs, const Rng& rng) {
                return cfg.m_samples > 1 ? estimate_mmse(*net, obs, cfg, rng)
                                         : estimate(*net, obs, cfg, rng);
            };
        }
        runners.push_back(std::move(r));
    }
    return runners;
}

std::vector<BenchRow> load_external_rows(const std::string& path);

} // namespace

BenchReport run_sweep(const SweepSpec& spec, const SweepInputs& inputs) {
    spec.validate();
    BenchReport report;
    const std::vector<MethodRunner> runners = make_runners(spec, inputs);

    int profile_idx = 0;
    for (const auto& [label, dataset] : inputs.test_datasets) {
        const int n_t = dataset.geometry.n_t;
        const int n_r = dataset.geometry.n_r;
        const int n_samples = static_cast<int>(dataset.samples.size());
        const int passes = n_samples * spec.repetitions;

        for (std::size_t ai = 0; ai < spec.alpha.size(); ++ai) {
            const int n_p = std::max(1, static_cast<int>(std::lround(spec.alpha[ai] * n_t)));
            for (std::size_t si = 0; si < spec.snr_db.size(); ++si) {
                const double snr = spec.snr_db[si];
                const double sigma2 = n_t / std::pow(10.0, snr / 10.0);
                const double sigma = std::sqrt(sigma2);

                // Pilots and the unit-variance noise template are keyed by
                // (profile, alpha, pass) only, so SNR points of one curve see
                // the same realizations scaled by sigma.
                std::vector<PilotObservation> observations(passes);
                parallel_for(passes, spec.threads, [&](std::size_t pass) {
                    const int sample = static_cast<int>(pass) % n_samples;
                    Rng pilot_rng = spec.shared_pilot
                                        ? Rng(spec.seed, Stream::Pilots).fork(profile_idx).fork(ai)
                                        : Rng(spec.seed, Stream::Pilots)
                                              .fork(profile_idx)
                                              .fork(ai)
                                              .fork(pass);
                    Rng noise_rng =
                        Rng(spec.seed, Stream::Noise).fork(profile_idx).fork(ai).fork(pass);
                    PilotObservation obs;
                    obs.p = draw_qpsk_pilots(pilot_rng, n_t, n_p);
                    obs.y = linalg::matmul(dataset.samples[sample], obs.p);
                    ComplexMatrix noise =
                        draw_complex_gaussian_matrix(noise_rng, n_r, n_p, 1.0);
                    noise *= cplx(sigma, 0.0);
                    obs.y += noise;
                    obs.sigma2 = sigma2;
                    obs.snr_db = snr;
                    obs.alpha = static_cast<double>(n_p) / n_t;
                    observations[pass] = std::move(obs);
                });

                for (const MethodRunner& method : runners) {
                    BenchRow row;
                    row.method = method.name;
                    row.profile = label;
                    row.snr_db = snr;
                    row.alpha = spec.alpha[ai];
                    std::vector<double> nmse(passes, 0.0);
                    std::size_t peak_delta = 0;
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        const std::size_t live0 = mem::live();
                        mem::reset_peak();
                        parallel_for(passes, spec.threads, [&](std::size_t pass) {
                            const int sample = static_cast<int>(pass) % n_samples;
                            const Rng base = Rng(spec.seed, kEstimatorBaseStream)
                                                 .fork(profile_idx)
                                                 .fork(ai)
                                                 .fork(si)
                                                 .fork(pass);
                            const ComplexMatrix est =
                                method.run(observations[pass], base);
                            nmse[pass] = nmse_db(est, dataset.samples[sample]);
                        });
                        peak_delta = mem::peak() > live0 ? mem::peak() - live0 : 0;
                    } catch (const std::exception& e) {
                        row.error = e.what();
                        row.n_samples = 0;
                        report.rows.push_back(std::move(row));
                        continue;
                    }
                    const auto t1 = std::chrono::steady_clock::now();

                    const NmseAggregate agg = aggregate_nmse_db(nmse);
                    row.mean_nmse_db = agg.mean_db;
                    row.std_nmse_db = agg.std_db;
                    row.exact_recoveries = agg.exact_recoveries;
                    row.n_samples = passes;
                    row.mean_runtime_ms =
                        std::chrono::duration<double, std::milli>(t1 - t0).count() / passes;
                    row.peak_mem_bytes = peak_delta;
                    report.rows.push_back(std::move(row));

                    for (int pass = 0; pass < passes; ++pass)
                        report.per_sample.push_back({method.name, label, snr, spec.alpha[ai],
                                                     pass, nmse[pass]});
                }
            }
        }
        ++profile_idx;
    }

    if (!spec.external_rows.empty()) {
        std::vector<BenchRow> ext = load_external_rows(spec.external_rows);
        for (BenchRow& row : ext) report.rows.push_back(std::move(row));
    }
    return report;
}

BenchReport run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepInputs inputs;
    for (const auto& [label, path] : spec.test_datasets)
        inputs.test_datasets.emplace(label, load_dataset(path));
    for (const std::string& m : spec.methods) {
        if (m == "proposed" || m == "proposed-lite" || m == "mmse4") {
            const std::string key =
                (m == "mmse4" && !spec.checkpoints.count("mmse4")) ? "proposed" : m;
            if (inputs.checkpoints.count(key)) continue;
            auto it = spec.checkpoints.find(key);
            if (it == spec.checkpoints.end())
                throw DomainError("sweep: no checkpoint path configured for '" + key + "'");
            inputs.checkpoints.emplace(key, load_checkpoint(it->second));
        }
    }
    if (std::find(spec.methods.begin(), spec.methods.end(), "lmmse") != spec.methods.end()) {
        if (spec.train_dataset.empty())
            throw DomainError("sweep: method lmmse needs train_dataset in the spec");
        inputs.lmmse_covariance = channel_covariance(load_dataset(spec.train_dataset));
    }
    return run_sweep(spec, inputs);
}

RuntimeStats measure_runtime(const std::function<void(int)>& run_once, int workload,
                             int warmup) {
    if (workload < 1) throw DomainError("measure_runtime: workload must be >= 1");
    RuntimeStats stats;
    stats.workload = workload;
    for (int w = 0; w < warmup; ++w) run_once(w % workload);

    const std::size_t live0 = mem::live();
    mem::reset_peak();
    std::vector<double> ms(workload);
    for (int i = 0; i < workload; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        run_once(i);
        const auto t1 = std::chrono::steady_clock::now();
        ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    stats.peak_mem_bytes = mem::peak() > live0 ? mem::peak() - live0 : 0;

    double sum = 0.0;
    for (double v : ms) sum += v;
    stats.mean_ms = sum / workload;
    std::vector<double> sorted = ms;
    std::sort(sorted.begin(), sorted.end());
    auto pct = [&sorted](double q) {
        const std::size_t idx = static_cast<std::size_t>(
            std::min<double>(sorted.size() - 1.0, std::ceil(q * sorted.size()) - 1.0));
        return sorted[std::max<std::size_t>(idx, 0)];
    };
    stats.p50_ms = pct(0.50);
    stats.p95_ms = pct(0.95);
    return stats;
}

namespace {

std::string row_to_csv(const BenchRow& r, bool with_recoveries) {
    std::ostringstream os;
    os << r.method << ',' << r.profile << ',' << fmt_g(r.snr_db) << ',' << fmt_g(r.alpha) << ',';
    if (!r.error.empty()) {
        os << "nan,nan,nan,0," << r.n_samples;
    } else {
        os << fmt_g(r.mean_nmse_db) << ',' << fmt_g(r.std_nmse_db) << ','
           << fmt_g(r.mean_runtime_ms) << ',' << r.peak_mem_bytes << ',' << r.n_samples;
    }
    if (with_recoveries) os << ',' << r.exact_recoveries;
    return os.str();
}

std::vector<BenchRow> load_external_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open external results: " + path);
    std::vector<BenchRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("method,", 0) == 0) continue; // skip header line
        }
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() < 9)
            throw FormatError(path + ": external row needs >= 9 fields, got " +
                                  std::to_string(fields.size()),
                              0);
        BenchRow r;
        r.method = fields[0];
        r.profile = fields[1];
        r.snr_db = std::stod(fields[2]);
        r.alpha = std::stod(fields[3]);
        r.mean_nmse_db = std::stod(fields[4]);
        r.std_nmse_db = std::stod(fields[5]);
        r.mean_runtime_ms = std::stod(fields[6]);
        r.peak_mem_bytes = static_cast<std::size_t>(std::stoull(fields[7]));
        r.n_samples = std::stoi(fields[8]);
        if (fields.size() > 9) r.exact_recoveries = std::stoi(fields[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace

void emit_csv(const BenchReport& report, const std::string& path) {
    if (report.rows.empty()) throw DomainError("emit_csv: empty report");
    bool with_recoveries = false;
    for (const BenchRow& r : report.rows)
        if (r.exact_recoveries > 0) with_recoveries = true;

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open report for writing: " + path);
    out << "method,profile,snr_db,alpha,mean_nmse_db,std_nmse_db,mean_runtime_ms,"
           "peak_mem_bytes,n_samples";
    if (with_recoveries) out << ",exact_recoveries";
    out << '\n';
    for (const BenchRow& r : report.rows) out << row_to_csv(r, with_recoveries) << '\n';
    if (!out) throw IoError("report write failed: " + path);
}

void emit_per_sample_csv(const BenchReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open per-sample report for writing: " + path);
    out << "method,profile,snr_db,alpha,sample,nmse_db\n";
    for (const PerSampleRow& r : report.per_sample)
        out << r.method << ',' << r.profile << ',' << fmt_g(r.snr_db) << ',' << fmt_g(r.alpha)
            << ',' << r.sample << ',' << fmt_g(r.nmse_db) << '\n';
}

namespace {

double nice_step(double span, int target_ticks) {
    const double raw = span / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (raw <= m * mag * (1.0 + 1e-12)) return m * mag;
    return 10.0 * mag;
}

} // namespace

void emit_svg(const BenchReport& report, const std::string& path, const PlotSpec& plot) {
    struct Series {
        std::string method;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<Series> series;
    for (const BenchRow& r : report.rows) {
        if (!r.error.empty()) continue;
        if (!plot.profile.empty() && r.profile != plot.profile) continue;
        const double x = plot.axis == SweepAxis::Snr ? r.snr_db : r.alpha;
        const double fixed = plot.axis == SweepAxis::Snr ? r.alpha : r.snr_db;
        if (std::abs(fixed - plot.fixed_value) > 1e-9) continue;
        if (!std::isfinite(r.mean_nmse_db)) continue;
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const Series& s) { return s.method == r.method; });
        if (it == series.end()) {
            series.push_back({r.method, {}});
            it = series.end() - 1;
        }
        it->pts.emplace_back(x, r.mean_nmse_db);
    }
    if (series.empty()) throw DomainError("emit_svg: no rows match the plot spec");
    for (Series& s : series) std::sort(s.pts.begin(), s.pts.end());

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Series& s : series)
        for (auto [x, y] : s.pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmax - xmin < 1e-9) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    const double ypad = std::max(0.5, 0.05 * (ymax - ymin));
    ymin -= ypad;
    ymax += ypad;

    const double width = 720, height = 480;
    const double ml = 70, mr = 190, mt = 40, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!plot.title.empty())
        svg << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
            << plot.title << "</text>\n";

    const double xstep = nice_step(xmax - xmin, 6);
    const double ystep = nice_step(ymax - ymin, 6);
    svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9; x += xstep) {
        svg << "<line x1=\"" << sx(x) << "\" y1=\"" << mt << "\" x2=\"" << sx(x) << "\" y2=\""
            << mt + ph << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << sx(x) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\">" << fmt_g(x, 6) << "</text>\n";
    }
    for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9; y += ystep) {
        svg << "<line x1=\"" << ml << "\" y1=\"" << sy(y) << "\" x2=\"" << ml + pw << "\" y2=\""
            << sy(y) << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << sy(y) + 4
            << "\" text-anchor=\"end\">" << fmt_g(y, 6) << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#333\"/>\n";

    const std::string xlabel =
        plot.axis == SweepAxis::Snr ? "SNR [dB]" : "Pilot density [alpha]";
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << xlabel
        << "</text>\n";
    svg << "<text x=\"18\" y=\"" << mt + ph / 2
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 18 "
        << mt + ph / 2 << ")\">NMSE [dB]</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = palette[k % 8];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (auto [x, y] : series[k].pts) svg << sx(x) << ',' << sy(y) << ' ';
        svg << "\"/>\n";
        for (auto [x, y] : series[k].pts)
            svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\""
                << color << "\"/>\n";
        const double ly = mt + 16 + 20 * static_cast<double>(k);
        svg << "<line x1=\"" << ml + pw + 14 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 38
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << ml + pw + 44 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[k].method
            << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open svg for writing: " + path);
    out << svg.str();
    if (!out) throw IoError("svg write failed: " + path);
}

} // namespace fmchan::bench
