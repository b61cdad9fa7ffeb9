#ifndef FMCHAN_BENCH_HPP
#define FMCHAN_BENCH_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmchan/estimator.hpp"

namespace fmchan::bench {

// Methods the harness can run itself. The score/diffusion baselines from the
// literature are name-reserved so externally produced rows can be merged into
// a report, but this harness does not reimplement them.
inline const std::vector<std::string> kRunnableMethods = {"proposed", "proposed-lite", "mmse4",
                                                          "ls", "lmmse"};
inline const std::vector<std::string> kExternalMethods = {"score-langevin", "score-vi",
                                                          "diffusion"};

struct SweepSpec {
    std::vector<std::string> methods;
    std::vector<double> snr_db;
    std::vector<double> alpha;
    std::map<std::string, std::string> test_datasets; // profile label -> path
    std::map<std::string, std::string> checkpoints;   // method name -> path
    std::string train_dataset;                        // covariance source for lmmse
    std::uint64_t seed = 1;
    int repetitions = 1;
    bool shared_pilot = false;
    int estimator_steps = 100;
    double gamma_c = 0.25;
    int mmse_samples = 4;
    bool paper_literal_noise = false;
    int threads = 1;
    int runtime_workload = 100;
    int runtime_warmup = 3;
    std::string external_rows; // optional CSV merged verbatim into the report

    void validate() const;
    std::string to_json() const;
    static SweepSpec from_json(const std::string& text);
};

struct BenchRow {
    std::string method;
    std::string profile;
    double snr_db = 0.0;
    double alpha = 1.0;
    double mean_nmse_db = 0.0;
    double std_nmse_db = 0.0;
    double mean_runtime_ms = 0.0;
    std::size_t peak_mem_bytes = 0;
    int n_samples = 0;
    int exact_recoveries = 0;
    std::string error; // non-empty marks a failed grid point
};

struct PerSampleRow {
    std::string method;
    std::string profile;
    double snr_db = 0.0;
    double alpha = 1.0;
    int sample = 0;
    double nmse_db = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<PerSampleRow> per_sample;
};

struct NmseAggregate {
    double mean_db = 0.0;
    double std_db = 0.0;
    int finite_n = 0;
    int exact_recoveries = 0;
};

// Arithmetic mean/std of the per-sample dB values; -inf sentinels (exact
// recoveries) are excluded from the moments and counted separately.
NmseAggregate aggregate_nmse_db(const std::vector<double>& values);

// Everything run_sweep needs already in memory.
struct SweepInputs {
    std::map<std::string, ChannelDataset> test_datasets;
    std::map<std::string, VelocityNet> checkpoints;
    std::optional<ComplexMatrix> lmmse_covariance;
};

BenchReport run_sweep(const SweepSpec& spec, const SweepInputs& inputs);
// Loads datasets/checkpoints from the paths in the spec, then runs.
BenchReport run_sweep(const SweepSpec& spec);

struct RuntimeStats {
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    std::size_t peak_mem_bytes = 0;
    int workload = 0;
};

// Times run_once(i) for i in [0, workload) after `warmup` excluded warmup
// calls. Strictly sequential; callers must not parallelize inside run_once.
RuntimeStats measure_runtime(const std::function<void(int)>& run_once, int workload = 100,
                             int warmup = 3);

// method,profile,snr_db,alpha,mean_nmse_db,std_nmse_db,mean_runtime_ms,
// peak_mem_bytes,n_samples. An exact_recoveries column is appended only when
// some row recovered exactly.
void emit_csv(const BenchReport& report, const std::string& path);
void emit_per_sample_csv(const BenchReport& report, const std::string& path);

enum class SweepAxis { Snr, Alpha };

struct PlotSpec {
    SweepAxis axis = SweepAxis::Snr;
    std::string profile;
    double fixed_value = 0.0; // the non-swept coordinate (alpha or snr)
    std::string title;
};

// Static SVG 1.1 line chart, one polyline per method.
void emit_svg(const BenchReport& report, const std::string& path, const PlotSpec& plot);

} // namespace fmchan::bench

#endif
