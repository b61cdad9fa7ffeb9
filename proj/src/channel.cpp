#include "fmchan/channel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "fmchan/errors.hpp"
#include "fmchan/threading.hpp"

namespace fmchan {

static_assert(std::endian::native == std::endian::little,
              "dataset format is little-endian; big-endian hosts are unsupported");

namespace {
constexpr double kPi = 3.14159265358979323846;
// Cluster and LOS bearings are confined to a +-60 degree sector.
constexpr double kSectorDeg = 60.0;
constexpr std::uint64_t kProfileGeometryStream = 0xC7A57E12B00157EDULL;
} // namespace

void ArrayGeometry::validate() const {
    if (n_t < 1 || n_r < 1) throw DomainError("ArrayGeometry: antenna counts must be >= 1");
    if (!(spacing_wavelengths > 0.0)) throw DomainError("ArrayGeometry: spacing must be > 0");
}

void ClusterProfile::validate() const {
    if (num_clusters < 1) throw DomainError("ClusterProfile: num_clusters must be >= 1");
    if (rays_per_cluster < 1) throw DomainError("ClusterProfile: rays_per_cluster must be >= 1");
    if (angular_spread_deg < 0.0) throw DomainError("ClusterProfile: angular spread must be >= 0");
    if (los && !std::isfinite(rician_k_db))
        throw DomainError("ClusterProfile: rician_k_db must be finite when los is set");
}

ClusterProfile ClusterProfile::nlos_c_like(std::uint64_t seed) {
    ClusterProfile p;
    p.name = "nlos-c-like";
    p.num_clusters = 8;
    p.rays_per_cluster = 20;
    p.angular_spread_deg = 5.0;
    p.cluster_power_decay_db = 3.0;
    p.los = false;
    p.seed = seed;
    return p;
}

ClusterProfile ClusterProfile::los_d_like(std::uint64_t seed) {
    ClusterProfile p = nlos_c_like(seed);
    p.name = "los-d-like";
    p.los = true;
    p.rician_k_db = 13.0;
    return p;
}

ClusterProfile ClusterProfile::named(const std::string& name, std::uint64_t seed) {
    if (name == "nlos-c-like") return nlos_c_like(seed);
    if (name == "los-d-like") return los_d_like(seed);
    throw DomainError("unknown channel profile '" + name +
                      "' (expected nlos-c-like or los-d-like)");
}

std::string ClusterProfile::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["channels_per_entry"] = 2;
    j["num_clusters"] = num_clusters;
    j["rays_per_cluster"] = rays_per_cluster;
    j["angular_spread_deg"] = angular_spread_deg;
    j["cluster_power_decay_db"] = cluster_power_decay_db;
    j["los"] = los;
    j["rician_k_db"] = rician_k_db;
    j["seed"] = seed;
    return j.dump();
}

ClusterProfile ClusterProfile::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ClusterProfile p;
    p.name = j.value("name", "custom");
    p.num_clusters = j.at("num_clusters").get<int>();
    p.rays_per_cluster = j.at("rays_per_cluster").get<int>();
    p.angular_spread_deg = j.at("angular_spread_deg").get<double>();
    p.cluster_power_decay_db = j.at("cluster_power_decay_db").get<double>();
    p.los = j.at("los").get<bool>();
    p.rician_k_db = j.at("rician_k_db").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

std::vector<cplx> steering_vector(int n_antennas, double spacing_wavelengths, double angle_deg) {
    if (n_antennas < 1) throw DomainError("steering_vector: antenna count must be >= 1");
    std::vector<cplx> a(n_antennas);
    const double phase_step = 2.0 * kPi * spacing_wavelengths * std::sin(angle_deg * kPi / 180.0);
    for (int m = 0; m < n_antennas; ++m)
        a[m] = cplx(std::cos(phase_step * m), std::sin(phase_step * m));
    return a;
}

namespace {

struct ProfileGeometry {
    std::vector<double> cluster_aod_deg;
    std::vector<double> cluster_aoa_deg;
    double los_aod_deg = 0.0;
    double los_aoa_deg = 0.0;
    std::vector<double> cluster_power; // sums to 1
};

// Fixed environment implied by the profile seed: bearings and the decayed
// cluster power split.
ProfileGeometry derive_geometry(const ClusterProfile& p) {
    ProfileGeometry g;
    Rng rng(p.seed, kProfileGeometryStream);
    g.cluster_aod_deg.resize(p.num_clusters);
    g.cluster_aoa_deg.resize(p.num_clusters);
    for (int l = 0; l < p.num_clusters; ++l) {
        g.cluster_aod_deg[l] = rng.next_uniform(-kSectorDeg, kSectorDeg);
        g.cluster_aoa_deg[l] = rng.next_uniform(-kSectorDeg, kSectorDeg);
    }
    g.los_aod_deg = rng.next_uniform(-kSectorDeg, kSectorDeg);
    g.los_aoa_deg = rng.next_uniform(-kSectorDeg, kSectorDeg);

    g.cluster_power.resize(p.num_clusters);
    double total = 0.0;
    for (int l = 0; l < p.num_clusters; ++l) {
        g.cluster_power[l] = std::pow(10.0, -p.cluster_power_decay_db * l / 10.0);
        total += g.cluster_power[l];
    }
    for (double& w : g.cluster_power) w /= total;
    return g;
}

void add_outer_product(ComplexMatrix& h, cplx gain, const std::vector<cplx>& ar,
                       const std::vector<cplx>& at) {
    const int n_r = static_cast<int>(ar.size());
    const int n_t = static_cast<int>(at.size());
    for (int i = 0; i < n_r; ++i) {
        const cplx gi = gain * ar[i];
        for (int j = 0; j < n_t; ++j) h.at(i, j) += gi * std::conj(at[j]);
    }
}

} // namespace

ComplexMatrix generate_channel(const ArrayGeometry& geometry, const ClusterProfile& profile,
                               Rng rng) {
    geometry.validate();
    profile.validate();
    const ProfileGeometry env = derive_geometry(profile);

    ComplexMatrix h(geometry.n_r, geometry.n_t);
    const int rays = profile.rays_per_cluster;
    for (int l = 0; l < profile.num_clusters; ++l) {
        const double ray_sigma = std::sqrt(env.cluster_power[l] / rays / 2.0);
        for (int r = 0; r < rays; ++r) {
            const cplx gain(ray_sigma * rng.next_gaussian(), ray_sigma * rng.next_gaussian());
            const double aoa =
                env.cluster_aoa_deg[l] + profile.angular_spread_deg * rng.next_gaussian();
            const double aod =
                env.cluster_aod_deg[l] + profile.angular_spread_deg * rng.next_gaussian();
            add_outer_product(h, gain,
                              steering_vector(geometry.n_r, geometry.spacing_wavelengths, aoa),
                              steering_vector(geometry.n_t, geometry.spacing_wavelengths, aod));
        }
    }

    if (profile.los) {
        const double k = std::pow(10.0, profile.rician_k_db / 10.0);
        const double c_nlos = std::sqrt(1.0 / (k + 1.0));
        const double c_los = std::sqrt(k / (k + 1.0));
        h *= cplx(c_nlos, 0.0);
        add_outer_product(h, cplx(c_los, 0.0),
                          steering_vector(geometry.n_r, geometry.spacing_wavelengths,
                                          env.los_aoa_deg),
                          steering_vector(geometry.n_t, geometry.spacing_wavelengths,
                                          env.los_aod_deg));
    }
    return h;
}

ChannelDataset build_dataset(const ArrayGeometry& geometry, const ClusterProfile& profile,
                             int num_samples, const Rng& rng, int threads) {
    if (num_samples < 1) throw DomainError("build_dataset: num_samples must be >= 1");
    geometry.validate();
    profile.validate();

    ChannelDataset ds;
    ds.geometry = geometry;
    ds.profile = profile;
    ds.samples.resize(num_samples);
    parallel_for(static_cast<std::size_t>(num_samples), threads, [&](std::size_t i) {
        ds.samples[i] = generate_channel(geometry, profile, rng.fork(i));
    });

    double power_sum = 0.0;
    for (const ComplexMatrix& h : ds.samples) power_sum += h.frobenius_sq();
    const double entries =
        static_cast<double>(num_samples) * geometry.n_r * geometry.n_t;
    ds.normalization_power = power_sum / entries;
    const cplx scale(1.0 / std::sqrt(ds.normalization_power), 0.0);
    for (ComplexMatrix& h : ds.samples) h *= scale;
    return ds;
}

namespace {

constexpr char kMagic[4] = {'F', 'M', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;

void write_raw(std::ofstream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw IoError("dataset write failed");
}

template <class T>
void write_pod(std::ofstream& out, T v) {
    write_raw(out, &v, sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw IoError("cannot open dataset file: " + path);
    }
    void read_raw(void* p, std::size_t n, const char* what) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw FormatError(path_ + ": truncated while reading " + std::string(what),
                              offset_ + static_cast<std::size_t>(in_.gcount()));
        offset_ += n;
    }
    template <class T>
    T read_pod(const char* what) {
        T v;
        read_raw(&v, sizeof(T), what);
        return v;
    }
    std::size_t offset() const { return offset_; }
    const std::string& path() const { return path_; }

private:
    std::ifstream in_;
    std::string path_;
    std::size_t offset_ = 0;
};

} // namespace

void save_dataset(const ChannelDataset& dataset, const std::string& path) {
    if (dataset.samples.empty()) throw DomainError("save_dataset: empty dataset");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open dataset file for writing: " + path);

    write_raw(out, kMagic, 4);
    write_pod<std::uint32_t>(out, kVersion);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.samples.size()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.geometry.n_r));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.geometry.n_t));
    write_pod<double>(out, dataset.normalization_power);

    nlohmann::json meta = nlohmann::json::parse(dataset.profile.to_json());
    meta["spacing_wavelengths"] = dataset.geometry.spacing_wavelengths;
    const std::string blob = meta.dump();
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(blob.size()));
    write_raw(out, blob.data(), blob.size());

    std::vector<float> row(2 * static_cast<std::size_t>(dataset.geometry.n_t));
    for (const ComplexMatrix& h : dataset.samples) {
        if (h.rows() != dataset.geometry.n_r || h.cols() != dataset.geometry.n_t)
            throw StructuralError("save_dataset: sample shape disagrees with geometry");
        for (int i = 0; i < h.rows(); ++i) {
            for (int j = 0; j < h.cols(); ++j) {
                row[2 * j] = static_cast<float>(h.at(i, j).real());
                row[2 * j + 1] = static_cast<float>(h.at(i, j).imag());
            }
            write_raw(out, row.data(), row.size() * sizeof(float));
        }
    }
    out.flush();
    if (!out) throw IoError("dataset write failed: " + path);
}

ChannelDataset load_dataset(const std::string& path) {
    Reader in(path);

    char magic[4];
    in.read_raw(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(path + ": bad magic (expected FMCH)", 0);
    const auto version = in.read_pod<std::uint32_t>("version");
    if (version != kVersion)
        throw FormatError(path + ": unsupported version " + std::to_string(version), 4);
    const auto num_samples = in.read_pod<std::uint32_t>("sample count");
    const auto n_r = in.read_pod<std::uint32_t>("n_r");
    const auto n_t = in.read_pod<std::uint32_t>("n_t");
    if (num_samples == 0 || n_r == 0 || n_t == 0)
        throw FormatError(path + ": zero sample count or dimension", 8);
    if (n_r > 4096 || n_t > 4096 || num_samples > 50'000'000)
        throw FormatError(path + ": implausible header dimensions", 8);
    const double norm_power = in.read_pod<double>("normalization power");

    const auto blob_len = in.read_pod<std::uint32_t>("profile blob length");
    std::string blob(blob_len, '\0');
    const std::size_t blob_offset = in.offset();
    in.read_raw(blob.data(), blob_len, "profile blob");

    ChannelDataset ds;
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(blob);
        ds.profile = ClusterProfile::from_json(blob);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": bad profile blob: " + e.what(), blob_offset);
    }
    if (meta.value("channels_per_entry", 0) != 2)
        throw FormatError(path + ": channels-per-entry must be 2", blob_offset);

    ds.geometry.n_r = static_cast<int>(n_r);
    ds.geometry.n_t = static_cast<int>(n_t);
    ds.geometry.spacing_wavelengths = meta.value("spacing_wavelengths", 0.5);
    ds.normalization_power = norm_power;

    ds.samples.reserve(num_samples);
    std::vector<float> buf(2 * static_cast<std::size_t>(n_r) * n_t);
    for (std::uint32_t s = 0; s < num_samples; ++s) {
        in.read_raw(buf.data(), buf.size() * sizeof(float), "sample data");
        ComplexMatrix h(static_cast<int>(n_r), static_cast<int>(n_t));
        cplx* dst = h.data();
        for (std::size_t i = 0; i < buf.size() / 2; ++i)
            dst[i] = cplx(buf[2 * i], buf[2 * i + 1]);
        if (!h.all_finite())
            throw FormatError(path + ": non-finite entries in sample " + std::to_string(s),
                              in.offset());
        ds.samples.push_back(std::move(h));
    }
    return ds;
}

} // namespace fmchan
