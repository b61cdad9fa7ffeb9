#include "fmchan/velocity_net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "fmchan/crc32.hpp"
#include "fmchan/errors.hpp"

namespace fmchan {

void VelocityNetArch::validate() const {
    if (rows < 1 || cols < 1) throw StructuralError("arch: spatial dims must be >= 1");
    if (widths.empty()) throw StructuralError("arch: needs at least one level width");
    for (int w : widths)
        if (w < 1) throw StructuralError("arch: level widths must be >= 1");
    if (temb_dim < 2 || temb_dim % 2 != 0)
        throw StructuralError("arch: time embedding dimension must be even and >= 2");
    const int factor = 1 << levels();
    if (rows % factor != 0 || cols % factor != 0)
        throw StructuralError("arch: input " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " not divisible by 2^levels = " +
                              std::to_string(factor));
}

std::string VelocityNetArch::to_json() const {
    nlohmann::json j;
    j["rows"] = rows;
    j["cols"] = cols;
    j["widths"] = widths;
    j["temb_dim"] = temb_dim;
    return j.dump();
}

VelocityNetArch VelocityNetArch::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    VelocityNetArch a;
    a.rows = j.at("rows").get<int>();
    a.cols = j.at("cols").get<int>();
    a.widths = j.at("widths").get<std::vector<int>>();
    a.temb_dim = j.at("temb_dim").get<int>();
    return a;
}

VelocityNetArch VelocityNetArch::named(const std::string& name, int rows, int cols) {
    if (name == "full") return full(rows, cols);
    if (name == "lite") return lite(rows, cols);
    throw DomainError("unknown arch '" + name + "' (expected lite or full)");
}

namespace {

struct LayoutBuilder {
    std::vector<ParamSegment> segments;
    std::size_t total = 0;

    void conv(const std::string& name, int cout, int cin, int k, bool zero = false) {
        add(name + ".w", static_cast<std::size_t>(cout) * cin * k * k, k * k * cin, zero,
            ad::Shape::t4(cout, cin, k, k));
        add(name + ".b", static_cast<std::size_t>(cout), 0, zero, ad::Shape::vec(cout));
    }
    void dense(const std::string& name, int dout, int din) {
        add(name + ".w", static_cast<std::size_t>(dout) * din, din, false,
            ad::Shape::mat(dout, din));
        add(name + ".b", static_cast<std::size_t>(dout), 0, false, ad::Shape::vec(dout));
    }
    void add(const std::string& name, std::size_t size, int fan_in, bool zero, ad::Shape shape) {
        segments.push_back({name, total, size, fan_in, zero, shape});
        total += size;
    }
};

std::vector<ParamSegment> build_layout(const VelocityNetArch& arch, std::size_t* total) {
    LayoutBuilder lb;
    const int levels = arch.levels();
    for (int i = 0; i < levels; ++i) {
        const int cin = (i == 0) ? 2 : arch.widths[i - 1];
        const int w = arch.widths[i];
        const std::string base = "enc" + std::to_string(i);
        lb.conv(base + ".conv1", w, cin, 3);
        lb.dense(base + ".temb", w, arch.temb_dim);
        lb.conv(base + ".conv2", w, w, 3);
    }
    for (int i = levels - 1; i >= 0; --i) {
        const int w = arch.widths[i];
        const int cin = (i == levels - 1) ? 2 * arch.widths[levels - 1]
                                          : arch.widths[i + 1] + arch.widths[i];
        const std::string base = "dec" + std::to_string(i);
        lb.conv(base + ".conv1", w, cin, 3);
        lb.dense(base + ".temb", w, arch.temb_dim);
        lb.conv(base + ".conv2", w, w, 3);
    }
    lb.conv("final", 2, arch.widths[0], 1, /*zero=*/true);
    *total = lb.total;
    return lb.segments;
}

} // namespace

VelocityNet::VelocityNet(VelocityNetArch arch) : arch_(std::move(arch)) {
    arch_.validate();
    std::size_t total = 0;
    segments_ = build_layout(arch_, &total);
    params_.assign(total, 0.0);
}

std::vector<double> time_embedding(double t, int temb_dim) {
    // Geometric frequency ladder. Capped at 1e2: t lives in [0,1], so higher
    // rungs would alias and make the field needlessly stiff in t.
    const int half = temb_dim / 2;
    std::vector<double> emb(temb_dim);
    for (int j = 0; j < half; ++j) {
        const double freq = (half > 1) ? std::pow(10.0, 2.0 * j / (half - 1)) : 1.0;
        emb[j] = std::sin(freq * t);
        emb[half + j] = std::cos(freq * t);
    }
    return emb;
}

int VelocityNet::build_graph(ad::Tape& tape, int input_node,
                             const std::vector<double>& t_batch,
                             std::vector<int>* param_leaf_ids) const {
    const ad::Shape in_shape = tape.value(input_node).shape;
    if (in_shape.rank != 4 || in_shape.d[1] != 2 || in_shape.d[2] != arch_.rows ||
        in_shape.d[3] != arch_.cols)
        throw StructuralError("velocity net: input shape does not match arch (" +
                              std::to_string(arch_.rows) + "x" + std::to_string(arch_.cols) +
                              ")");
    const int batch = in_shape.d[0];
    if (static_cast<int>(t_batch.size()) != batch)
        throw StructuralError("velocity net: one time value per batch element required");

    // Parameter leaves, one per segment.
    std::vector<int> leaf(segments_.size());
    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const ParamSegment& seg = segments_[s];
        ad::Tensor v(seg.shape);
        std::memcpy(v.ptr(), params_.data() + seg.offset, seg.size * sizeof(double));
        leaf[s] = tape.leaf(std::move(v));
    }
    if (param_leaf_ids) *param_leaf_ids = leaf;

    ad::Tensor temb(ad::Shape::mat(batch, arch_.temb_dim));
    for (int n = 0; n < batch; ++n) {
        const std::vector<double> e = time_embedding(t_batch[n], arch_.temb_dim);
        std::copy(e.begin(), e.end(), temb.ptr() + static_cast<std::size_t>(n) * arch_.temb_dim);
    }
    const int temb_node = tape.leaf(std::move(temb));

    // Segment order matches build_layout; walk it with a cursor.
    std::size_t cursor = 0;
    auto next = [&]() { return leaf[cursor++]; };
    auto block = [&](int h) {
        const int w1 = next(), b1 = next();
        const int tw = next(), tb = next();
        const int w2 = next(), b2 = next();
        h = tape.conv2d(h, w1, b1);
        h = tape.bias_add_channel(h, tape.dense(temb_node, tw, tb));
        h = tape.silu(h);
        h = tape.conv2d(h, w2, b2);
        return tape.silu(h);
    };

    const int levels = arch_.levels();
    std::vector<int> skips(levels);
    int h = input_node;
    for (int i = 0; i < levels; ++i) {
        h = block(h);
        skips[i] = h;
        h = tape.avg_pool2(h);
    }
    for (int i = levels - 1; i >= 0; --i) {
        h = tape.upsample2(h);
        h = tape.concat_channel(h, skips[i]);
        h = block(h);
    }
    const int fw = next(), fb = next();
    return tape.conv2d(h, fw, fb);
}

RealTensor3 VelocityNet::forward(const RealTensor3& x, double t) const {
    if (x.rows() != arch_.rows || x.cols() != arch_.cols)
        throw StructuralError("velocity net forward: input is " + std::to_string(x.rows()) +
                              "x" + std::to_string(x.cols()) + ", arch wants " +
                              std::to_string(arch_.rows) + "x" + std::to_string(arch_.cols));
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("velocity net forward: t must be in [0,1]");

    ad::Tape tape;
    ad::Tensor in(ad::Shape::t4(1, 2, arch_.rows, arch_.cols));
    std::memcpy(in.ptr(), x.data(), x.size() * sizeof(double));
    const int out = build_graph(tape, tape.leaf(std::move(in)), {t});

    RealTensor3 y(arch_.rows, arch_.cols);
    std::memcpy(y.data(), tape.value(out).ptr(), y.size() * sizeof(double));
    return y;
}

void init_params(VelocityNet& net, Rng& rng) {
    std::vector<double>& p = net.params();
    for (const ParamSegment& seg : net.segments()) {
        if (seg.zero_init || seg.fan_in == 0) {
            std::fill(p.begin() + seg.offset, p.begin() + seg.offset + seg.size, 0.0);
            continue;
        }
        const double sigma = std::sqrt(2.0 / seg.fan_in);
        for (std::size_t i = 0; i < seg.size; ++i)
            p[seg.offset + i] = sigma * rng.next_gaussian();
    }
}

namespace {
constexpr char kMagic[4] = {'F', 'M', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
} // namespace

void save_checkpoint(const VelocityNet& net, const std::string& path) {
    std::string payload;
    payload.append(kMagic, 4);
    auto append_pod = [&payload](const auto& v) {
        payload.append(reinterpret_cast<const char*>(&v), sizeof(v));
    };
    append_pod(kVersion);
    const std::string arch_json = net.arch().to_json();
    append_pod(static_cast<std::uint32_t>(arch_json.size()));
    payload.append(arch_json);
    append_pod(static_cast<std::uint64_t>(net.param_count()));
    for (double d : net.params()) {
        const float f = static_cast<float>(d);
        append_pod(f);
    }
    const std::uint32_t crc = Crc32::of(payload.data(), payload.size());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
    out.flush();
    if (!out) throw IoError("checkpoint write failed: " + path);
}

VelocityNet load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t off = 0;
    auto need = [&](std::size_t n, const char* what) {
        if (off + n > bytes.size())
            throw FormatError(path + ": truncated while reading " + std::string(what), off);
    };
    auto read_pod = [&](auto& v, const char* what) {
        need(sizeof(v), what);
        std::memcpy(&v, bytes.data() + off, sizeof(v));
        off += sizeof(v);
    };

    need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError(path + ": bad magic (expected FMCK)", 0);
    off = 4;
    std::uint32_t version = 0;
    read_pod(version, "version");
    if (version != kVersion)
        throw FormatError(path + ": unsupported version " + std::to_string(version), 4);

    std::uint32_t arch_len = 0;
    read_pod(arch_len, "arch length");
    need(arch_len, "arch json");
    const std::string arch_json = bytes.substr(off, arch_len);
    off += arch_len;

    VelocityNetArch arch;
    try {
        arch = VelocityNetArch::from_json(arch_json);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": bad arch json: " + e.what(), off - arch_len);
    }
    VelocityNet net(arch);

    std::uint64_t stored_count = 0;
    read_pod(stored_count, "parameter count");
    if (stored_count != net.param_count())
        throw FormatError(path + ": parameter count " + std::to_string(stored_count) +
                              " disagrees with arch-derived " +
                              std::to_string(net.param_count()),
                          off - sizeof(std::uint64_t));

    const std::size_t params_bytes = net.param_count() * sizeof(float);
    need(params_bytes, "parameters");
    const std::size_t payload_end = off + params_bytes;

    std::uint32_t stored_crc = 0;
    std::size_t crc_off = payload_end;
    if (crc_off + sizeof(stored_crc) > bytes.size())
        throw FormatError(path + ": truncated while reading crc", crc_off);
    std::memcpy(&stored_crc, bytes.data() + crc_off, sizeof(stored_crc));
    const std::uint32_t actual_crc = Crc32::of(bytes.data(), payload_end);
    if (stored_crc != actual_crc)
        throw FormatError(path + ": checksum mismatch", crc_off);

    for (std::size_t i = 0; i < net.param_count(); ++i) {
        float f = 0.0f;
        std::memcpy(&f, bytes.data() + off + i * sizeof(float), sizeof(float));
        net.params()[i] = static_cast<double>(f);
    }
    return net;
}

} // namespace fmchan
