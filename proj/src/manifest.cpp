#include "fmchan/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "fmchan/crc32.hpp"
#include "fmchan/errors.hpp"

namespace fmchan {

FileDigest digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("digest_file: cannot open " + path);
    Crc32 crc;
    std::uint64_t total = 0;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got <= 0) break;
        crc.update(buf, static_cast<std::size_t>(got));
        total += static_cast<std::uint64_t>(got);
    }
    char hex[16];
    std::snprintf(hex, sizeof(hex), "%08x", crc.value());
    return FileDigest{path, hex, total};
}

std::string utc_now_iso8601() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["config"] = nlohmann::json::parse(resolved_config_json);
    j["seed"] = seed;
    j["inputs"] = nlohmann::json::array();
    for (const FileDigest& d : inputs)
        j["inputs"].push_back({{"path", d.path}, {"crc32", d.crc32_hex}, {"bytes", d.bytes}});
    j["outputs"] = outputs;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

} // namespace fmchan
