#ifndef FMCHAN_MANIFEST_HPP
#define FMCHAN_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace fmchan {

inline constexpr const char* kToolVersion = "0.1.0";

struct FileDigest {
    std::string path;
    std::string crc32_hex;
    std::uint64_t bytes = 0;
};

// CRC-32 of the whole file plus its size.
FileDigest digest_file(const std::string& path);

std::string utc_now_iso8601();

// One manifest per run, written next to the run's outputs, recording the
// fully resolved configuration and content digests of every input.
struct RunManifest {
    std::string command;
    std::string tool_version = kToolVersion;
    std::string resolved_config_json = "{}";
    std::uint64_t seed = 0;
    std::vector<FileDigest> inputs;
    std::vector<std::string> outputs;
    std::string started_utc;
    std::string finished_utc;

    void write(const std::string& path) const;
};

} // namespace fmchan

#endif
