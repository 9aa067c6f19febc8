#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace rydion {

/// FNV-1a 64-bit hash (non-cryptographic); used for cache checksums and
/// config fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& s);
std::string to_hex(std::uint64_t value);

/// Plain-text key-value run record written next to sweep outputs; every
/// output file is listed with its checksum.
struct RunManifest {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& key, const std::string& value);
    void add_file(const std::filesystem::path& file,
                  const std::filesystem::path& relative_to);
    void write(const std::filesystem::path& file) const;
};

} // namespace rydion
