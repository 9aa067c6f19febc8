#include "rydion/manifest.hpp"

#include <fstream>
#include <sstream>

#include "rydion/errors.hpp"

namespace rydion {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

void RunManifest::add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
}

void RunManifest::add_file(const std::filesystem::path& file,
                           const std::filesystem::path& relative_to) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("manifest: cannot read " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    std::error_code ec;
    std::filesystem::path rel = std::filesystem::relative(file, relative_to, ec);
    if (ec) rel = file;
    add("file." + rel.generic_string(), to_hex(fnv1a64(data)));
}

void RunManifest::write(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw ConfigError("manifest: cannot write " + file.string());
    for (const auto& [key, value] : entries)
        out << key << " = " << value << "\n";
}

} // namespace rydion
