#include "softland/manifest.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace softland {

using nlohmann::json;

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string() + " for hashing");

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 initialisation failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0 &&
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount())) != 1) {
            throw std::runtime_error("SHA-256 update failed");
        }
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
        throw std::runtime_error("SHA-256 finalisation failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        char pair[3];
        std::snprintf(pair, sizeof pair, "%02x", digest[i]);
        hex += pair;
    }
    return hex;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void add_files(RunManifest& m, const std::filesystem::path& base,
               const std::vector<std::filesystem::path>& paths) {
    for (const auto& p : paths) {
        m.files.push_back({std::filesystem::relative(p, base).generic_string(), sha256_file(p),
                           std::filesystem::file_size(p)});
    }
}

json to_json(const RunManifest& m) {
    json files = json::array();
    for (const auto& f : m.files) {
        files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    }
    return json{{"tool", "softland"},
                {"tool_version", m.tool_version},
                {"command", m.command},
                {"argv", m.argv},
                {"config", m.config},
                {"seed", m.seed},
                {"started_utc", m.started_utc},
                {"finished_utc", m.finished_utc},
                {"files", files}};
}

std::filesystem::path write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
    const auto path = dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json(m).dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
    return path;
}

}  // namespace softland
