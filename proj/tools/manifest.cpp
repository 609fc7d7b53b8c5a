#include "manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>

#include "pne/core/errors.hpp"

namespace pne::cli {
namespace {

double wall_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("artifact", "cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string default_run_id(std::uint64_t seed) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%dT%H%M%SZ") << "-s" << seed;
    return os.str();
}

RunManifest::RunManifest(std::string command, const std::filesystem::path& out_root, const std::string& run_id,
                         std::uint64_t seed)
    : command_(std::move(command)),
      dir_(out_root / run_id),
      run_id_(run_id),
      seed_(seed),
      started_(wall_seconds()) {
    std::filesystem::create_directories(dir_);
}

void RunManifest::write_artifact(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw ValidationError("out", "cannot write " + (dir_ / name).string());
    out << content;
    out.close();
    add_artifact(name);
}

void RunManifest::add_artifact(const std::string& name) {
    const auto path = dir_ / name;
    artifacts_.push_back({{"path", name},
                          {"sha256", sha256_file(path)},
                          {"bytes", static_cast<std::uint64_t>(std::filesystem::file_size(path))}});
}

void RunManifest::warn(const std::string& message) {
    std::cerr << "warning: " << message << "\n";
    warnings_.push_back(message);
}

void RunManifest::finish() {
    nlohmann::json m;
    m["command"] = command_;
    m["version"] = kVersion;
    m["run_id"] = run_id_;
    m["seed"] = seed_;
    m["config"] = config_;
    m["artifacts"] = artifacts_;
    m["warnings"] = warnings_;
    m["wall_time_s"] = wall_seconds() - started_;
    for (const auto& [k, v] : extra_.items()) m[k] = v;
    std::ofstream out(dir_ / "manifest.json");
    out << m.dump(2) << "\n";
}

}  // namespace pne::cli
