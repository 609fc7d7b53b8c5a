#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace pne::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Output directory of one command invocation plus the manifest describing it.
class RunManifest {
public:
    RunManifest(std::string command, const std::filesystem::path& out_root, const std::string& run_id,
                std::uint64_t seed);

    const std::filesystem::path& dir() const { return dir_; }

    /// Writes `content` to dir()/name and records its SHA-256.
    void write_artifact(const std::string& name, const std::string& content);
    /// Records an artifact written by other means.
    void add_artifact(const std::string& name);

    void set_config(const std::string& yaml_text) { config_ = yaml_text; }
    void set_field(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
    void warn(const std::string& message);

    /// Writes manifest.json. Artifact hashes cover every listed file; the manifest itself
    /// carries the wall time and is therefore not reproducible byte for byte.
    void finish();

private:
    std::string command_;
    std::filesystem::path dir_;
    std::string run_id_;
    std::uint64_t seed_;
    std::string config_;
    nlohmann::json artifacts_ = nlohmann::json::array();
    nlohmann::json extra_ = nlohmann::json::object();
    std::vector<std::string> warnings_;
    double started_;
};

std::string sha256_file(const std::filesystem::path& path);
std::string default_run_id(std::uint64_t seed);

}  // namespace pne::cli
