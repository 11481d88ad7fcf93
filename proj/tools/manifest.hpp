#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string_view>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "udemd/error.hpp"

namespace udemd::cli {

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return hex64(fnv1a(buf.str()));
}

class Logger {
public:
    void set_json(bool on) { json_ = on; }

    void info(const std::string& msg, const nlohmann::json& fields = nlohmann::json::object()) const {
        emit("info", msg, fields);
    }
    void error(const std::string& msg, const nlohmann::json& fields = nlohmann::json::object()) const {
        emit("error", msg, fields);
    }

private:
    void emit(const char* level, const std::string& msg, const nlohmann::json& fields) const {
        if (json_) {
            nlohmann::json j = fields;
            j["level"] = level;
            j["msg"] = msg;
            std::cerr << j.dump() << '\n';
        } else {
            std::cerr << "udemd: " << (std::string(level) == "error" ? "error: " : "") << msg;
            for (auto it = fields.begin(); it != fields.end(); ++it) std::cerr << ' ' << it.key() << '=' << it.value().dump();
            std::cerr << '\n';
        }
    }

    bool json_ = false;
};

/// Everything needed to reproduce an output: command, parameters, input
/// fingerprints, seed, phase timings and tool version. The run id hashes
/// the reproducible part only, so reruns share it.
class RunManifest {
public:
    RunManifest(std::string command, std::string version) : command_(std::move(command)), version_(std::move(version)) {}

    void param(const std::string& key, nlohmann::json value) { params_[key] = std::move(value); }
    void seed(std::uint64_t s) { seed_ = s; }

    void input(const std::string& role, const std::string& path) {
        inputs_.push_back({{"role", role}, {"path", path}, {"fingerprint", file_fingerprint(path)}});
    }

    void output(const std::string& path) { outputs_.push_back(path); }

    template <typename F>
    auto phase(const std::string& name, F&& body) {
        const auto start = std::chrono::steady_clock::now();
        auto finish = [&] {
            phases_.push_back(
                {{"name", name},
                 {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}});
        };
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            finish();
        } else {
            auto r = body();
            finish();
            return r;
        }
    }

    std::string run_id() const {
        nlohmann::json key{{"command", command_}, {"parameters", params_}, {"seed", seed_}, {"version", version_}};
        for (const auto& in : inputs_) key["inputs"].push_back(in["fingerprint"]);
        return hex64(fnv1a(key.dump()));
    }

    static std::string path_for(const std::string& out) { return out + ".manifest.json"; }

    /// Comment line placed in text outputs.
    std::string reference(const std::string& out) const {
        return "manifest=" + path_for(out) + " run_id=" + run_id();
    }

    nlohmann::json to_json() const {
        return {{"command", command_}, {"parameters", params_}, {"inputs", inputs_},   {"outputs", outputs_},
                {"seed", seed_},       {"phases", phases_},     {"version", version_}, {"run_id", run_id()}};
    }

    void write(const std::string& out) const {
        std::ofstream f(path_for(out));
        require(static_cast<bool>(f), ErrorCode::IoError, "cannot write manifest for '" + out + "'");
        f << to_json().dump(2) << '\n';
        require(static_cast<bool>(f), ErrorCode::IoError, "failed writing manifest for '" + out + "'");
    }

private:
    std::string command_;
    std::string version_;
    nlohmann::json params_ = nlohmann::json::object();
    nlohmann::json inputs_ = nlohmann::json::array();
    std::vector<std::string> outputs_;
    nlohmann::json phases_ = nlohmann::json::array();
    std::uint64_t seed_ = 0;
};

} // namespace udemd::cli
