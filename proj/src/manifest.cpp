#include "ductwarp/manifest.hpp"

#include <cstdint>
#include <fstream>

#include "json.hpp"

#include "ductwarp/csv.hpp"
#include "ductwarp/errors.hpp"

namespace ductwarp {

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot hash missing file: " + path);
    uint64_t h = 14695981039346656037ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

void RunManifest::add_input(const std::string& role, const std::string& path) {
    inputs_.push_back({role, path});
}

void RunManifest::add_parameter(const std::string& key, const std::string& value) {
    parameters_.push_back({key, value});
}

void RunManifest::add_parameter(const std::string& key, double value) {
    parameters_.push_back({key, csv_number(value)});
}

void RunManifest::add_output(const std::string& path) {
    outputs_.push_back({path, hash_file(path)});
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command_;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    for (const auto& e : inputs_) inputs[e.key] = e.value;
    j["inputs"] = inputs;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& e : parameters_) params[e.key] = e.value;
    j["parameters"] = params;
    nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
    for (const auto& e : outputs_) {
        nlohmann::ordered_json o;
        o["path"] = e.key;
        o["fnv1a64"] = e.value;
        outputs.push_back(o);
    }
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write manifest: " + path);
    out << to_json();
}

} // namespace ductwarp
