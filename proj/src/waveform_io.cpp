#include "ductwarp/waveform_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "ductwarp/csv.hpp"

namespace ductwarp {

namespace {

static_assert(std::endian::native == std::endian::little,
              "raw float32 waveform files assume a little-endian host");

std::string sidecar_path(const std::string& path) { return path + ".json"; }

uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

} // namespace

void write_waveform(const std::string& path, const Waveform& w) {
    for (double v : w.samples)
        if (!std::isfinite(v)) throw InputError("waveform contains non-finite samples");
    std::ofstream raw(path, std::ios::binary);
    if (!raw) throw InputError("cannot write waveform file: " + path);
    std::vector<float> f32(w.samples.begin(), w.samples.end());
    raw.write(reinterpret_cast<const char*>(f32.data()),
              static_cast<std::streamsize>(f32.size() * sizeof(float)));
    if (!raw) throw InputError("short write on waveform file: " + path);

    std::ofstream side(sidecar_path(path));
    if (!side) throw InputError("cannot write waveform sidecar: " + sidecar_path(path));
    side << "{\"sample_rate\":" << csv_number(w.sample_rate) << ",\"t0\":" << csv_number(w.t0)
         << "}\n";
}

Waveform read_waveform(const std::string& path) {
    std::ifstream side(sidecar_path(path));
    if (!side) throw InputError("missing waveform sidecar: " + sidecar_path(path));
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("bad waveform sidecar " + sidecar_path(path) + ": " + e.what());
    }
    if (!meta.contains("sample_rate") || !meta.contains("t0"))
        throw InputError("waveform sidecar needs sample_rate and t0: " + sidecar_path(path));

    std::ifstream raw(path, std::ios::binary | std::ios::ate);
    if (!raw) throw InputError("cannot read waveform file: " + path);
    std::streamsize bytes = raw.tellg();
    raw.seekg(0);
    if (bytes % sizeof(float) != 0)
        throw InputError("waveform file size is not a multiple of 4: " + path);
    std::vector<float> f32(static_cast<std::size_t>(bytes) / sizeof(float));
    raw.read(reinterpret_cast<char*>(f32.data()), bytes);
    if (!raw) throw InputError("short read on waveform file: " + path);

    return Waveform(meta["sample_rate"].get<double>(), meta["t0"].get<double>(),
                    std::vector<double>(f32.begin(), f32.end()));
}

Waveform read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read WAV file: " + path);

    char tag[4];
    in.read(tag, 4);
    if (std::memcmp(tag, "RIFF", 4) != 0) throw InputError("not a RIFF file: " + path);
    read_u32(in); // riff size
    in.read(tag, 4);
    if (std::memcmp(tag, "WAVE", 4) != 0) throw InputError("not a WAVE file: " + path);

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    std::vector<char> data;
    while (in.read(tag, 4)) {
        uint32_t size = read_u32(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format = read_u16(in);
            channels = read_u16(in);
            rate = read_u32(in);
            read_u32(in); // byte rate
            read_u16(in); // block align
            bits = read_u16(in);
            if (size > 16) in.seekg(size - 16, std::ios::cur);
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(size);
            in.read(data.data(), size);
            break;
        } else {
            in.seekg(size + (size % 2), std::ios::cur);
        }
    }
    if (rate == 0 || data.empty()) throw InputError("WAV file missing fmt or data: " + path);
    if (channels != 1) throw InputError("only mono WAV files are supported: " + path);

    std::vector<double> samples;
    if (format == 1 && bits == 16) {
        samples.reserve(data.size() / 2);
        for (std::size_t i = 0; i + 1 < data.size(); i += 2) {
            int16_t v;
            std::memcpy(&v, data.data() + i, 2);
            samples.push_back(v / 32768.0);
        }
    } else if (format == 3 && bits == 32) {
        samples.reserve(data.size() / 4);
        for (std::size_t i = 0; i + 3 < data.size(); i += 4) {
            float v;
            std::memcpy(&v, data.data() + i, 4);
            samples.push_back(v);
        }
    } else {
        throw InputError("unsupported WAV encoding (need PCM16 or float32): " + path);
    }
    return Waveform(static_cast<double>(rate), 0.0, std::move(samples));
}

Waveform read_signal(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".wav") return read_wav(path);
    return read_waveform(path);
}

} // namespace ductwarp
