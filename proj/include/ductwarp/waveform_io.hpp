#ifndef DUCTWARP_WAVEFORM_IO_HPP
#define DUCTWARP_WAVEFORM_IO_HPP

#include <string>

#include "ductwarp/waveform.hpp"

namespace ductwarp {

/// Writes raw little-endian float32 mono samples to `path` plus a JSON
/// sidecar `path + ".json"` with {"sample_rate": ..., "t0": ...}.
void write_waveform(const std::string& path, const Waveform& w);

/// Reads the pair written by write_waveform.
Waveform read_waveform(const std::string& path);

/// Reads a mono PCM WAV container (16-bit integer or 32-bit float). t0 = 0.
Waveform read_wav(const std::string& path);

/// Dispatch on extension: ".wav" goes through read_wav, everything else is
/// treated as raw float32 with a sidecar.
Waveform read_signal(const std::string& path);

} // namespace ductwarp

#endif
