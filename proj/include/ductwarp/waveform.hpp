#ifndef DUCTWARP_WAVEFORM_HPP
#define DUCTWARP_WAVEFORM_HPP

#include <vector>

#include "ductwarp/errors.hpp"

namespace ductwarp {

/// Uniformly sampled real time series with an absolute start time.
struct Waveform {
    double sample_rate = 0.0; // Hz
    double t0 = 0.0;          // seconds, absolute time of samples[0]
    std::vector<double> samples;

    Waveform() = default;
    Waveform(double rate, double start, std::vector<double> data)
        : sample_rate(rate), t0(start), samples(std::move(data)) {
        if (!(sample_rate > 0.0)) throw InputError("sample rate must be > 0");
    }

    std::size_t size() const { return samples.size(); }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
    double end_time() const { return samples.empty() ? t0 : time(samples.size() - 1); }

    /// Signal energy, sum(x^2)/fs.
    double energy() const {
        double e = 0.0;
        for (double x : samples) e += x * x;
        return e / sample_rate;
    }
};

/// Sub-waveform covering [t_a, t_b] (clipped to the available samples).
Waveform slice(const Waveform& w, double t_a, double t_b);

/// Normalized correlation sum(ab)/sqrt(sum a^2 sum b^2) over the overlap of
/// two waveforms on the same rate, aligned by absolute time (grids must
/// agree to within half a sample).
double normalized_correlation(const Waveform& a, const Waveform& b);

/// Duration of the central interval holding the given energy fraction
/// (cumulative-energy quantiles at (1-fraction)/2 and 1-(1-fraction)/2).
double energy_duration(const Waveform& w, double fraction);

} // namespace ductwarp

#endif
