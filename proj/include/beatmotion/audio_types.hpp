#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "beatmotion/errors.hpp"

namespace beatmotion::audio {

// Mono PCM, samples normalized into [-1, 1].
struct PcmSignal {
    std::vector<double> samples;
    int sample_rate = 0;

    double duration() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// Beat timestamps with the derived per-clip tempo. Always built through
// from_beats so bpm = 60 / median(interval) holds by construction.
struct BeatGrid {
    std::vector<double> beats;      // seconds, strictly increasing
    std::vector<double> intervals;  // beats[i+1] - beats[i]
    double bpm = 0.0;

    static BeatGrid from_beats(std::vector<double> beats) {
        if (beats.size() < 2) throw Error("BeatGrid: need at least two beats");
        BeatGrid grid;
        grid.intervals.reserve(beats.size() - 1);
        for (std::size_t i = 0; i + 1 < beats.size(); ++i) {
            const double dt = beats[i + 1] - beats[i];
            if (!(dt > 0.0)) throw Error("BeatGrid: beats must be strictly increasing");
            grid.intervals.push_back(dt);
        }
        std::vector<double> sorted = grid.intervals;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        const double median =
            (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
        grid.bpm = 60.0 / median;
        grid.beats = std::move(beats);
        return grid;
    }
};

// Loudness and dynamics of one inter-beat segment.
struct SegmentFeatures {
    double t_start = 0.0;
    double t_end = 0.0;
    double loudness_db = 0.0;  // dBFS, clamped into [-96, 0]
    double variance = 0.0;     // population variance of 10 ms frame RMS values
};

// Per-clip aggregates: the means feed the latent prior, the sorted arrays
// back the empirical-CDF lookup at generation time.
struct FeatureSummary {
    double loudness_mean = 0.0;
    double variance_mean = 0.0;
    std::vector<double> loudness_sorted;
    std::vector<double> variance_sorted;
};

// Empirical CDF over order statistics with linear interpolation: the
// minimum maps to 0, the maximum to 1, a lone sample to 0.5.
inline double empirical_cdf(const std::vector<double>& sorted, double x) {
    if (sorted.empty()) throw Error("empirical_cdf: empty sample");
    const std::size_t m = sorted.size();
    if (m == 1) return 0.5;
    if (x <= sorted.front()) return 0.0;
    if (x >= sorted.back()) return 1.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - sorted.begin());
    const double lo = sorted[j - 1];
    const double hi = sorted[j];
    const double frac = (x - lo) / (hi - lo);
    return (static_cast<double>(j - 1) + frac) / static_cast<double>(m - 1);
}

}  // namespace beatmotion::audio
