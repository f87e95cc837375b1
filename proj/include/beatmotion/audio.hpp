#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "beatmotion/audio_types.hpp"
#include "beatmotion/errors.hpp"
#include "beatmotion/fft.hpp"
#include "beatmotion/linalg.hpp"

namespace beatmotion::audio {

struct AnalysisParams {
    std::size_t frame_size = 1024;
    std::size_t hop = 512;
};

// Half-wave-rectified spectral flux per frame: Hann-windowed magnitude
// spectra, positive bin-wise increase vs the previous frame, summed. The
// first frame is differenced against silence, so onsets at t = 0 register.
inline std::vector<double> onset_envelope(const PcmSignal& signal, std::size_t frame_size,
                                          std::size_t hop) {
    if (hop == 0 || frame_size < hop) throw Error("onset_envelope: need frame_size >= hop > 0");
    const std::size_t n = signal.samples.size();
    if (n < frame_size) throw Error("onset_envelope: signal shorter than one frame");

    std::vector<double> window(frame_size);
    for (std::size_t i = 0; i < frame_size; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(frame_size - 1)));
    }

    const std::size_t frames = (n - frame_size) / hop + 1;
    std::vector<double> envelope(frames, 0.0);
    std::vector<double> frame(frame_size);
    std::vector<double> prev;  // empty = silence before the clip

    for (std::size_t f = 0; f < frames; ++f) {
        const double* src = signal.samples.data() + f * hop;
        for (std::size_t i = 0; i < frame_size; ++i) frame[i] = src[i] * window[i];
        std::vector<double> mag = magnitude_spectrum(frame);
        double flux = 0.0;
        for (std::size_t b = 0; b < mag.size(); ++b) {
            const double inc = mag[b] - (prev.empty() ? 0.0 : prev[b]);
            if (inc > 0.0) flux += inc;
        }
        envelope[f] = flux;
        prev = std::move(mag);
    }
    return envelope;
}

namespace detail {

inline double lerp_at(const std::vector<double>& v, double x) {
    if (x <= 0.0) return v.front();
    const double last = static_cast<double>(v.size() - 1);
    if (x >= last) return v.back();
    const std::size_t i = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(i);
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

// Offset of a local maximum relative to index m, from a parabola through
// the three neighboring samples. Clamped to half a bin.
inline double parabolic_offset(double left, double mid, double right) {
    const double denom = left - 2.0 * mid + right;
    if (std::abs(denom) < 1e-18) return 0.0;
    return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

}  // namespace detail

// Tempo from the autocorrelation of the onset envelope restricted to
// 40-200 BPM, phase from a comb that maximizes mean envelope, then a
// weighted least-squares fit through the snapped envelope peaks. Beats are
// timestamps in envelope time (frame index times hop_seconds).
inline BeatGrid track_beats(const std::vector<double>& envelope, double hop_seconds) {
    if (envelope.empty()) throw Error("track_beats: empty envelope");
    if (!(hop_seconds > 0.0)) throw Error("track_beats: hop_seconds must be positive");
    const std::size_t n = envelope.size();

    const double env_mean = mean(envelope);
    std::vector<double> centered(n);
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        centered[i] = envelope[i] - env_mean;
        energy += centered[i] * centered[i];
    }
    if (energy <= 0.0) throw NoBeatError("no beat detected: flat onset envelope");

    const auto lag_min = static_cast<std::size_t>(std::ceil((60.0 / 200.0) / hop_seconds));
    const auto lag_max_raw = static_cast<std::size_t>(std::floor((60.0 / 40.0) / hop_seconds));
    const std::size_t lag_max = std::min(lag_max_raw, n >= 2 ? n - 2 : 0);
    if (lag_min < 1 || lag_min > lag_max) {
        throw NoBeatError("no beat detected: envelope too short for the tempo range");
    }

    std::vector<double> ac(lag_max + 1, 0.0);
    std::size_t best_lag = 0;
    double best_ac = 0.0;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
        ac[lag] = s;
        if (s > best_ac) {
            best_ac = s;
            best_lag = lag;
        }
    }
    if (best_lag == 0 || best_ac / energy < 0.05) {
        throw NoBeatError("no beat detected: no periodicity above the noise floor");
    }

    double period = static_cast<double>(best_lag);
    if (best_lag > lag_min && best_lag < lag_max) {
        period += detail::parabolic_offset(ac[best_lag - 1], ac[best_lag], ac[best_lag + 1]);
    }

    // integer comb phase, scored by mean envelope on the comb
    double best_phase = 0.0;
    double best_score = -1.0;
    for (std::size_t phase = 0; phase < static_cast<std::size_t>(period); ++phase) {
        double score = 0.0;
        std::size_t count = 0;
        for (double p = static_cast<double>(phase); p <= static_cast<double>(n - 1); p += period) {
            score += envelope[static_cast<std::size_t>(std::llround(p))];
            ++count;
        }
        if (count > 0 && score / static_cast<double>(count) > best_score) {
            best_score = score / static_cast<double>(count);
            best_phase = static_cast<double>(phase);
        }
    }

    // snap each predicted beat to the nearest envelope peak
    struct Peak {
        double k = 0.0;
        double x = 0.0;
        double height = 0.0;
    };
    std::vector<Peak> peaks;
    const auto half_window = static_cast<std::ptrdiff_t>(std::max(1.0, std::floor(0.3 * period)));
    for (double p = best_phase; p <= static_cast<double>(n - 1); p += period) {
        const auto center = static_cast<std::ptrdiff_t>(std::llround(p));
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, center - half_window);
        const std::ptrdiff_t hi =
            std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, center + half_window);
        std::ptrdiff_t m = lo;
        for (std::ptrdiff_t i = lo; i <= hi; ++i) {
            if (envelope[static_cast<std::size_t>(i)] > envelope[static_cast<std::size_t>(m)]) m = i;
        }
        double x = static_cast<double>(m);
        if (m > 0 && m + 1 < static_cast<std::ptrdiff_t>(n)) {
            x += detail::parabolic_offset(envelope[static_cast<std::size_t>(m - 1)],
                                          envelope[static_cast<std::size_t>(m)],
                                          envelope[static_cast<std::size_t>(m + 1)]);
        }
        peaks.push_back(Peak{std::round((p - best_phase) / period),
                             x, envelope[static_cast<std::size_t>(m)]});
    }

    std::vector<double> heights;
    for (const Peak& pk : peaks) heights.push_back(pk.height);
    std::nth_element(heights.begin(), heights.begin() + heights.size() / 2, heights.end());
    const double height_floor = 0.2 * heights[heights.size() / 2];

    // weighted least squares x ~= phi + period * k over the retained peaks
    double sw = 0.0, sk = 0.0, skk = 0.0, sx = 0.0, skx = 0.0;
    std::size_t kept = 0;
    for (const Peak& pk : peaks) {
        if (pk.height <= height_floor || pk.height <= 0.0) continue;
        const double w = pk.height;
        sw += w;
        sk += w * pk.k;
        skk += w * pk.k * pk.k;
        sx += w * pk.x;
        skx += w * pk.k * pk.x;
        ++kept;
    }
    double fit_period = period;
    double fit_phase = best_phase;
    if (kept >= 2) {
        const double denom = sw * skk - sk * sk;
        if (std::abs(denom) > 1e-12) {
            const double cand_period = (sw * skx - sk * sx) / denom;
            const double cand_phase = (sx * skk - sk * skx) / denom;
            if (cand_period > 0.8 * period && cand_period < 1.25 * period) {
                fit_period = cand_period;
                fit_phase = cand_phase;
            }
        }
    }

    std::vector<double> beats;
    for (double p = fit_phase; p <= static_cast<double>(n - 1) + 0.5; p += fit_period) {
        if (p < 0.0) continue;
        beats.push_back(p * hop_seconds);
    }
    if (beats.size() < 2) throw NoBeatError("no beat detected: fewer than two beats in range");
    return BeatGrid::from_beats(std::move(beats));
}

// One SegmentFeatures per inter-beat interval. Loudness is segment RMS in
// dBFS floored at -96; variance is the population variance of RMS over
// consecutive 10 ms frames inside the segment.
inline std::vector<SegmentFeatures> segment_features(const PcmSignal& signal, const BeatGrid& grid) {
    if (signal.sample_rate <= 0) throw Error("segment_features: signal without sample rate");
    const double fs = static_cast<double>(signal.sample_rate);
    const auto total = static_cast<std::ptrdiff_t>(signal.samples.size());
    if (!grid.beats.empty() &&
        (grid.beats.front() < -1e-9 || grid.beats.back() > signal.duration() + 1e-9)) {
        throw Error("segment_features: beats outside the signal duration");
    }

    std::vector<SegmentFeatures> out;
    out.reserve(grid.intervals.size());
    const auto frame_len = static_cast<std::ptrdiff_t>(std::max(1.0, std::round(0.01 * fs)));

    for (std::size_t i = 0; i + 1 < grid.beats.size(); ++i) {
        const auto i0 = std::clamp<std::ptrdiff_t>(std::llround(grid.beats[i] * fs), 0, total);
        const auto i1 = std::clamp<std::ptrdiff_t>(std::llround(grid.beats[i + 1] * fs), 0, total);
        if (i1 <= i0) throw Error("segment_features: empty segment (coincident beats)");

        double sumsq = 0.0;
        for (std::ptrdiff_t s = i0; s < i1; ++s) sumsq += signal.samples[s] * signal.samples[s];
        const double rms = std::sqrt(sumsq / static_cast<double>(i1 - i0));
        const double loudness =
            rms > 0.0 ? std::clamp(20.0 * std::log10(rms), -96.0, 0.0) : -96.0;

        std::vector<double> frame_rms;
        for (std::ptrdiff_t s = i0; s + frame_len <= i1; s += frame_len) {
            double fsum = 0.0;
            for (std::ptrdiff_t j = s; j < s + frame_len; ++j) {
                fsum += signal.samples[j] * signal.samples[j];
            }
            frame_rms.push_back(std::sqrt(fsum / static_cast<double>(frame_len)));
        }

        SegmentFeatures seg;
        seg.t_start = grid.beats[i];
        seg.t_end = grid.beats[i + 1];
        seg.loudness_db = loudness;
        seg.variance = frame_rms.size() >= 2 ? population_variance(frame_rms) : 0.0;
        out.push_back(seg);
    }
    return out;
}

inline FeatureSummary summarize(const std::vector<SegmentFeatures>& features) {
    if (features.empty()) throw Error("summarize: no segments");
    FeatureSummary s;
    for (const SegmentFeatures& f : features) {
        s.loudness_mean += f.loudness_db;
        s.variance_mean += f.variance;
        s.loudness_sorted.push_back(f.loudness_db);
        s.variance_sorted.push_back(f.variance);
    }
    const double n = static_cast<double>(features.size());
    s.loudness_mean /= n;
    s.variance_mean /= n;
    std::sort(s.loudness_sorted.begin(), s.loudness_sorted.end());
    std::sort(s.variance_sorted.begin(), s.variance_sorted.end());
    return s;
}

struct AudioFeatures {
    int sample_rate = 0;
    BeatGrid grid;
    std::vector<SegmentFeatures> segments;
    FeatureSummary summary;
};

// Full feature chain: onset envelope -> beat grid -> per-segment features.
// Beat times are shifted from envelope frames to where new content enters
// the analysis window, so they line up with onsets in signal time.
inline AudioFeatures analyze_features(const PcmSignal& signal, const AnalysisParams& params = {}) {
    if (signal.sample_rate <= 0) throw Error("analyze: signal without sample rate");
    const double fs = static_cast<double>(signal.sample_rate);
    const std::vector<double> envelope = onset_envelope(signal, params.frame_size, params.hop);
    const double hop_seconds = static_cast<double>(params.hop) / fs;
    const BeatGrid raw = track_beats(envelope, hop_seconds);

    const double onset_offset =
        (static_cast<double>(params.frame_size) - static_cast<double>(params.hop) / 2.0) / fs;
    std::vector<double> beats;
    for (double b : raw.beats) {
        const double t = b + onset_offset;
        if (t >= 0.0 && t <= signal.duration()) beats.push_back(t);
    }
    if (beats.size() < 2) throw NoBeatError("no beat detected: beats fall outside the clip");

    AudioFeatures out;
    out.sample_rate = signal.sample_rate;
    out.grid = BeatGrid::from_beats(std::move(beats));
    out.segments = segment_features(signal, out.grid);
    out.summary = summarize(out.segments);
    return out;
}

// ---- features.json ----
// {"sample_rate", "bpm", "beats": [s], "intervals": [s], "segments":
//   [{t_start, t_end, loudness_db, variance}], "summary": {loudness_mean,
//   variance_mean}}

inline nlohmann::ordered_json features_to_json(const AudioFeatures& f) {
    nlohmann::ordered_json doc;
    doc["sample_rate"] = f.sample_rate;
    doc["bpm"] = f.grid.bpm;
    doc["beats"] = f.grid.beats;
    doc["intervals"] = f.grid.intervals;
    nlohmann::ordered_json segments = nlohmann::ordered_json::array();
    for (const SegmentFeatures& s : f.segments) {
        segments.push_back({{"t_start", s.t_start},
                            {"t_end", s.t_end},
                            {"loudness_db", s.loudness_db},
                            {"variance", s.variance}});
    }
    doc["segments"] = std::move(segments);
    doc["summary"] = {{"loudness_mean", f.summary.loudness_mean},
                      {"variance_mean", f.summary.variance_mean}};
    return doc;
}

inline AudioFeatures features_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("beats") || !doc.contains("segments")) {
        throw Error("features file: expected {sample_rate, bpm, beats, intervals, segments, summary}");
    }
    AudioFeatures f;
    f.sample_rate = doc.at("sample_rate").get<int>();
    f.grid = BeatGrid::from_beats(doc.at("beats").get<std::vector<double>>());
    for (const auto& s : doc.at("segments")) {
        SegmentFeatures seg;
        seg.t_start = s.at("t_start").get<double>();
        seg.t_end = s.at("t_end").get<double>();
        seg.loudness_db = s.at("loudness_db").get<double>();
        seg.variance = s.at("variance").get<double>();
        f.segments.push_back(seg);
    }
    if (f.segments.size() != f.grid.intervals.size()) {
        throw Error("features file: segment count does not match beat intervals");
    }
    f.summary = summarize(f.segments);
    return f;
}

inline void save_features(const std::string& path, const AudioFeatures& f) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write features file: " + path);
    out << features_to_json(f).dump(2) << '\n';
}

inline AudioFeatures load_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open features file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("features file " + path + ": " + e.what());
    }
    return features_from_json(doc);
}

}  // namespace beatmotion::audio
