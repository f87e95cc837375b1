#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "beatmotion/audio_types.hpp"
#include "beatmotion/errors.hpp"

namespace beatmotion::audio {

namespace detail {

inline std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

inline std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) |
           (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

inline bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
    return b[at] == static_cast<std::uint8_t>(tag[0]) && b[at + 1] == static_cast<std::uint8_t>(tag[1]) &&
           b[at + 2] == static_cast<std::uint8_t>(tag[2]) && b[at + 3] == static_cast<std::uint8_t>(tag[3]);
}

}  // namespace detail

// RIFF/WAVE decoder for PCM 16-bit and IEEE float 32-bit, mono or stereo.
// Stereo is averaged to mono; 16-bit samples are scaled by 1/32768.
inline PcmSignal decode_wav(std::span<const std::uint8_t> bytes) {
    using detail::read_u16;
    using detail::read_u32;
    using detail::tag_is;
    using Kind = WavError::Kind;

    if (bytes.size() < 12) throw WavError(Kind::MalformedHeader, "wav: file too small for a RIFF header");
    if (!tag_is(bytes, 0, "RIFF")) throw WavError(Kind::MalformedHeader, "wav: missing RIFF tag");
    if (!tag_is(bytes, 8, "WAVE")) throw WavError(Kind::MalformedHeader, "wav: missing WAVE tag");

    bool have_fmt = false;
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t block_align = 0;
    std::uint16_t bits = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size()) {
            throw WavError(Kind::TruncatedData, "wav: chunk extends past end of file");
        }

        if (tag_is(bytes, pos, "fmt ")) {
            if (chunk_size < 16) throw WavError(Kind::MalformedHeader, "wav: fmt chunk too small");
            format = read_u16(bytes, body);
            channels = read_u16(bytes, body + 2);
            sample_rate = read_u32(bytes, body + 4);
            block_align = read_u16(bytes, body + 12);
            bits = read_u16(bytes, body + 14);
            have_fmt = true;
        } else if (tag_is(bytes, pos, "data")) {
            if (!have_fmt) throw WavError(Kind::MalformedHeader, "wav: data chunk before fmt chunk");
            if (channels < 1 || channels > 2) {
                throw WavError(Kind::UnsupportedCodec,
                               "wav: unsupported channel count " + std::to_string(channels));
            }
            const bool pcm16 = format == 1 && bits == 16;
            const bool float32 = format == 3 && bits == 32;
            if (!pcm16 && !float32) {
                throw WavError(Kind::UnsupportedCodec, "wav: unsupported codec (format " +
                                                           std::to_string(format) + ", " +
                                                           std::to_string(bits) + " bits)");
            }
            if (sample_rate == 0) throw WavError(Kind::MalformedHeader, "wav: zero sample rate");
            const std::size_t frame_bytes =
                block_align != 0 ? block_align : static_cast<std::size_t>(channels) * bits / 8;
            if (frame_bytes != static_cast<std::size_t>(channels) * bits / 8) {
                throw WavError(Kind::MalformedHeader, "wav: block alignment disagrees with fmt");
            }
            if (chunk_size % frame_bytes != 0) {
                throw WavError(Kind::TruncatedData, "wav: data chunk holds a partial frame");
            }

            const std::size_t frames = chunk_size / frame_bytes;
            PcmSignal out;
            out.sample_rate = static_cast<int>(sample_rate);
            out.samples.resize(frames);
            for (std::size_t f = 0; f < frames; ++f) {
                double acc = 0.0;
                for (std::uint16_t ch = 0; ch < channels; ++ch) {
                    const std::size_t at = body + f * frame_bytes + ch * (bits / 8);
                    if (pcm16) {
                        const auto raw = static_cast<std::int16_t>(read_u16(bytes, at));
                        acc += static_cast<double>(raw) / 32768.0;
                    } else {
                        const std::uint32_t raw = read_u32(bytes, at);
                        acc += static_cast<double>(std::bit_cast<float>(raw));
                    }
                }
                double v = acc / channels;
                if (v > 1.0) v = 1.0;
                if (v < -1.0) v = -1.0;
                out.samples[f] = v;
            }
            return out;
        }

        pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }

    if (pos != bytes.size()) throw WavError(Kind::TruncatedData, "wav: trailing partial chunk header");
    throw WavError(Kind::MalformedHeader, "wav: no data chunk found");
}

inline PcmSignal load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open audio file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_wav(bytes);
}

// Minimal PCM-16 writer, used by the demo-data tool and by tests that need
// byte-level fixtures.
inline std::vector<std::uint8_t> encode_wav_pcm16(const std::vector<std::int16_t>& samples,
                                                  int sample_rate, int channels = 1) {
    std::vector<std::uint8_t> out;
    const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
    auto push_u16 = [&out](std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    };
    auto push_u32 = [&out](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    };
    auto push_tag = [&out](const char* t) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(t[i]));
    };
    push_tag("RIFF");
    push_u32(36 + data_size);
    push_tag("WAVE");
    push_tag("fmt ");
    push_u32(16);
    push_u16(1);  // PCM
    push_u16(static_cast<std::uint16_t>(channels));
    push_u32(static_cast<std::uint32_t>(sample_rate));
    push_u32(static_cast<std::uint32_t>(sample_rate * channels * 2));
    push_u16(static_cast<std::uint16_t>(channels * 2));
    push_u16(16);
    push_tag("data");
    push_u32(data_size);
    for (std::int16_t s : samples) push_u16(static_cast<std::uint16_t>(s));
    return out;
}

}  // namespace beatmotion::audio
