#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "beatmotion/errors.hpp"

namespace beatmotion {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place iterative radix-2 Cooley-Tukey. Size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& buf) {
    const std::size_t n = buf.size();
    if (n == 0 || (n & (n - 1)) != 0) throw Error("fft: size must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(buf[i], buf[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = buf[i + k];
                const std::complex<double> v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Magnitude spectrum of one real frame, zero-padded to the next power of
// two when needed. Returns fft_size/2 + 1 bins.
inline std::vector<double> magnitude_spectrum(std::span<const double> frame) {
    const std::size_t fft_size = next_pow2(frame.size());
    std::vector<std::complex<double>> buf(fft_size, {0.0, 0.0});
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = {frame[i], 0.0};
    fft_radix2(buf);
    std::vector<double> mag(fft_size / 2 + 1);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(buf[i]);
    return mag;
}

}  // namespace beatmotion
