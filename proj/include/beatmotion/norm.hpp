#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "beatmotion/linalg.hpp"

namespace beatmotion::dataset {

// Per-dimension standardization statistics. Stds are floored at 1e-8 so a
// constant dimension maps to zero instead of dividing by zero.
struct NormStats {
    Vec means;
    Vec stds;

    static constexpr double kStdFloor = 1e-8;

    bool operator==(const NormStats&) const = default;

    static NormStats identity(std::size_t dims) {
        return NormStats{Vec(dims, 0.0), Vec(dims, 1.0)};
    }

    // Mean and floored population std over a set of equal-length vectors.
    static NormStats fit(const std::vector<Vec>& rows) {
        if (rows.empty()) throw Error("NormStats::fit: empty input");
        const std::size_t dims = rows.front().size();
        NormStats stats{Vec(dims, 0.0), Vec(dims, 0.0)};
        for (const Vec& row : rows) {
            require_length(row, dims, "NormStats::fit row");
            for (std::size_t d = 0; d < dims; ++d) stats.means[d] += row[d];
        }
        const double n = static_cast<double>(rows.size());
        for (std::size_t d = 0; d < dims; ++d) stats.means[d] /= n;
        for (const Vec& row : rows) {
            for (std::size_t d = 0; d < dims; ++d) {
                const double delta = row[d] - stats.means[d];
                stats.stds[d] += delta * delta;
            }
        }
        for (std::size_t d = 0; d < dims; ++d) {
            stats.stds[d] = std::max(std::sqrt(stats.stds[d] / n), kStdFloor);
        }
        return stats;
    }

    Vec apply(const Vec& x) const {
        require_length(x, means.size(), "NormStats::apply");
        Vec out(x.size());
        for (std::size_t d = 0; d < x.size(); ++d) out[d] = (x[d] - means[d]) / stds[d];
        return out;
    }

    Vec invert(const Vec& x) const {
        require_length(x, means.size(), "NormStats::invert");
        Vec out(x.size());
        for (std::size_t d = 0; d < x.size(); ++d) out[d] = x[d] * stds[d] + means[d];
        return out;
    }
};

}  // namespace beatmotion::dataset
