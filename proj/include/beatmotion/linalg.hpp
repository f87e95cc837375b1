#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "beatmotion/errors.hpp"

namespace beatmotion {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Small and dumb on purpose; the largest
// things stored here are 64x20 weight blocks.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool operator==(const Matrix&) const = default;
};

inline bool all_finite(const Vec& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline bool all_finite(const Matrix& m) { return all_finite(m.data); }

inline void require_length(const Vec& v, std::size_t expected, const char* what) {
    if (v.size() != expected) {
        std::ostringstream os;
        os << what << ": expected length " << expected << ", got " << v.size();
        throw DimensionError(os.str());
    }
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// y = M x
inline Vec matvec(const Matrix& m, const Vec& x) {
    Vec y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double s = 0.0;
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

// y = M^T x
inline Vec matvec_transposed(const Matrix& m, const Vec& x) {
    Vec y(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) y[c] += row[c] * x[r];
    }
    return y;
}

// A += u v^T
inline void add_outer(Matrix& a, const Vec& u, const Vec& v) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        double* row = a.data.data() + r * a.cols;
        for (std::size_t c = 0; c < a.cols; ++c) row[c] += u[r] * v[c];
    }
}

inline void add_scaled(Vec& y, const Vec& x, double s = 1.0) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

inline double mean(const Vec& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Population variance (divides by n).
inline double population_variance(const Vec& v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

}  // namespace beatmotion
