#pragma once

// Minimal dense routines for the small systems this library solves
// (normal equations of a 25-parameter network). Row-major storage.

#include <cmath>
#include <cstddef>
#include <vector>

namespace nadpcm::detail {

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// B = AᵀA for tall A (rows >= cols).
inline Mat gram(const Mat& a) {
    Mat g(a.cols, a.cols);
    for (std::size_t r = 0; r < a.rows; ++r) {
        const double* row = &a.data[r * a.cols];
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double ri = row[i];
            if (ri == 0.0) continue;
            for (std::size_t j = i; j < a.cols; ++j) g(i, j) += ri * row[j];
        }
    }
    for (std::size_t i = 0; i < a.cols; ++i)
        for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
    return g;
}

// y = Aᵀv.
inline std::vector<double> mul_at(const Mat& a, const std::vector<double>& v) {
    std::vector<double> y(a.cols, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        const double* row = &a.data[r * a.cols];
        const double vr = v[r];
        for (std::size_t c = 0; c < a.cols; ++c) y[c] += row[c] * vr;
    }
    return y;
}

// Solves (A)x = b in place via Cholesky for symmetric positive definite A.
// A and b are destroyed. Returns false on a non-positive or non-finite pivot.
inline bool cholesky_solve(Mat& a, std::vector<double>& b) {
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double l = std::sqrt(d);
        a(j, j) = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / l;
        }
    }
    // forward substitution L y = b
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
        b[i] = s / a(i, i);
    }
    // back substitution Lᵀ x = y
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a(k, ii) * b[k];
        b[ii] = s / a(ii, ii);
    }
    return true;
}

}  // namespace nadpcm::detail
