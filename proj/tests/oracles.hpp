#pragma once

// Test-only reference implementations, deliberately independent of the
// library's code paths.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "nadpcm/mlp.hpp"

namespace oracles {

// Central finite differences of the network output over the flat parameter
// vector.
inline std::vector<double> fd_jacobian_row(const nadpcm::MlpWeights& w, std::span<const double> input,
                                           double h) {
    auto theta = w.pack();
    std::vector<double> row(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        auto plus = theta, minus = theta;
        plus[i] += h;
        minus[i] -= h;
        const double fp = nadpcm::mlp_forward(nadpcm::MlpWeights::unpack(plus, w.n_in, w.n_hidden), input);
        const double fm = nadpcm::mlp_forward(nadpcm::MlpWeights::unpack(minus, w.n_in, w.n_hidden), input);
        row[i] = (fp - fm) / (2.0 * h);
    }
    return row;
}

// Direct double loop, no recursion tricks.
inline std::vector<double> autocorr_bruteforce(const std::vector<double>& w, int order) {
    std::vector<double> r(static_cast<std::size_t>(order) + 1, 0.0);
    for (int k = 0; k <= order; ++k)
        for (std::size_t n = static_cast<std::size_t>(k); n < w.size(); ++n)
            r[static_cast<std::size_t>(k)] += w[n] * w[n - static_cast<std::size_t>(k)];
    return r;
}

// Gaussian elimination with partial pivoting on the dense system A x = b.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (a[pivot][col] == 0.0) throw std::runtime_error("singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a[ii][k] * x[k];
        x[ii] = s / a[ii][ii];
    }
    return x;
}

// Solves the Toeplitz normal equations R a = r directly.
inline std::vector<double> lpc_normal_equations(const std::vector<double>& r, int order) {
    std::vector<std::vector<double>> big(static_cast<std::size_t>(order),
                                         std::vector<double>(static_cast<std::size_t>(order)));
    std::vector<double> rhs(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        rhs[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i) + 1];
        for (int j = 0; j < order; ++j)
            big[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                r[static_cast<std::size_t>(std::abs(i - j))];
    }
    return solve_dense(std::move(big), std::move(rhs));
}

}  // namespace oracles
