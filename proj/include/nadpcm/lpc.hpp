#pragma once

// Linear prediction by the autocorrelation method: biased autocorrelation
// estimate, Levinson-Durbin recursion, and the all-pole one-step predictor
// x^[n] = sum_i a[i] x[n-i].

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "nadpcm/errors.hpp"

namespace nadpcm {

struct LinearCoeffs {
    std::vector<double> a;  // a[0] applies to lag 1
    int order() const { return static_cast<int>(a.size()); }

    static LinearCoeffs zero(int order) { return LinearCoeffs{std::vector<double>(order, 0.0)}; }
};

// Full recursion output; error_energy[i] is the prediction-error energy of
// the order-i predictor, non-increasing in i.
struct LevinsonResult {
    LinearCoeffs coeffs;
    std::vector<double> reflection;     // k_1 .. k_p (zero past truncation)
    std::vector<double> error_energy;   // E_0 .. E_p
    int effective_order = 0;            // stage at which the recursion stopped
};

// Biased estimator, no lag window: r[k] = sum_{n=k}^{N-1} w[n] w[n-k].
inline std::vector<double> autocorrelation(std::span<const double> window, int order) {
    if (order < 1) throw ConfigError("autocorrelation: order must be >= 1");
    if (window.size() <= static_cast<std::size_t>(order))
        throw ConfigError("autocorrelation: window shorter than order+1");
    std::vector<double> r(static_cast<std::size_t>(order) + 1, 0.0);
    const std::size_t n = window.size();
    for (int k = 0; k <= order; ++k) {
        double acc = 0.0;
        for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i)
            acc += window[i] * window[i - static_cast<std::size_t>(k)];
        r[static_cast<std::size_t>(k)] = acc;
    }
    return r;
}

inline void apply_hamming(std::span<double> window) {
    const std::size_t n = window.size();
    if (n < 2) return;
    for (std::size_t i = 0; i < n; ++i)
        window[i] *= 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                            static_cast<double>(n - 1));
}

// Levinson-Durbin on the Toeplitz normal equations. If the error energy hits
// zero or a reflection coefficient leaves (-1, 1), the recursion stops and
// the remaining coefficients stay zero (order truncation).
inline LevinsonResult levinson_durbin_full(std::span<const double> r, int order) {
    if (order < 1) throw ConfigError("levinson_durbin: order must be >= 1");
    if (r.size() < static_cast<std::size_t>(order) + 1)
        throw ConfigError("levinson_durbin: need order+1 autocorrelation lags");
    if (!(r[0] > 0.0)) throw NumericalError("levinson_durbin: r[0] <= 0 (degenerate window)");

    LevinsonResult res;
    res.coeffs.a.assign(static_cast<std::size_t>(order), 0.0);
    res.reflection.assign(static_cast<std::size_t>(order), 0.0);
    res.error_energy.assign(static_cast<std::size_t>(order) + 1, 0.0);
    res.error_energy[0] = r[0];

    std::vector<double>& a = res.coeffs.a;
    std::vector<double> prev(a.size(), 0.0);
    double energy = r[0];

    for (int i = 1; i <= order; ++i) {
        double acc = r[static_cast<std::size_t>(i)];
        for (int j = 1; j < i; ++j) acc -= a[static_cast<std::size_t>(j - 1)] * r[static_cast<std::size_t>(i - j)];
        const double k = acc / energy;
        if (!std::isfinite(k) || std::abs(k) >= 1.0) break;

        res.reflection[static_cast<std::size_t>(i - 1)] = k;
        prev = a;
        a[static_cast<std::size_t>(i - 1)] = k;
        for (int j = 1; j < i; ++j)
            a[static_cast<std::size_t>(j - 1)] = prev[static_cast<std::size_t>(j - 1)] - k * prev[static_cast<std::size_t>(i - j - 1)];

        energy *= 1.0 - k * k;
        res.error_energy[static_cast<std::size_t>(i)] = energy;
        res.effective_order = i;
        if (!(energy > 0.0)) break;
    }
    // stages never reached keep the energy of the last valid stage
    for (int i = res.effective_order + 1; i <= order; ++i)
        res.error_energy[static_cast<std::size_t>(i)] = res.error_energy[static_cast<std::size_t>(res.effective_order)];
    return res;
}

inline LinearCoeffs levinson_durbin(std::span<const double> r, int order) {
    return levinson_durbin_full(r, order).coeffs;
}

// Prediction from the last `order` samples of history (most recent last).
inline double lpc_predict(std::span<const double> history, const LinearCoeffs& coeffs) {
    const std::size_t p = coeffs.a.size();
    if (history.size() < p) throw ConfigError("lpc_predict: insufficient history");
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) acc += coeffs.a[i] * history[history.size() - 1 - i];
    return acc;
}

// Autocorrelation fit over an analysis window; silent or degenerate windows
// map to the zero predictor so the codec keeps running through silence.
inline LinearCoeffs fit_lpc(std::span<const double> window, int order, bool hamming = false) {
    if (window.size() <= static_cast<std::size_t>(order)) return LinearCoeffs::zero(order);
    std::vector<double> r;
    if (hamming) {
        std::vector<double> tapered(window.begin(), window.end());
        apply_hamming(tapered);
        r = autocorrelation(tapered, order);
    } else {
        r = autocorrelation(window, order);
    }
    if (!(r[0] > 0.0)) return LinearCoeffs::zero(order);
    return levinson_durbin(r, order);
}

}  // namespace nadpcm
