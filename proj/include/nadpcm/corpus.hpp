#pragma once

// Deterministic synthetic test signals standing in for a speech corpus:
// autoregressive noise, AM/FM sinusoid sums, voiced/unvoiced gated
// alternation, and a memoryless-nonlinearity AR source for nonlinear
// prediction experiments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "nadpcm/detail/rng.hpp"
#include "nadpcm/errors.hpp"
#include "nadpcm/signal.hpp"

namespace nadpcm {

enum class CorpusKind { ar, amfm, gated, tanh_ar2, mix };

inline CorpusKind parse_corpus_kind(const std::string& name) {
    if (name == "ar") return CorpusKind::ar;
    if (name == "amfm") return CorpusKind::amfm;
    if (name == "gated") return CorpusKind::gated;
    if (name == "tanh-ar2" || name == "tanh_ar2") return CorpusKind::tanh_ar2;
    if (name == "mix") return CorpusKind::mix;
    throw ConfigError("unknown corpus kind: " + name);
}

inline std::string corpus_kind_name(CorpusKind kind) {
    switch (kind) {
        case CorpusKind::ar: return "ar";
        case CorpusKind::amfm: return "amfm";
        case CorpusKind::gated: return "gated";
        case CorpusKind::tanh_ar2: return "tanh-ar2";
        case CorpusKind::mix: return "mix";
    }
    return "?";
}

namespace detail {

inline void normalize_peak(std::vector<double>& x, double peak) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    if (m <= 0.0) return;
    const double g = peak / m;
    for (double& v : x) v *= g;
}

// Prediction-form coefficients of a cascade of two-pole resonators:
// x[n] = sum a_i x[n-i] + input.
inline std::vector<double> resonator_coeffs(const std::vector<std::pair<double, double>>& poles) {
    std::vector<double> poly{1.0};  // A(z) coefficients
    for (auto [radius, theta] : poles) {
        const std::vector<double> factor{1.0, -2.0 * radius * std::cos(theta), radius * radius};
        std::vector<double> next(poly.size() + 2, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i)
            for (std::size_t j = 0; j < 3; ++j) next[i + j] += poly[i] * factor[j];
        poly = std::move(next);
    }
    std::vector<double> a(poly.size() - 1);
    for (std::size_t i = 1; i < poly.size(); ++i) a[i - 1] = -poly[i];
    return a;
}

inline double step_ar(std::vector<double>& state, const std::vector<double>& a, double input) {
    if (a.empty()) return input;
    double y = input;
    for (std::size_t i = 0; i < a.size(); ++i) y += a[i] * state[i];
    for (std::size_t i = a.size() - 1; i > 0; --i) state[i] = state[i - 1];
    state[0] = y;
    return y;
}

}  // namespace detail

// Stationary AR(4) with two random resonances.
inline SampleBuffer gen_ar(std::uint32_t seed, std::size_t length, int sample_rate_hz = 8000) {
    detail::Rng rng(seed, 0xA5u);
    const double nyq = sample_rate_hz / 2.0;
    const auto a = detail::resonator_coeffs({
        {rng.uniform(0.92, 0.96), std::numbers::pi * rng.uniform(300.0, 900.0) / nyq},
        {rng.uniform(0.90, 0.95), std::numbers::pi * rng.uniform(1200.0, 2600.0) / nyq},
    });
    std::vector<double> state(a.size(), 0.0);
    std::vector<double> x(length);
    for (auto& v : x) v = detail::step_ar(state, a, 0.1 * rng.gauss());
    detail::normalize_peak(x, 0.85);
    return {std::move(x), sample_rate_hz};
}

// Sum of three AM/FM modulated sinusoids plus light noise; nonstationary on
// the scale of tens of milliseconds.
inline SampleBuffer gen_amfm(std::uint32_t seed, std::size_t length, int sample_rate_hz = 8000) {
    detail::Rng rng(seed, 0xB6u);
    struct Tone {
        double freq, am_rate, am_phase, fm_rate, fm_depth, phase, level;
    };
    std::vector<Tone> tones;
    for (int k = 0; k < 3; ++k) {
        tones.push_back({rng.uniform(200.0, 2400.0), rng.uniform(0.8, 4.0), rng.uniform(0.0, 6.28),
                         rng.uniform(0.3, 2.0), rng.uniform(0.05, 0.18), rng.uniform(0.0, 6.28),
                         rng.uniform(0.4, 1.0)});
    }
    const double dt = 1.0 / sample_rate_hz;
    std::vector<double> x(length, 0.0);
    std::vector<double> carrier_phase(tones.size(), 0.0);
    for (std::size_t i = 0; i < tones.size(); ++i) carrier_phase[i] = tones[i].phase;
    for (std::size_t n = 0; n < length; ++n) {
        const double t = static_cast<double>(n) * dt;
        double v = 0.0;
        for (std::size_t k = 0; k < tones.size(); ++k) {
            Tone& tone = tones[k];
            const double am = 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * tone.am_rate * t + tone.am_phase);
            const double inst_freq =
                tone.freq * (1.0 + tone.fm_depth * std::sin(2.0 * std::numbers::pi * tone.fm_rate * t));
            carrier_phase[k] += 2.0 * std::numbers::pi * inst_freq * dt;
            v += tone.level * am * std::sin(carrier_phase[k]);
        }
        x[n] = v + 0.01 * rng.gauss();
    }
    detail::normalize_peak(x, 0.85);
    return {std::move(x), sample_rate_hz};
}

// Speech-like alternation of voiced stretches (pitch-pulse-driven resonator)
// and weaker unvoiced noise bursts, with raised-cosine joins.
inline SampleBuffer gen_gated(std::uint32_t seed, std::size_t length, int sample_rate_hz = 8000) {
    detail::Rng rng(seed, 0xC7u);
    const double nyq = sample_rate_hz / 2.0;
    std::vector<double> x(length, 0.0);
    std::size_t n = 0;
    bool voiced = rng.uniform() < 0.6;
    while (n < length) {
        const std::size_t seg = static_cast<std::size_t>(rng.uniform(300.0, 900.0));
        const std::size_t end = std::min(length, n + seg);
        if (voiced) {
            const auto a = detail::resonator_coeffs({
                {rng.uniform(0.94, 0.975), std::numbers::pi * rng.uniform(250.0, 800.0) / nyq},
                {rng.uniform(0.92, 0.96), std::numbers::pi * rng.uniform(1000.0, 2400.0) / nyq},
            });
            std::vector<double> state(a.size(), 0.0);
            const auto pitch_period = static_cast<std::size_t>(sample_rate_hz / rng.uniform(70.0, 240.0));
            std::size_t since_pulse = pitch_period;  // pulse at segment start
            for (std::size_t i = n; i < end; ++i) {
                double in = 0.02 * rng.gauss();
                if (since_pulse >= pitch_period) {
                    in += 1.0;
                    since_pulse = 0;
                }
                ++since_pulse;
                x[i] = detail::step_ar(state, a, in);
            }
        } else {
            const auto a = detail::resonator_coeffs({{rng.uniform(0.3, 0.6),
                                                      std::numbers::pi * rng.uniform(1500.0, 3200.0) / nyq}});
            std::vector<double> state(a.size(), 0.0);
            for (std::size_t i = n; i < end; ++i) x[i] = 0.35 * detail::step_ar(state, a, rng.gauss());
        }
        // raised-cosine ramp at the join
        const std::size_t ramp = std::min<std::size_t>(40, end - n);
        for (std::size_t i = 0; i < ramp; ++i)
            x[n + i] *= 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(ramp));
        voiced = !voiced;
        n = end;
    }
    detail::normalize_peak(x, 0.85);
    return {std::move(x), sample_rate_hz};
}

// Memoryless nonlinearity over a strongly resonant AR(2):
// x = tanh(drive * y) with y normalized to unit RMS. The default drive bends
// the waveform well short of saturation, which is where a small perceptron
// clearly out-predicts an order-10 linear fit.
inline SampleBuffer gen_tanh_ar2(std::uint32_t seed, std::size_t length, int sample_rate_hz = 8000,
                                 double drive = 2.0) {
    detail::Rng rng(seed, 0xD8u);
    const double nyq = sample_rate_hz / 2.0;
    const auto a = detail::resonator_coeffs({
        {rng.uniform(0.96, 0.985), std::numbers::pi * rng.uniform(200.0, 600.0) / nyq},
    });
    std::vector<double> state(a.size(), 0.0);
    std::vector<double> y(length);
    for (auto& v : y) v = detail::step_ar(state, a, rng.gauss());
    double rms = 0.0;
    for (double v : y) rms += v * v;
    rms = std::sqrt(rms / static_cast<double>(length));
    std::vector<double> x(length);
    for (std::size_t i = 0; i < length; ++i) x[i] = std::tanh(drive * y[i] / rms);
    detail::normalize_peak(x, 0.85);
    return {std::move(x), sample_rate_hz};
}

inline SampleBuffer generate_signal(CorpusKind kind, std::uint32_t seed, std::size_t length,
                                    int sample_rate_hz = 8000) {
    if (length == 0) throw ConfigError("generate_signal: length must be positive");
    switch (kind) {
        case CorpusKind::ar: return gen_ar(seed, length, sample_rate_hz);
        case CorpusKind::amfm: return gen_amfm(seed, length, sample_rate_hz);
        case CorpusKind::gated: return gen_gated(seed, length, sample_rate_hz);
        case CorpusKind::tanh_ar2: return gen_tanh_ar2(seed, length, sample_rate_hz);
        case CorpusKind::mix: {
            constexpr CorpusKind cycle[] = {CorpusKind::gated, CorpusKind::amfm, CorpusKind::ar,
                                            CorpusKind::tanh_ar2};
            return generate_signal(cycle[seed % 4], seed, length, sample_rate_hz);
        }
    }
    throw ConfigError("generate_signal: bad kind");
}

}  // namespace nadpcm
