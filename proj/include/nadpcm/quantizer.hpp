#pragma once

// Midrise uniform quantizer for the prediction residual with one-word-memory
// step adaptation: the next step is the current step times a multiplier
// indexed by the emitted code magnitude, clamped to [delta_min, delta_max].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nadpcm/errors.hpp"

namespace nadpcm {

struct QuantizerConfig {
    int bits = 4;
    std::vector<double> multipliers;  // 2^(bits-1) entries, indexed by code magnitude
    double delta_min = 1e-5;
    double delta_max = 0.5;
    double delta_init = 0.01;

    int levels() const { return 1 << bits; }

    // Speech multiplier tables in the Jayant & Noll style; configurable.
    static std::vector<double> default_multipliers(int bits) {
        switch (bits) {
            case 2: return {0.8, 1.6};
            case 3: return {0.9, 0.9, 1.25, 1.75};
            case 4: return {0.9, 0.9, 0.9, 0.9, 1.2, 1.6, 2.0, 2.4};
            case 5: return {0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9,
                            1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6};
            default: throw ConfigError("quantizer: bits must be in [2, 5]");
        }
    }

    static QuantizerConfig for_bits(int bits) {
        QuantizerConfig cfg;
        cfg.bits = bits;
        cfg.multipliers = default_multipliers(bits);
        return cfg;
    }

    void validate() const {
        if (bits < 2 || bits > 5) throw ConfigError("quantizer: bits must be in [2, 5]");
        if (multipliers.size() != static_cast<std::size_t>(1 << (bits - 1)))
            throw ConfigError("quantizer: multiplier count must be 2^(bits-1)");
        for (double m : multipliers)
            if (!(m > 0.0)) throw ConfigError("quantizer: multipliers must be positive");
        if (!(delta_min > 0.0) || !(delta_max >= delta_min))
            throw ConfigError("quantizer: need 0 < delta_min <= delta_max");
        if (!(delta_init >= delta_min) || !(delta_init <= delta_max))
            throw ConfigError("quantizer: delta_init must lie in [delta_min, delta_max]");
    }
};

struct QuantizerState {
    double delta = 0.01;
};

struct QuantResult {
    int code = 0;          // level index in [-L/2, L/2-1]
    double reconstructed = 0.0;
    QuantizerState next;
};

namespace detail {
// Magnitude rank of a midrise level index: |i + 0.5| - 0.5.
inline int code_magnitude(int code) { return code >= 0 ? code : -code - 1; }

inline double adapt_delta(double delta, int code, const QuantizerConfig& cfg) {
    const double next = delta * cfg.multipliers[static_cast<std::size_t>(code_magnitude(code))];
    return std::clamp(next, cfg.delta_min, cfg.delta_max);
}
}  // namespace detail

// Reconstruction uses the pre-adaptation step; adaptation follows.
inline QuantResult quantize(double e, const QuantizerState& state, const QuantizerConfig& cfg) {
    const int half = cfg.levels() / 2;
    // clamp in double first: e/delta can overflow int range for wild residuals
    double q = std::floor(e / state.delta);
    q = std::clamp(q, static_cast<double>(-half), static_cast<double>(half - 1));
    const int code = static_cast<int>(q);

    QuantResult res;
    res.code = code;
    res.reconstructed = (static_cast<double>(code) + 0.5) * state.delta;
    res.next.delta = detail::adapt_delta(state.delta, code, cfg);
    return res;
}

// Decoder side of the same rule; tracks the encoder state from codes alone.
inline QuantResult dequantize(int code, const QuantizerState& state, const QuantizerConfig& cfg) {
    const int half = cfg.levels() / 2;
    if (code < -half || code > half - 1) throw IoError("dequantize: code out of range");
    QuantResult res;
    res.code = code;
    res.reconstructed = (static_cast<double>(code) + 0.5) * state.delta;
    res.next.delta = detail::adapt_delta(state.delta, code, cfg);
    return res;
}

}  // namespace nadpcm
