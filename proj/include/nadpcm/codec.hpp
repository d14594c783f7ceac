#pragma once

// ADPCM encoder/decoder with switchable linear (all-pole) and neural (MLP)
// predictors, forward or backward coefficient adaptation, block- or
// sample-adaptive refits, and a per-frame linear/nonlinear hybrid switch.
//
// The defining contract is encoder/decoder synchrony: the decoder rebuilds
// the encoder's local reconstruction bit-exactly. In backward mode both
// sides fit coefficients from the reconstructed signal only, and all
// stochastic choices derive from config.rng_seed, so the decoder retrains
// the same networks the encoder did.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "nadpcm/detail/rng.hpp"
#include "nadpcm/errors.hpp"
#include "nadpcm/lpc.hpp"
#include "nadpcm/mlp.hpp"
#include "nadpcm/quantizer.hpp"
#include "nadpcm/signal.hpp"

namespace nadpcm {

enum class Predictor : std::uint8_t { lpc = 0, mlp = 1, hybrid = 2 };
enum class Adaptation : std::uint8_t { forward = 0, backward = 1 };

struct MlpTrainParams {
    int inputs = 10;
    int hidden = 2;
    int n_random = 3;
    int epochs_random = 6;
    int epochs_prev = 3;
    bool use_prev = true;
    bool closed_loop_eval = false;  // rank candidates by quantized in-loop error
    double init_range = 0.2;
    Activation activation = Activation::tanh_fn;
    TrainConfig lm{};  // epochs field is set per candidate
};

struct CodecConfig {
    Predictor predictor = Predictor::lpc;
    Adaptation adaptation = Adaptation::backward;
    int lpc_order = 10;
    bool lpc_hamming = false;
    int frame_len = 100;        // hybrid switch and reporting granularity
    int training_window = 100;  // samples used to fit coefficients
    int computing_window = 100; // samples between refits; 1 = sample-adaptive
    QuantizerConfig quantizer = QuantizerConfig::for_bits(4);
    MlpTrainParams mlp_train{};
    std::uint32_t rng_seed = 1;
    bool hybrid_open_loop = false;  // decide branches on pre-quantization error
    std::uint32_t refit_cap = 0;    // encode refuses configs above this many refits (0 = off)

    bool uses_lpc() const { return predictor != Predictor::mlp; }
    bool uses_mlp() const { return predictor != Predictor::lpc; }

    void validate() const {
        if (frame_len < 1) throw ConfigError("codec: frame_len must be positive");
        if (training_window < 1) throw ConfigError("codec: training_window must be positive");
        if (computing_window < 1) throw ConfigError("codec: computing_window must be positive");
        quantizer.validate();
        if (lpc_order < 1) throw ConfigError("codec: lpc_order must be >= 1");
        if (mlp_train.inputs < 1 || mlp_train.hidden < 1)
            throw ConfigError("codec: mlp topology fields must be >= 1");
        if (mlp_train.n_random < 0) throw ConfigError("codec: n_random must be >= 0");
        if (mlp_train.epochs_random < 0 || mlp_train.epochs_prev < 0)
            throw ConfigError("codec: training epochs must be >= 0");
        if (!(mlp_train.init_range > 0.0)) throw ConfigError("codec: init_range must be positive");
        if (uses_mlp() && mlp_train.n_random == 0 && !mlp_train.use_prev)
            throw ConfigError("codec: mlp needs n_random >= 1 or use_prev");
        if (training_window < 11) throw ConfigError("codec: training_window must be >= 11");
        if (uses_lpc() && training_window < lpc_order + 1)
            throw ConfigError("codec: training_window must exceed lpc_order");
        if (uses_mlp() && training_window < mlp_train.inputs + 1)
            throw ConfigError("codec: training_window must exceed mlp inputs");
        if (predictor == Predictor::hybrid) {
            if (adaptation != Adaptation::backward)
                throw ConfigError("codec: hybrid requires backward adaptation");
            if (training_window != frame_len || computing_window != frame_len)
                throw ConfigError("codec: hybrid requires training_window = computing_window = frame_len");
        }
        if (adaptation == Adaptation::forward) {
            const int min_fit = uses_mlp() ? mlp_train.inputs + 1 : lpc_order + 1;
            if (computing_window < min_fit)
                throw ConfigError("codec: forward adaptation needs computing_window >= minimum fit length");
        }
    }
};

// Everything needed to decode bit-exactly. Codes are one midrise level index
// per sample; hybrid_bits carry the per-frame switch (0 = linear,
// 1 = nonlinear); forward_payload carries the unquantized coefficients used
// from each refit instant on.
struct EncodedStream {
    CodecConfig config_echo;
    int sample_rate_hz = 8000;
    std::vector<std::int8_t> codes;
    std::vector<std::uint8_t> hybrid_bits;
    std::vector<std::vector<double>> forward_payload;

    std::size_t sample_count() const { return codes.size(); }
};

struct FrameStats {
    std::size_t start = 0;
    int length = 0;
    Predictor predictor_used = Predictor::lpc;
    double prediction_gain_db = 0.0;  // open-loop residual gain
    double frame_snr_db = 0.0;        // closed-loop, clamped like segsnr
    double delta_end = 0.0;
    int mlp_refits = 0;
    int mlp_prev_selected = 0;
    int mlp_failures = 0;
    int hybrid_bit = -1;  // -1 outside hybrid mode
    double linear_branch_error = std::numeric_limits<double>::quiet_NaN();
    double nonlinear_branch_error = std::numeric_limits<double>::quiet_NaN();
};

struct EncodeStats {
    std::vector<FrameStats> frames;
    std::size_t mlp_refits = 0;
    std::size_t mlp_prev_selected = 0;
    std::size_t mlp_failures = 0;

    double selected_prev_fraction() const {
        return mlp_refits == 0 ? 0.0
                               : static_cast<double>(mlp_prev_selected) / static_cast<double>(mlp_refits);
    }
    double nonlinear_selection_fraction() const {
        std::size_t frames_with_bit = 0, ones = 0;
        for (const auto& f : frames)
            if (f.hybrid_bit >= 0) {
                ++frames_with_bit;
                ones += static_cast<std::size_t>(f.hybrid_bit);
            }
        return frames_with_bit == 0 ? 0.0 : static_cast<double>(ones) / static_cast<double>(frames_with_bit);
    }
};

struct EncodeResult {
    EncodedStream stream;
    SampleBuffer reconstruction;  // the encoder's own decoded signal
    EncodeStats stats;
};

namespace detail {

inline double history_sample(const std::vector<double>& recon, std::ptrdiff_t idx) {
    return idx >= 0 ? recon[static_cast<std::size_t>(idx)] : 0.0;  // zero-padded stream start
}

inline double predict_linear(const std::vector<double>& recon, std::size_t n, const LinearCoeffs& c) {
    double acc = 0.0;
    const auto base = static_cast<std::ptrdiff_t>(n) - 1;
    for (std::size_t i = 0; i < c.a.size(); ++i)
        acc += c.a[i] * history_sample(recon, base - static_cast<std::ptrdiff_t>(i));
    return acc;
}

inline double predict_net(const std::vector<double>& recon, std::size_t n, const MlpWeights& w,
                          Activation act, std::vector<double>& scratch) {
    scratch.resize(static_cast<std::size_t>(w.n_in));
    const auto start = static_cast<std::ptrdiff_t>(n) - w.n_in;
    for (int i = 0; i < w.n_in; ++i)
        scratch[static_cast<std::size_t>(i)] = history_sample(recon, start + i);
    return mlp_forward(w, scratch, act);
}

// Last `len` samples before `end`, zero-padded on the left.
inline std::vector<double> tail_window(const std::vector<double>& recon, std::size_t end, std::size_t len) {
    std::vector<double> w(len);
    const auto start = static_cast<std::ptrdiff_t>(end) - static_cast<std::ptrdiff_t>(len);
    for (std::size_t j = 0; j < len; ++j)
        w[j] = history_sample(recon, start + static_cast<std::ptrdiff_t>(j));
    return w;
}

// Quantized prediction loop over a window: the closed-loop candidate score.
inline double closed_loop_sse(const MlpWeights& w, std::span<const double> window, Activation act,
                              const QuantizerConfig& qcfg, double delta0) {
    const int d = w.n_in;
    std::vector<double> loop(window.begin(), window.begin() + d);
    QuantizerState q{delta0};
    std::vector<double> scratch;
    double sse = 0.0;
    for (std::size_t n = static_cast<std::size_t>(d); n < window.size(); ++n) {
        const double xh = predict_net(loop, loop.size(), w, act, scratch);
        const QuantResult qr = quantize(window[n] - xh, q, qcfg);
        const double rec = xh + qr.reconstructed;
        const double err = window[n] - rec;
        sse += err * err;
        loop.push_back(rec);
        q = qr.next;
    }
    return sse;
}

inline double gain_db(double signal_energy, double error_energy) {
    if (signal_energy <= 0.0) return 0.0;  // silent frame: no gain to report
    return segment_snr_db(signal_energy, error_energy);
}

// Shared encoder/decoder state machine. The decoder runs the identical refit
// schedule on its own reconstruction, which is why the two stay in lockstep.
class Engine {
  public:
    Engine(const CodecConfig& cfg, int sample_rate) : cfg_(cfg), rate_(sample_rate) {
        cfg_.validate();
        lin_ = LinearCoeffs::zero(cfg_.lpc_order);
        net_ = MlpWeights::zero(cfg_.mlp_train.inputs, cfg_.mlp_train.hidden);
        q_.delta = cfg_.quantizer.delta_init;
    }

    EncodeResult encode(std::span<const double> x) {
        if (x.empty()) throw ConfigError("encode: empty signal");
        check_refit_cap(x.size());
        recon_.reserve(x.size());
        if (cfg_.predictor == Predictor::hybrid)
            run_hybrid(x, nullptr);
        else
            run_plain(x, nullptr);

        EncodeResult res;
        res.stream.config_echo = cfg_;
        res.stream.sample_rate_hz = rate_;
        res.stream.codes = std::move(codes_);
        res.stream.hybrid_bits = std::move(hybrid_bits_);
        res.stream.forward_payload = std::move(payload_);
        res.reconstruction.samples = std::move(recon_);
        res.reconstruction.sample_rate_hz = rate_;
        res.stats = std::move(stats_);
        return res;
    }

    SampleBuffer decode(const EncodedStream& stream) {
        if (stream.codes.empty()) throw IoError("decode: zero-length stream");
        validate_stream_shape(stream);
        recon_.reserve(stream.codes.size());
        if (cfg_.predictor == Predictor::hybrid)
            run_hybrid({}, &stream);
        else
            run_plain({}, &stream);
        SampleBuffer out;
        out.samples = std::move(recon_);
        out.sample_rate_hz = rate_;
        return out;
    }

  private:
    // --- refitting -----------------------------------------------------

    struct NetRefit {
        bool selected_prev = false;
        bool failed = false;
    };

    NetRefit refit_net_on(std::span<const double> window, std::uint32_t salt) {
        MultistartConfig mc;
        mc.n_random = cfg_.mlp_train.n_random;
        mc.epochs_random = cfg_.mlp_train.epochs_random;
        mc.epochs_prev = cfg_.mlp_train.epochs_prev;
        mc.init_range = cfg_.mlp_train.init_range;
        mc.n_hidden = cfg_.mlp_train.hidden;
        mc.rng_seed = mix_seed(cfg_.rng_seed, salt);
        mc.lm = cfg_.mlp_train.lm;
        mc.activation = cfg_.mlp_train.activation;

        const TrainingSet set = make_training_set(window, cfg_.mlp_train.inputs);
        std::optional<MlpWeights> prev;
        if (cfg_.mlp_train.use_prev) prev = net_;

        MlpEvaluator closed;
        const MlpEvaluator* eval = nullptr;
        if (cfg_.mlp_train.closed_loop_eval) {
            const double delta0 = q_.delta;
            const QuantizerConfig& qcfg = cfg_.quantizer;
            const Activation act = cfg_.mlp_train.activation;
            std::vector<double> owned(window.begin(), window.end());
            closed = [owned = std::move(owned), act, &qcfg, delta0](const MlpWeights& w) {
                return closed_loop_sse(w, owned, act, qcfg, delta0);
            };
            eval = &closed;
        }

        NetRefit out;
        try {
            MultistartResult r = multistart_train(prev, set, set, mc, eval);
            net_ = std::move(r.weights);
            out.selected_prev = r.selected_prev;
        } catch (const NumericalError&) {
            net_ = MlpWeights::zero(cfg_.mlp_train.inputs, cfg_.mlp_train.hidden);  // zero predictor fallback
            out.failed = true;
        }
        return out;
    }

    void note_net_refit(const NetRefit& r, FrameStats& frame) {
        ++frame.mlp_refits;
        ++stats_.mlp_refits;
        if (r.selected_prev) {
            ++frame.mlp_prev_selected;
            ++stats_.mlp_prev_selected;
        }
        if (r.failed) {
            ++frame.mlp_failures;
            ++stats_.mlp_failures;
        }
    }

    void backward_refit(std::size_t n, std::uint32_t salt, FrameStats& frame) {
        const auto window = tail_window(recon_, n, static_cast<std::size_t>(cfg_.training_window));
        if (cfg_.uses_lpc()) lin_ = fit_lpc(window, cfg_.lpc_order, cfg_.lpc_hamming);
        if (cfg_.uses_mlp()) note_net_refit(refit_net_on(window, salt), frame);
    }

    std::vector<double> active_coeffs() const {
        return cfg_.predictor == Predictor::lpc ? lin_.a : net_.pack();
    }

    void load_active_coeffs(const std::vector<double>& flat) {
        if (cfg_.predictor == Predictor::lpc) {
            if (flat.size() != static_cast<std::size_t>(cfg_.lpc_order))
                throw IoError("decode: forward payload size does not match lpc order");
            lin_.a = flat;
        } else {
            net_ = MlpWeights::unpack(flat, cfg_.mlp_train.inputs, cfg_.mlp_train.hidden);
        }
    }

    // Forward mode fits on the original samples the coefficients will encode;
    // a tail chunk too short to fit keeps the previous coefficients. Every
    // refit instant appends the coefficients in force to the payload.
    void forward_refit(std::span<const double> x, std::size_t n, std::uint32_t salt, FrameStats& frame) {
        const std::size_t len = std::min(static_cast<std::size_t>(cfg_.computing_window), x.size() - n);
        const auto window = x.subspan(n, len);
        if (cfg_.predictor == Predictor::lpc) {
            if (len > static_cast<std::size_t>(cfg_.lpc_order))
                lin_ = fit_lpc(window, cfg_.lpc_order, cfg_.lpc_hamming);
        } else {
            if (len >= static_cast<std::size_t>(cfg_.mlp_train.inputs) + 1)
                note_net_refit(refit_net_on(window, salt), frame);
        }
        payload_.push_back(active_coeffs());
    }

    // --- plain (non-hybrid) loop ---------------------------------------

    void run_plain(std::span<const double> x, const EncodedStream* in) {
        const std::size_t n_total = in ? in->codes.size() : x.size();
        const auto cw = static_cast<std::size_t>(cfg_.computing_window);
        std::vector<double> scratch;
        FrameStats frame = new_frame(0);
        double sum_x2 = 0.0, sum_e2 = 0.0, sum_d2 = 0.0;
        std::size_t payload_next = 0;

        for (std::size_t n = 0; n < n_total; ++n) {
            if (n % cw == 0) {
                const auto salt = static_cast<std::uint32_t>(n / cw);
                if (cfg_.adaptation == Adaptation::forward) {
                    if (in)
                        load_active_coeffs(in->forward_payload[payload_next++]);
                    else
                        forward_refit(x, n, salt, frame);
                } else if (n > 0) {
                    backward_refit(n, salt, frame);
                }
            }

            const double xh = cfg_.predictor == Predictor::lpc
                                  ? predict_linear(recon_, n, lin_)
                                  : predict_net(recon_, n, net_, cfg_.mlp_train.activation, scratch);
            QuantResult qr;
            if (in) {
                qr = dequantize(in->codes[n], q_, cfg_.quantizer);
            } else {
                qr = quantize(x[n] - xh, q_, cfg_.quantizer);
                codes_.push_back(static_cast<std::int8_t>(qr.code));
            }
            const double rec = xh + qr.reconstructed;
            recon_.push_back(rec);
            q_ = qr.next;

            if (!in) {
                const double e = x[n] - xh;
                const double d = x[n] - rec;
                sum_x2 += x[n] * x[n];
                sum_e2 += e * e;
                sum_d2 += d * d;
                ++frame.length;
                if ((n + 1) % static_cast<std::size_t>(cfg_.frame_len) == 0 || n + 1 == n_total) {
                    finish_frame(frame, sum_x2, sum_e2, sum_d2, cfg_.predictor);
                    sum_x2 = sum_e2 = sum_d2 = 0.0;
                    frame = new_frame(n + 1);
                }
            }
        }
    }

    // --- hybrid loop ----------------------------------------------------

    struct BranchRun {
        std::vector<double> recon;
        QuantizerState q;
        std::vector<std::int8_t> codes;
        double err = 0.0;     // decision metric
        double sum_e2 = 0.0;  // open-loop residual energy
        double sum_d2 = 0.0;  // reconstruction error energy
    };

    BranchRun run_branch(bool nonlinear, std::span<const double> x, std::size_t start, std::size_t len,
                         std::vector<double>& scratch) const {
        BranchRun b;
        b.recon = recon_;  // identical entry state for both branches
        b.q = q_;
        b.codes.reserve(len);
        for (std::size_t i = 0; i < len; ++i) {
            const std::size_t n = start + i;
            const double xh = nonlinear
                                  ? predict_net(b.recon, n, net_, cfg_.mlp_train.activation, scratch)
                                  : predict_linear(b.recon, n, lin_);
            const double e = x[n] - xh;
            const QuantResult qr = quantize(e, b.q, cfg_.quantizer);
            const double rec = xh + qr.reconstructed;
            const double d = x[n] - rec;
            b.codes.push_back(static_cast<std::int8_t>(qr.code));
            b.recon.push_back(rec);
            b.q = qr.next;
            b.sum_e2 += e * e;
            b.sum_d2 += d * d;
        }
        b.err = cfg_.hybrid_open_loop ? b.sum_e2 : b.sum_d2;
        return b;
    }

    void run_hybrid(std::span<const double> x, const EncodedStream* in) {
        const std::size_t n_total = in ? in->codes.size() : x.size();
        const auto fl = static_cast<std::size_t>(cfg_.frame_len);
        const std::size_t n_frames = (n_total + fl - 1) / fl;
        std::vector<double> scratch;

        for (std::size_t f = 0; f < n_frames; ++f) {
            const std::size_t start = f * fl;
            const std::size_t len = std::min(fl, n_total - start);
            FrameStats frame = new_frame(start);
            frame.length = static_cast<int>(len);

            // both coefficient sets refit from the committed (decoded)
            // previous frame; frame 0 starts from the zero predictors
            if (f > 0) {
                const auto window = tail_window(recon_, start, static_cast<std::size_t>(cfg_.training_window));
                lin_ = fit_lpc(window, cfg_.lpc_order, cfg_.lpc_hamming);
                note_net_refit(refit_net_on(window, static_cast<std::uint32_t>(f)), frame);
            }

            if (!in) {
                BranchRun linear = run_branch(false, x, start, len, scratch);
                BranchRun nonlin = run_branch(true, x, start, len, scratch);
                const bool pick_nl = nonlin.err < linear.err;  // tie keeps the linear branch
                BranchRun& win = pick_nl ? nonlin : linear;

                hybrid_bits_.push_back(pick_nl ? 1 : 0);
                codes_.insert(codes_.end(), win.codes.begin(), win.codes.end());
                recon_ = std::move(win.recon);
                q_ = win.q;

                double sum_x2 = 0.0;
                for (std::size_t i = 0; i < len; ++i) sum_x2 += x[start + i] * x[start + i];
                frame.hybrid_bit = pick_nl ? 1 : 0;
                frame.linear_branch_error = linear.err;
                frame.nonlinear_branch_error = nonlin.err;
                finish_frame(frame, sum_x2, win.sum_e2, win.sum_d2,
                             pick_nl ? Predictor::mlp : Predictor::lpc);
            } else {
                const bool nl = in->hybrid_bits[f] != 0;
                for (std::size_t i = 0; i < len; ++i) {
                    const std::size_t n = start + i;
                    const double xh = nl ? predict_net(recon_, n, net_, cfg_.mlp_train.activation, scratch)
                                         : predict_linear(recon_, n, lin_);
                    const QuantResult qr = dequantize(in->codes[n], q_, cfg_.quantizer);
                    recon_.push_back(xh + qr.reconstructed);
                    q_ = qr.next;
                }
            }
        }
    }

    // --- bookkeeping -----------------------------------------------------

    FrameStats new_frame(std::size_t start) const {
        FrameStats f;
        f.start = start;
        return f;
    }

    void finish_frame(FrameStats& frame, double sum_x2, double sum_e2, double sum_d2, Predictor used) {
        frame.predictor_used = used;
        frame.prediction_gain_db = gain_db(sum_x2, sum_e2);
        frame.frame_snr_db = sum_x2 <= 0.0 && sum_d2 <= 0.0 ? kSegSnrCeilDb : segment_snr_db(sum_x2, sum_d2);
        frame.delta_end = q_.delta;
        stats_.frames.push_back(frame);
    }

    void check_refit_cap(std::size_t n) const {
        if (cfg_.refit_cap == 0) return;
        const std::size_t refits = (n + cfg_.computing_window - 1) / cfg_.computing_window;
        if (refits > cfg_.refit_cap)
            throw ConfigError("encode: refit count exceeds configured refit_cap");
    }

    void validate_stream_shape(const EncodedStream& s) const {
        const std::size_t n = s.codes.size();
        if (cfg_.predictor == Predictor::hybrid) {
            const std::size_t expect = (n + cfg_.frame_len - 1) / cfg_.frame_len;
            if (s.hybrid_bits.size() != expect)
                throw IoError("decode: hybrid bit count does not match sample count");
        }
        if (cfg_.adaptation == Adaptation::forward) {
            const std::size_t expect = (n + cfg_.computing_window - 1) / cfg_.computing_window;
            if (s.forward_payload.size() != expect)
                throw IoError("decode: forward payload count does not match sample count");
        }
        const int half = cfg_.quantizer.levels() / 2;
        for (const auto c : s.codes)
            if (c < -half || c > half - 1) throw IoError("decode: quantizer code out of range");
    }

    CodecConfig cfg_;
    int rate_;
    std::vector<double> recon_;
    QuantizerState q_;
    LinearCoeffs lin_;
    MlpWeights net_;
    std::vector<std::int8_t> codes_;
    std::vector<std::uint8_t> hybrid_bits_;
    std::vector<std::vector<double>> payload_;
    EncodeStats stats_;
};

}  // namespace detail

inline EncodeResult encode(const SampleBuffer& signal, const CodecConfig& config) {
    detail::Engine engine(config, signal.sample_rate_hz);
    return engine.encode(signal.samples);
}

inline SampleBuffer decode(const EncodedStream& stream) {
    detail::Engine engine(stream.config_echo, stream.sample_rate_hz);
    return engine.decode(stream);
}

// Instrumentation view of encode: same single code path, stats only.
inline EncodeStats encode_stats(const SampleBuffer& signal, const CodecConfig& config) {
    return encode(signal, config).stats;
}

}  // namespace nadpcm
