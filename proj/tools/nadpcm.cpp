// Experiment CLI for the adaptive waveform codec: encode/decode streams,
// evaluate SEGSNR, run sweep grids, and generate synthetic corpora.
//
// Exit codes: 0 success, 1 usage/config error, 2 I/O error, 3 numerical
// failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "nadpcm/codec.hpp"
#include "nadpcm/corpus.hpp"
#include "nadpcm/experiments.hpp"
#include "nadpcm/signal.hpp"
#include "nadpcm/stream.hpp"

namespace {

using namespace nadpcm;

PcmFormat format_for(const std::string& path, const std::string& override_name) {
    if (override_name == "wav") return PcmFormat::wav;
    if (override_name == "raw16le") return PcmFormat::raw16le;
    if (!override_name.empty()) throw ConfigError("unknown pcm format: " + override_name);
    const bool wav = path.size() >= 4 && path.compare(path.size() - 4, 4, ".wav") == 0;
    return wav ? PcmFormat::wav : PcmFormat::raw16le;
}

// Flat `key = value` config files ('#' comments), one key per CLI flag.
// Values from the file apply only where the command line did not set the
// flag, so explicit flags always win.
class OptionBinder {
  public:
    explicit OptionBinder(CLI::App* cmd) : cmd_(cmd) {
        cmd_->add_option("--config", config_path_, "read options from a key = value file");
    }

    template <class T>
    CLI::Option* bind(const std::string& flag, T& var, const std::string& desc) {
        CLI::Option* opt = cmd_->add_option(flag, var, desc);
        entries_.push_back({flag.substr(2), opt, make_setter(var)});
        return opt;
    }

    CLI::Option* bind_flag(const std::string& flag, bool& var, const std::string& desc) {
        CLI::Option* opt = cmd_->add_flag(flag, var, desc);
        entries_.push_back({flag.substr(2), opt, make_setter(var)});
        return opt;
    }

    // call after CLI11 parsing
    void apply_config_file() const {
        if (config_path_.empty()) return;
        std::ifstream in(config_path_);
        if (!in) throw IoError("cannot open config file: " + config_path_);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                if (a == std::string::npos) return std::string();
                const auto b = s.find_last_not_of(" \t\r");
                return s.substr(a, b - a + 1);
            };
            if (trim(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(config_path_ + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            const auto entry = std::find_if(entries_.begin(), entries_.end(),
                                            [&](const Entry& e) { return e.key == key; });
            if (entry == entries_.end())
                throw ConfigError(config_path_ + ":" + std::to_string(lineno) + ": unknown key: " + key);
            if (entry->opt->count() > 0) continue;  // command line wins
            try {
                entry->set(value);
            } catch (const std::exception&) {
                throw ConfigError(config_path_ + ":" + std::to_string(lineno) + ": bad value for " + key);
            }
        }
    }

  private:
    struct Entry {
        std::string key;
        CLI::Option* opt;
        std::function<void(const std::string&)> set;
    };

    static std::vector<std::string> split_list(const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        out.push_back(cur);
        return out;
    }

    template <class T>
    static std::function<void(const std::string&)> make_setter(T& var) {
        return [&var](const std::string& value) {
            if constexpr (std::is_same_v<T, bool>) {
                if (value == "true" || value == "1")
                    var = true;
                else if (value == "false" || value == "0")
                    var = false;
                else
                    throw ConfigError("expected a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                var = value;
            } else if constexpr (std::is_same_v<T, int>) {
                var = std::stoi(value);
            } else if constexpr (std::is_same_v<T, std::uint32_t>) {
                var = static_cast<std::uint32_t>(std::stoul(value));
            } else if constexpr (std::is_same_v<T, std::size_t>) {
                var = static_cast<std::size_t>(std::stoull(value));
            } else if constexpr (std::is_same_v<T, double>) {
                var = std::stod(value);
            } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
                var = split_list(value);
            } else if constexpr (std::is_same_v<T, std::vector<int>>) {
                var.clear();
                for (const auto& item : split_list(value)) var.push_back(std::stoi(item));
            } else if constexpr (std::is_same_v<T, std::vector<std::uint32_t>>) {
                var.clear();
                for (const auto& item : split_list(value))
                    var.push_back(static_cast<std::uint32_t>(std::stoul(item)));
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                var.clear();
                for (const auto& item : split_list(value)) var.push_back(std::stod(item));
            } else {
                static_assert(!sizeof(T), "unsupported config value type");
            }
        };
    }

    CLI::App* cmd_;
    std::string config_path_;
    std::vector<Entry> entries_;
};

// Codec knobs shared by encode and sweep.
struct CodecOptions {
    std::string predictor = "lpc";
    std::string adaptation = "backward";
    int lpc_order = 10;
    bool lpc_hamming = false;
    int frame_len = 100;
    int training_window = -1;   // -1: follow frame_len
    int computing_window = -1;  // -1: follow frame_len
    int bits = 4;
    std::vector<double> multipliers;
    double delta_min = 1e-5;
    double delta_max = 0.5;
    double delta_init = 0.01;
    std::uint32_t seed = 1;
    std::uint32_t refit_cap = 0;
    bool hybrid_open_loop = false;
    int mlp_inputs = 10;
    int mlp_hidden = 2;
    int mlp_n_random = 3;
    int mlp_epochs_random = 6;
    int mlp_epochs_prev = 3;
    bool mlp_no_prev = false;
    bool mlp_closed_loop_eval = false;
    double mlp_init_range = 0.2;
    std::string mlp_activation = "tanh";
    double lm_lambda_init = 1e-2;
    double lm_lambda_up = 10.0;
    double lm_lambda_down = 0.1;
    double lm_lambda_max = 1e10;

    CodecConfig build() const {
        CodecConfig cfg;
        if (predictor == "lpc")
            cfg.predictor = Predictor::lpc;
        else if (predictor == "mlp")
            cfg.predictor = Predictor::mlp;
        else if (predictor == "hybrid")
            cfg.predictor = Predictor::hybrid;
        else
            throw ConfigError("unknown predictor: " + predictor);
        if (adaptation == "forward")
            cfg.adaptation = Adaptation::forward;
        else if (adaptation == "backward")
            cfg.adaptation = Adaptation::backward;
        else
            throw ConfigError("unknown adaptation: " + adaptation);
        cfg.lpc_order = lpc_order;
        cfg.lpc_hamming = lpc_hamming;
        cfg.frame_len = frame_len;
        cfg.training_window = training_window > 0 ? training_window : frame_len;
        cfg.computing_window = computing_window > 0 ? computing_window : frame_len;
        cfg.quantizer = QuantizerConfig::for_bits(bits);
        if (!multipliers.empty()) cfg.quantizer.multipliers = multipliers;
        cfg.quantizer.delta_min = delta_min;
        cfg.quantizer.delta_max = delta_max;
        cfg.quantizer.delta_init = delta_init;
        cfg.rng_seed = seed;
        cfg.refit_cap = refit_cap;
        cfg.hybrid_open_loop = hybrid_open_loop;
        cfg.mlp_train.inputs = mlp_inputs;
        cfg.mlp_train.hidden = mlp_hidden;
        cfg.mlp_train.n_random = mlp_n_random;
        cfg.mlp_train.epochs_random = mlp_epochs_random;
        cfg.mlp_train.epochs_prev = mlp_epochs_prev;
        cfg.mlp_train.use_prev = !mlp_no_prev;
        cfg.mlp_train.closed_loop_eval = mlp_closed_loop_eval;
        cfg.mlp_train.init_range = mlp_init_range;
        if (mlp_activation == "tanh")
            cfg.mlp_train.activation = Activation::tanh_fn;
        else if (mlp_activation == "sigmoid")
            cfg.mlp_train.activation = Activation::sigmoid_fn;
        else
            throw ConfigError("unknown activation: " + mlp_activation);
        cfg.mlp_train.lm.lm_lambda_init = lm_lambda_init;
        cfg.mlp_train.lm.lm_lambda_up = lm_lambda_up;
        cfg.mlp_train.lm.lm_lambda_down = lm_lambda_down;
        cfg.mlp_train.lm.lambda_max = lm_lambda_max;
        return cfg;
    }
};

// knobs shared by every sweep cell; encode adds the per-cell fields on top
void add_codec_base_options(OptionBinder& bind, CodecOptions& o) {
    bind.bind_flag("--lpc-hamming", o.lpc_hamming, "taper analysis windows with a Hamming window");
    bind.bind("--multipliers", o.multipliers, "step multipliers override")->delimiter(',');
    bind.bind("--delta-min", o.delta_min, "minimum quantizer step");
    bind.bind("--delta-max", o.delta_max, "maximum quantizer step");
    bind.bind("--delta-init", o.delta_init, "initial quantizer step");
    bind.bind("--refit-cap", o.refit_cap, "refuse configs needing more refits than this (0 = off)");
    bind.bind_flag("--hybrid-open-loop", o.hybrid_open_loop,
                   "switch branches on pre-quantization error instead of reconstruction error");
    bind.bind("--mlp-inputs", o.mlp_inputs, "mlp input taps");
    bind.bind("--mlp-hidden", o.mlp_hidden, "mlp hidden units");
    bind.bind("--mlp-n-random", o.mlp_n_random, "random initializations per refit");
    bind.bind("--mlp-epochs-random", o.mlp_epochs_random, "training epochs per random start");
    bind.bind("--mlp-epochs-prev", o.mlp_epochs_prev, "training epochs for previous weights");
    bind.bind_flag("--mlp-no-prev", o.mlp_no_prev, "drop the previous-weights candidate");
    bind.bind_flag("--mlp-closed-loop-eval", o.mlp_closed_loop_eval,
                   "rank candidates by quantized in-loop error over the training window");
    bind.bind("--mlp-init-range", o.mlp_init_range, "uniform init half-range");
    bind.bind("--mlp-activation", o.mlp_activation, "hidden activation: tanh | sigmoid")
        ->check(CLI::IsMember({"tanh", "sigmoid"}));
    bind.bind("--lm-lambda-init", o.lm_lambda_init, "Levenberg-Marquardt initial damping");
    bind.bind("--lm-lambda-up", o.lm_lambda_up, "damping increase factor");
    bind.bind("--lm-lambda-down", o.lm_lambda_down, "damping decrease factor");
    bind.bind("--lm-lambda-max", o.lm_lambda_max, "damping give-up threshold");
}

void add_codec_cell_options(OptionBinder& bind, CodecOptions& o) {
    bind.bind("--predictor", o.predictor, "predictor: lpc | mlp | hybrid")
        ->check(CLI::IsMember({"lpc", "mlp", "hybrid"}));
    bind.bind("--adaptation", o.adaptation, "adaptation: forward | backward")
        ->check(CLI::IsMember({"forward", "backward"}));
    bind.bind("--lpc-order", o.lpc_order, "all-pole predictor order");
    bind.bind("--frame-len", o.frame_len, "frame length in samples");
    bind.bind("--training-window", o.training_window, "fit window (default: frame length)");
    bind.bind("--computing-window", o.computing_window,
              "samples between refits, 1 = sample-adaptive (default: frame length)");
    bind.bind("--bits", o.bits, "quantizer bits (2-5)");
    bind.bind("--seed", o.seed, "rng seed for all stochastic choices");
}

int run_encode(const std::string& input, const std::string& output, const CodecOptions& opts,
               const std::string& in_format, int sample_rate, const std::string& stats_csv) {
    const auto signal = load_pcm(input, format_for(input, in_format), sample_rate);
    CodecConfig cfg = opts.build();
    if (cfg.computing_window == 1 && cfg.uses_mlp() && signal.samples.size() >= 2000)
        std::fprintf(stderr,
                     "warning: sample-adaptive mlp trains %d networks per sample over %zu samples; "
                     "consider --refit-cap or a larger --computing-window\n",
                     cfg.mlp_train.n_random + (cfg.mlp_train.use_prev ? 1 : 0), signal.samples.size());

    const EncodeResult res = encode(signal, cfg);
    write_stream_file(res.stream, output);

    std::printf("samples = %zu\n", signal.samples.size());
    if (signal.samples.size() >= static_cast<std::size_t>(cfg.frame_len)) {
        const auto report = segsnr(signal, res.reconstruction, cfg.frame_len);
        std::printf("segsnr_db = %.9f\n", report.segsnr_db);
        std::printf("std_db = %.9f\n", report.std_db);
    }
    if (cfg.uses_mlp())
        std::printf("selected_prev_fraction = %.6f\n", res.stats.selected_prev_fraction());
    if (cfg.predictor == Predictor::hybrid)
        std::printf("nonlinear_selection_fraction = %.6f\n", res.stats.nonlinear_selection_fraction());

    if (!stats_csv.empty()) {
        std::ofstream out(stats_csv, std::ios::trunc);
        if (!out) throw IoError("cannot open stats file: " + stats_csv);
        out << "frame,start,length,predictor,prediction_gain_db,frame_snr_db,delta_end,"
               "hybrid_bit,linear_branch_error,nonlinear_branch_error\n";
        for (std::size_t i = 0; i < res.stats.frames.size(); ++i) {
            const auto& f = res.stats.frames[i];
            const char* used = f.predictor_used == Predictor::lpc ? "lpc" : "mlp";
            out << i << ',' << f.start << ',' << f.length << ',' << used << ',' << f.prediction_gain_db
                << ',' << f.frame_snr_db << ',' << f.delta_end << ',' << f.hybrid_bit << ','
                << f.linear_branch_error << ',' << f.nonlinear_branch_error << "\n";
        }
    }
    return 0;
}

int run_decode(const std::string& input, const std::string& output, const std::string& out_format) {
    const auto stream = read_stream_file(input);
    const auto decoded = decode(stream);
    store_pcm(decoded, output, format_for(output, out_format));
    std::printf("samples = %zu\n", decoded.samples.size());
    std::printf("sample_rate_hz = %d\n", decoded.sample_rate_hz);
    return 0;
}

int run_eval(const std::string& original, const std::string& decoded, int segment_len,
             const std::string& format, int sample_rate) {
    const auto a = load_pcm(original, format_for(original, format), sample_rate);
    const auto b = load_pcm(decoded, format_for(decoded, format), sample_rate);
    const auto report = segsnr(a, b, segment_len);
    std::printf("segments = %zu\n", report.per_segment_db.size());
    std::printf("segment_len = %d\n", report.segment_len);
    std::printf("segsnr_db = %.9f\n", report.segsnr_db);
    std::printf("std_db = %.9f\n", report.std_db);
    return 0;
}

struct SweepOptions {
    std::vector<std::string> corpus;
    std::vector<std::string> methods;
    std::vector<int> bits;
    std::vector<int> frame_lens{100};
    std::vector<int> training_windows;
    std::vector<int> computing_windows;
    std::vector<std::uint32_t> seeds{1};
    std::string output;
    int sample_rate = 8000;
    int threads = 0;
};

int run_sweep_cmd(const SweepOptions& o, const CodecOptions& codec) {
    SweepSpec spec;
    spec.corpus = o.corpus;
    for (const auto& label : o.methods) spec.methods.push_back(parse_method_label(label));
    spec.bits_list = o.bits;
    spec.frame_lens = o.frame_lens;
    spec.training_windows = o.training_windows;
    spec.computing_windows = o.computing_windows;
    spec.seeds = o.seeds;
    spec.output_path = o.output;
    spec.base = codec.build();
    spec.raw_sample_rate_hz = o.sample_rate;
    spec.threads = o.threads;
    if (spec.output_path.empty()) throw ConfigError("sweep: --output is required");

    const auto rows = run_sweep(spec);
    write_sweep_csv(rows, spec.output_path);
    std::printf("rows = %zu\n", rows.size());
    std::printf("output = %s\n", spec.output_path.c_str());
    return 0;
}

int run_gen_corpus(const std::string& kind_name, int count, std::size_t length, std::uint32_t seed,
                   int sample_rate, const std::string& out_dir, const std::string& format_name) {
    const CorpusKind kind = parse_corpus_kind(kind_name);
    const PcmFormat format = format_name == "raw16le" ? PcmFormat::raw16le : PcmFormat::wav;
    const char* ext = format == PcmFormat::wav ? "wav" : "raw";
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    for (int i = 0; i < count; ++i) {
        const auto buf = generate_signal(kind, seed + static_cast<std::uint32_t>(i), length, sample_rate);
        char name[64];
        std::snprintf(name, sizeof name, "%s_%03d.%s", kind_name.c_str(), i, ext);
        const auto path = (std::filesystem::path(out_dir) / name).string();
        store_pcm(buf, path, format);
        std::printf("%s\n", path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive waveform codec with linear and neural predictors"};
    app.require_subcommand(1);

    // encode
    auto* enc = app.add_subcommand("encode", "encode a pcm file into a .nadp stream");
    std::string enc_in, enc_out, enc_format, enc_stats;
    int enc_rate = 8000;
    enc->add_option("input", enc_in, "input pcm file")->required();
    enc->add_option("output", enc_out, "output stream file")->required();
    OptionBinder enc_bind(enc);
    enc_bind.bind("--input-format", enc_format, "wav | raw16le (default: by extension)");
    enc_bind.bind("--sample-rate", enc_rate, "sample rate for raw input");
    enc_bind.bind("--stats-csv", enc_stats, "write per-frame stats to this csv");
    CodecOptions enc_codec;
    add_codec_base_options(enc_bind, enc_codec);
    add_codec_cell_options(enc_bind, enc_codec);

    // decode
    auto* dec = app.add_subcommand("decode", "decode a .nadp stream into a pcm file");
    std::string dec_in, dec_out, dec_format;
    dec->add_option("input", dec_in, "input stream file")->required();
    dec->add_option("output", dec_out, "output pcm file")->required();
    dec->add_option("--output-format", dec_format, "wav | raw16le (default: by extension)");

    // eval
    auto* ev = app.add_subcommand("eval", "segmental SNR between two pcm files");
    std::string ev_orig, ev_dec, ev_format;
    int ev_seg = 100, ev_rate = 8000;
    ev->add_option("original", ev_orig, "reference pcm file")->required();
    ev->add_option("decoded", ev_dec, "decoded pcm file")->required();
    ev->add_option("--segment-len", ev_seg, "segment length in samples");
    ev->add_option("--format", ev_format, "wav | raw16le (default: by extension)");
    ev->add_option("--sample-rate", ev_rate, "sample rate for raw input");

    // sweep
    auto* sw = app.add_subcommand("sweep", "run a method/bits/window grid and emit csv");
    SweepOptions sw_opts;
    OptionBinder sw_bind(sw);
    sw_bind.bind("--corpus", sw_opts.corpus, "corpus files")->delimiter(',');
    sw_bind
        .bind("--methods", sw_opts.methods, "method labels, e.g. ADPCMFLPC10,ADPCMBMLP,ADPCMB-HYBRID")
        ->delimiter(',');
    sw_bind.bind("--bits", sw_opts.bits, "quantizer bit depths")->delimiter(',');
    sw_bind.bind("--frame-lens", sw_opts.frame_lens, "frame lengths")->delimiter(',');
    sw_bind.bind("--training-windows", sw_opts.training_windows, "fit windows (default: frame length)")
        ->delimiter(',');
    sw_bind
        .bind("--computing-windows", sw_opts.computing_windows, "refit intervals (default: frame length)")
        ->delimiter(',');
    sw_bind.bind("--seeds", sw_opts.seeds, "rng seeds")->delimiter(',');
    sw_bind.bind("--output", sw_opts.output, "output csv path");
    sw_bind.bind("--sample-rate", sw_opts.sample_rate, "sample rate for raw corpus files");
    sw_bind.bind("--threads", sw_opts.threads, "worker threads (0 = all cores)");
    CodecOptions sw_codec;
    add_codec_base_options(sw_bind, sw_codec);

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "generate synthetic corpus files");
    std::string gen_kind = "mix", gen_dir, gen_format = "wav";
    int gen_count = 10, gen_rate = 8000;
    std::size_t gen_length = 8000;
    std::uint32_t gen_seed = 1;
    gen->add_option("--kind", gen_kind, "ar | amfm | gated | tanh-ar2 | mix")
        ->check(CLI::IsMember({"ar", "amfm", "gated", "tanh-ar2", "mix"}));
    gen->add_option("--count", gen_count, "number of files");
    gen->add_option("--length", gen_length, "samples per file");
    gen->add_option("--seed", gen_seed, "base seed (file i uses seed+i)");
    gen->add_option("--sample-rate", gen_rate, "sample rate");
    gen->add_option("--out-dir", gen_dir, "output directory")->required();
    gen->add_option("--format", gen_format, "wav | raw16le")
        ->check(CLI::IsMember({"wav", "raw16le"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*enc) {
            enc_bind.apply_config_file();
            return run_encode(enc_in, enc_out, enc_codec, enc_format, enc_rate, enc_stats);
        }
        if (*dec) return run_decode(dec_in, dec_out, dec_format);
        if (*ev) return run_eval(ev_orig, ev_dec, ev_seg, ev_format, ev_rate);
        if (*sw) {
            sw_bind.apply_config_file();
            return run_sweep_cmd(sw_opts, sw_codec);
        }
        if (*gen)
            return run_gen_corpus(gen_kind, gen_count, gen_length, gen_seed, gen_rate, gen_dir,
                                  gen_format);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
