#pragma once

// Experiment sweep harness: runs encode/evaluate jobs over a corpus and a
// method/bits/window grid and reports SEGSNR rows as CSV. Rows are a pure
// function of (corpus bytes, spec) apart from the throughput column.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "nadpcm/codec.hpp"
#include "nadpcm/errors.hpp"
#include "nadpcm/signal.hpp"

namespace nadpcm {

struct MethodSpec {
    Predictor predictor = Predictor::lpc;
    Adaptation adaptation = Adaptation::backward;
    int lpc_order = 10;
};

// Labels follow the ADPCM<F|B><LPCp|MLP> / ADPCMB-HYBRID convention.
inline std::string method_label(const MethodSpec& m) {
    if (m.predictor == Predictor::hybrid) return "ADPCMB-HYBRID";
    std::string s = m.adaptation == Adaptation::forward ? "ADPCMF" : "ADPCMB";
    if (m.predictor == Predictor::lpc)
        s += "LPC" + std::to_string(m.lpc_order);
    else
        s += "MLP";
    return s;
}

inline MethodSpec parse_method_label(const std::string& label) {
    MethodSpec m;
    if (label == "ADPCMB-HYBRID" || label == "ADPCMBHYBRID") {
        m.predictor = Predictor::hybrid;
        m.adaptation = Adaptation::backward;
        return m;
    }
    if (label.rfind("ADPCM", 0) != 0 || label.size() < 7)
        throw ConfigError("unknown method label: " + label);
    const char fb = label[5];
    if (fb == 'F')
        m.adaptation = Adaptation::forward;
    else if (fb == 'B')
        m.adaptation = Adaptation::backward;
    else
        throw ConfigError("unknown method label: " + label);
    const std::string rest = label.substr(6);
    if (rest == "MLP") {
        m.predictor = Predictor::mlp;
    } else if (rest.rfind("LPC", 0) == 0) {
        m.predictor = Predictor::lpc;
        try {
            m.lpc_order = std::stoi(rest.substr(3));
        } catch (...) {
            throw ConfigError("unknown method label: " + label);
        }
        if (m.lpc_order < 1) throw ConfigError("unknown method label: " + label);
    } else {
        throw ConfigError("unknown method label: " + label);
    }
    return m;
}

struct SweepSpec {
    std::vector<std::string> corpus;
    std::vector<MethodSpec> methods;
    std::vector<int> bits_list;
    std::vector<int> frame_lens{100};
    std::vector<int> training_windows;   // empty: equal to frame_len (block mode)
    std::vector<int> computing_windows;  // empty: equal to frame_len (block mode)
    std::vector<std::uint32_t> seeds{1};
    std::string output_path;
    CodecConfig base;  // quantizer/mlp knobs shared by every cell
    int raw_sample_rate_hz = 8000;
    int threads = 0;  // 0 = hardware concurrency
};

struct ResultRow {
    std::string method;
    int nq = 0;
    int frame_len = 0;
    int training_window = 0;
    int computing_window = 0;
    std::uint32_t seed = 0;
    double segsnr_db = 0.0;   // mean of per-file SEGSNR
    double std_db = 0.0;      // std over all segments pooled across the corpus
    double selected_prev_fraction = std::numeric_limits<double>::quiet_NaN();  // NaN outside MLP runs
    double samples_per_second = 0.0;
};

inline constexpr const char* kSweepCsvHeader =
    "method,nq,frame_len,training_window,computing_window,seed,"
    "segsnr_db,std_db,selected_prev_fraction,samples_per_second";

inline SampleBuffer load_pcm_auto(const std::string& path, int raw_sample_rate_hz = 8000) {
    const bool wav = path.size() >= 4 && path.compare(path.size() - 4, 4, ".wav") == 0;
    return load_pcm(path, wav ? PcmFormat::wav : PcmFormat::raw16le, raw_sample_rate_hz);
}

inline std::string format_result_row(const ResultRow& r) {
    char buf[256];
    std::string prev = std::isnan(r.selected_prev_fraction)
                           ? ""
                           : [&] {
                                 char p[32];
                                 std::snprintf(p, sizeof p, "%.6f", r.selected_prev_fraction);
                                 return std::string(p);
                             }();
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%d,%u,%.6f,%.6f,%s,%.0f", r.method.c_str(), r.nq,
                  r.frame_len, r.training_window, r.computing_window, r.seed, r.segsnr_db, r.std_db,
                  prev.c_str(), r.samples_per_second);
    return buf;
}

namespace detail {

struct SweepCell {
    MethodSpec method;
    int nq, frame_len, training_window, computing_window;
    std::uint32_t seed;
};

inline CodecConfig cell_config(const SweepSpec& spec, const SweepCell& cell) {
    CodecConfig cfg = spec.base;
    cfg.predictor = cell.method.predictor;
    cfg.adaptation = cell.method.adaptation;
    cfg.lpc_order = cell.method.lpc_order;
    cfg.frame_len = cell.frame_len;
    cfg.training_window = cell.training_window;
    cfg.computing_window = cell.computing_window;
    QuantizerConfig q = QuantizerConfig::for_bits(cell.nq);
    q.delta_min = spec.base.quantizer.delta_min;
    q.delta_max = spec.base.quantizer.delta_max;
    q.delta_init = spec.base.quantizer.delta_init;
    cfg.quantizer = q;
    cfg.rng_seed = cell.seed;
    return cfg;
}

inline void run_cells(std::size_t count, int threads, const std::function<void(std::size_t)>& work) {
    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(count ? count : 1));
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

// Executes every valid combination in deterministic spec order. Combinations
// whose config cannot be validated (hybrid off block mode, forward window too
// short) are skipped with a warning on stderr.
inline std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
    if (spec.corpus.empty()) throw ConfigError("sweep: empty corpus");
    if (spec.methods.empty()) throw ConfigError("sweep: no methods");
    if (spec.bits_list.empty()) throw ConfigError("sweep: no quantizer bit depths");
    if (spec.frame_lens.empty()) throw ConfigError("sweep: no frame lengths");
    if (spec.seeds.empty()) throw ConfigError("sweep: no seeds");

    // load the whole corpus up front so unreadable files abort before any work
    std::vector<SampleBuffer> corpus;
    corpus.reserve(spec.corpus.size());
    for (const auto& path : spec.corpus) {
        try {
            corpus.push_back(load_pcm_auto(path, spec.raw_sample_rate_hz));
        } catch (const IoError& e) {
            throw IoError("sweep: corpus file unreadable: " + path + " (" + e.what() + ")");
        }
    }

    std::vector<detail::SweepCell> cells;
    for (const auto& method : spec.methods)
        for (int nq : spec.bits_list)
            for (int fl : spec.frame_lens) {
                const std::vector<int> tws = spec.training_windows.empty() ? std::vector<int>{fl}
                                                                           : spec.training_windows;
                const std::vector<int> cws = spec.computing_windows.empty() ? std::vector<int>{fl}
                                                                            : spec.computing_windows;
                for (int tw : tws)
                    for (int cw : cws)
                        for (std::uint32_t seed : spec.seeds)
                            cells.push_back({method, nq, fl, tw, cw, seed});
            }

    std::vector<ResultRow> rows(cells.size());
    std::vector<char> valid(cells.size(), 0);  // not vector<bool>: cells write concurrently

    detail::run_cells(cells.size(), spec.threads, [&](std::size_t i) {
        const auto& cell = cells[i];
        CodecConfig cfg = detail::cell_config(spec, cell);
        try {
            cfg.validate();
        } catch (const ConfigError& e) {
            std::fprintf(stderr, "sweep: skipping %s nq=%d fl=%d tw=%d cw=%d: %s\n",
                         method_label(cell.method).c_str(), cell.nq, cell.frame_len,
                         cell.training_window, cell.computing_window, e.what());
            return;
        }

        double sum_segsnr = 0.0;
        std::vector<double> pooled_segments;
        std::size_t total_samples = 0, prev_sel = 0, refits = 0;
        double encode_seconds = 0.0;
        for (const auto& file : corpus) {
            const auto t0 = std::chrono::steady_clock::now();
            EncodeResult res = encode(file, cfg);
            encode_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const SegSnrReport rep = segsnr(file, res.reconstruction, cfg.frame_len);
            sum_segsnr += rep.segsnr_db;
            pooled_segments.insert(pooled_segments.end(), rep.per_segment_db.begin(),
                                   rep.per_segment_db.end());
            total_samples += file.samples.size();
            prev_sel += res.stats.mlp_prev_selected;
            refits += res.stats.mlp_refits;
        }

        ResultRow row;
        row.method = method_label(cell.method);
        row.nq = cell.nq;
        row.frame_len = cell.frame_len;
        row.training_window = cell.training_window;
        row.computing_window = cell.computing_window;
        row.seed = cell.seed;
        row.segsnr_db = sum_segsnr / static_cast<double>(corpus.size());
        double mean = 0.0;
        for (double v : pooled_segments) mean += v;
        mean /= static_cast<double>(pooled_segments.size());
        double var = 0.0;
        for (double v : pooled_segments) var += (v - mean) * (v - mean);
        row.std_db = std::sqrt(var / static_cast<double>(pooled_segments.size()));
        if (cfg.uses_mlp() && refits > 0)
            row.selected_prev_fraction = static_cast<double>(prev_sel) / static_cast<double>(refits);
        row.samples_per_second = encode_seconds > 0.0 ? static_cast<double>(total_samples) / encode_seconds
                                                      : 0.0;
        rows[i] = std::move(row);
        valid[i] = 1;
    });

    std::vector<ResultRow> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (valid[i]) out.push_back(std::move(rows[i]));
    return out;
}

inline void write_sweep_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("sweep: cannot open output file: " + path);
    out << kSweepCsvHeader << "\n";
    for (const auto& row : rows) out << format_result_row(row) << "\n";
    if (!out) throw IoError("sweep: failed writing output file: " + path);
}

}  // namespace nadpcm
