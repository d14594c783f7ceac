#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "nadpcm/corpus.hpp"
#include "nadpcm/experiments.hpp"
#include "nadpcm/signal.hpp"
#include "nadpcm/stream.hpp"
#include "test_util.hpp"

using namespace nadpcm;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const TempDir& tmp, const std::string& args) {
    const std::string log = tmp.file("cli_out.txt");
    const std::string cmd = std::string(NADPCM_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    res.output = ss.str();
    return res;
}

double parse_value(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + " = ");
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size() + 3));
}

}  // namespace

TEST_CASE("eval of identical files reports the 80 dB clamp") {
    TempDir tmp("cli");
    store_pcm(gen_ar(3, 800), tmp.file("x.wav"), PcmFormat::wav);
    const auto res = run_cli(tmp, "eval " + tmp.file("x.wav") + " " + tmp.file("x.wav"));
    CHECK(res.exit_code == 0);
    CHECK(parse_value(res.output, "segsnr_db") == 80.0);
}

TEST_CASE("missing input files exit with code 2 and name the file") {
    TempDir tmp("cli");
    const auto res = run_cli(tmp, "eval " + tmp.file("absent.wav") + " " + tmp.file("absent.wav"));
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("absent.wav") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    TempDir tmp("cli");
    CHECK(run_cli(tmp, "no-such-command").exit_code == 1);
    CHECK(run_cli(tmp, "encode").exit_code == 1);  // missing arguments
    TempDir tmp2("cli");
    store_pcm(gen_ar(4, 500), tmp2.file("x.wav"), PcmFormat::wav);
    const auto res = run_cli(tmp2, "encode " + tmp2.file("x.wav") + " " + tmp2.file("x.nadp") +
                                       " --predictor hybrid --adaptation forward");
    CHECK(res.exit_code == 1);
}

TEST_CASE("encode, decode, eval round trip matches the sweep harness") {
    TempDir tmp("cli");
    const auto signal = gen_gated(12, 1200);
    store_pcm(signal, tmp.file("x.wav"), PcmFormat::wav);

    auto enc = run_cli(tmp, "encode " + tmp.file("x.wav") + " " + tmp.file("x.nadp") +
                                " --predictor lpc --adaptation backward --bits 4 --frame-len 100");
    REQUIRE(enc.exit_code == 0);
    const double reported = parse_value(enc.output, "segsnr_db");

    auto dec = run_cli(tmp, "decode " + tmp.file("x.nadp") + " " + tmp.file("y.wav"));
    REQUIRE(dec.exit_code == 0);

    auto eval = run_cli(tmp, "eval " + tmp.file("x.wav") + " " + tmp.file("y.wav") + " --segment-len 100");
    REQUIRE(eval.exit_code == 0);
    const double evaluated = parse_value(eval.output, "segsnr_db");

    // the decoder reproduced the encoder reconstruction through 16-bit
    // storage, so the two reports agree to a whisker
    CHECK_THAT(evaluated, Catch::Matchers::WithinAbs(reported, 0.05));

    // and the sweep harness computes the same number for the same cell
    SweepSpec spec;
    spec.corpus = {tmp.file("x.wav")};
    spec.methods = {parse_method_label("ADPCMBLPC10")};
    spec.bits_list = {4};
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 1);
    CHECK_THAT(rows[0].segsnr_db, Catch::Matchers::WithinAbs(reported, 1e-9));
}

TEST_CASE("command-line flags override config file values") {
    TempDir tmp("cli");
    store_pcm(gen_ar(14, 600), tmp.file("x.wav"), PcmFormat::wav);
    std::ofstream cfg(tmp.file("enc.cfg"));
    cfg << "bits = 3\n";
    cfg << "seed = 77\n";
    cfg << "frame-len = 50\n";
    cfg.close();

    auto res = run_cli(tmp, "encode " + tmp.file("x.wav") + " " + tmp.file("x.nadp") + " --config " +
                                tmp.file("enc.cfg") + " --bits 5");
    REQUIRE(res.exit_code == 0);
    const auto stream = read_stream_file(tmp.file("x.nadp"));
    CHECK(stream.config_echo.quantizer.bits == 5);         // flag wins
    CHECK(stream.config_echo.rng_seed == 77);              // file applies
    CHECK(stream.config_echo.frame_len == 50);             // file applies
    CHECK(stream.config_echo.training_window == 50);       // follows frame length

    auto bad = run_cli(tmp, "encode " + tmp.file("x.wav") + " " + tmp.file("x.nadp") + " --config " +
                                tmp.file("enc.cfg") + " --config-typo");
    CHECK(bad.exit_code == 1);
    std::ofstream broken(tmp.file("bad.cfg"));
    broken << "no-such-key = 1\n";
    broken.close();
    auto unknown = run_cli(tmp, "encode " + tmp.file("x.wav") + " " + tmp.file("x.nadp") +
                                    " --config " + tmp.file("bad.cfg"));
    CHECK(unknown.exit_code == 1);
    CHECK(unknown.output.find("no-such-key") != std::string::npos);
}

TEST_CASE("gen-corpus writes the requested files and sweep consumes a config file") {
    TempDir tmp("cli");
    auto gen = run_cli(tmp, "gen-corpus --kind gated --count 2 --length 900 --seed 9 --out-dir " +
                                tmp.path().string());
    REQUIRE(gen.exit_code == 0);
    REQUIRE(std::filesystem::exists(tmp.file("gated_000.wav")));
    REQUIRE(std::filesystem::exists(tmp.file("gated_001.wav")));

    std::ofstream cfg(tmp.file("sweep.cfg"));
    cfg << "# desk-scale sweep\n";
    cfg << "corpus = " << tmp.file("gated_000.wav") << "," << tmp.file("gated_001.wav") << "\n";
    cfg << "methods = ADPCMBLPC10,ADPCMFLPC10\n";
    cfg << "bits = 3,5\n";
    cfg << "output = " << tmp.file("rows.csv") << "\n";
    cfg.close();

    auto sweep = run_cli(tmp, "sweep --config " + tmp.file("sweep.cfg"));
    REQUIRE(sweep.exit_code == 0);
    std::ifstream csv(tmp.file("rows.csv"));
    std::string line;
    REQUIRE(std::getline(csv, line));
    CHECK(line == kSweepCsvHeader);
    int data_rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++data_rows;
    CHECK(data_rows == 4);
}
