#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("TSCAL_BIN");
    REQUIRE(b != nullptr);
    return b;
}

struct RunResult {
    int code;
    std::string output;
};

RunResult run(const std::string& args, const fs::path& dir) {
    const auto out_file = dir / "cmd_output.txt";
    const std::string cmd = bin() + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WEXITSTATUS(status);
    std::ifstream in(out_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& sub) {
    auto dir = fs::temp_directory_path() / "tscal_cli_tests" / sub;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_config(const fs::path& path, const fs::path& data_dir, const fs::path& out_dir) {
    std::ofstream out(path);
    out << "[protocol]\n"
        << "context_len = 32\n"
        << "horizon = 8\n"
        << "stride = 16\n"
        << "seed = 21\n"
        << "threads = 2\n"
        << "write_forecasts = true\n"
        << "out = " << out_dir.string() << "\n"
        << "[dataset.ar1]\n"
        << "kind = csv\n"
        << "path = " << (data_dir / "ar1.csv").string() << "\n"
        << "split = 200\n"
        << "[model.oracle]\n"
        << "forecaster = oracle_ar1\n"
        << "alpha = 0.9\n"
        << "sigma = 0.1\n"
        << "strategy = exact\n"
        << "[model.traj]\n"
        << "forecaster = oracle_ar1\n"
        << "alpha = 0.9\n"
        << "sigma = 0.1\n"
        << "strategy = trajectory\n"
        << "patch = 2\n"
        << "n_traj = 20\n";
}

} // namespace

TEST_CASE("cli: full synth / backtest / report / score / diag flow") {
    auto dir = scratch("flow");
    const auto data = dir / "data";
    const auto out1 = dir / "run1";
    const auto out2 = dir / "run2";

    auto synth = run("synth --kind ar1 --length 400 --split 200 --seed 3 --out " +
                         data.string(),
                     dir);
    CAPTURE(synth.output);
    REQUIRE(synth.code == 0);
    REQUIRE(fs::exists(data / "ar1.csv"));

    write_config(dir / "exp.ini", data, out1);
    auto bt = run("backtest --config " + (dir / "exp.ini").string(), dir);
    CAPTURE(bt.output);
    REQUIRE(bt.code == 0);
    REQUIRE(fs::exists(out1 / "records.csv"));
    REQUIRE(fs::exists(out1 / "report.txt"));

    // determinism across repeated runs and a different thread count
    write_config(dir / "exp2.ini", data, out2);
    auto bt2 = run("backtest --config " + (dir / "exp2.ini").string() + " --threads 1", dir);
    REQUIRE(bt2.code == 0);
    CHECK(slurp(out1 / "records.csv") == slurp(out2 / "records.csv"));

    // report regenerates aggregates from the records file
    auto rep = run("report --records " + (out1 / "records.csv").string() + " --out " +
                       (dir / "rep").string(),
                   dir);
    CAPTURE(rep.output);
    REQUIRE(rep.code == 0);
    CHECK(slurp(dir / "rep" / "aggregates.csv") == slurp(out1 / "aggregates.csv"));

    // scoring the forecasts written by the run reproduces the oracle records
    const auto fc = out1 / "forecasts_ar1_oracle_ar1.jsonl";
    REQUIRE(fs::exists(fc));
    auto sc = run("score --forecasts " + fc.string() + " --data " + (data / "ar1.csv").string() +
                      " --label oracle --dataset ar1 --out " + (dir / "scored").string(),
                  dir);
    CAPTURE(sc.output);
    REQUIRE(sc.code == 0);
    const auto scored = slurp(dir / "scored" / "records.csv");
    const auto original = slurp(out1 / "records.csv");
    // every scored oracle line must appear verbatim in the backtest records
    std::istringstream lines(scored);
    std::string line;
    std::getline(lines, line);  // header
    int matched = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        CHECK(original.find(line) != std::string::npos);
        ++matched;
    }
    CHECK(matched > 0);

    auto diag = run("diag pacf --data " + (data / "ar1.csv").string() + " --max-lag 10", dir);
    REQUIRE(diag.code == 0);
    CHECK(diag.output.find("series_id,lag,pacf") != std::string::npos);
    CHECK(diag.output.find("ar1,1,") != std::string::npos);
}

TEST_CASE("cli: exit codes") {
    auto dir = scratch("codes");
    CHECK(run("", dir).code == 1);                       // usage: missing subcommand
    CHECK(run("backtest", dir).code == 1);               // usage: missing --config
    CHECK(run("backtest --config /nonexistent.ini", dir).code == 2);  // data error
    CHECK(run("--help", dir).code == 0);
    auto bad_synth = run("synth --kind nope", dir);
    CHECK(bad_synth.code == 2);  // unknown kind is a data error
    auto bad_split = run("synth --kind ar1 --length 100 --split 200", dir);
    CHECK(bad_split.code == 2);
}
