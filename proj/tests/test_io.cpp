#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "tscal/io.hpp"
#include "tscal/rng.hpp"

using namespace tscal;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / "tscal_io_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    auto p = scratch_dir() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

} // namespace

TEST_CASE("load_series_csv groups rows by id") {
    auto p = write_file("basic.csv", "id,value\na,1.0\na,2.0\nb,5.0\n");
    auto series = load_series_csv(p);
    REQUIRE(series.size() == 2);
    CHECK(series[0].id == "a");
    CHECK(series[0].values == std::vector<double>{1.0, 2.0});
    CHECK(series[1].id == "b");
    CHECK(series[1].values == std::vector<double>{5.0});
}

TEST_CASE("load_series_csv reports the offending row") {
    auto p = write_file("bad.csv", "id,value\na,1.0\na,2.0\na,x\n");
    try {
        load_series_csv(p);
        FAIL("expected parse error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("load_series_csv missing column is a schema error") {
    auto p = write_file("noschema.csv", "name,value\na,1.0\n");
    CHECK_THROWS_AS(load_series_csv(p), DataError);
}

TEST_CASE("load_series_csv reorders by timestamp") {
    auto p = write_file("ts.csv",
                        "id,timestamp,value\n"
                        "a,2020-01-05,5\n"
                        "a,2020-01-01,1\n"
                        "a,2020-01-04,4\n"
                        "a,2020-01-02,2\n"
                        "a,2020-01-03,3\n");
    CsvSchema schema;
    schema.timestamp_col = "timestamp";
    auto series = load_series_csv(p, schema);
    REQUIRE(series.size() == 1);

    // independent sort oracle over the (timestamp, value) pairs
    std::vector<std::pair<std::string, double>> rows = {
        {"2020-01-05", 5}, {"2020-01-01", 1}, {"2020-01-04", 4},
        {"2020-01-02", 2}, {"2020-01-03", 3}};
    std::sort(rows.begin(), rows.end());
    std::vector<double> expected;
    for (auto& [t, v] : rows) expected.push_back(v);
    CHECK(series[0].values == expected);
    CHECK(series[0].timestamps.front() == "2020-01-01");

    // integer timestamps sort numerically, not lexically
    auto p2 = write_file("ts_int.csv", "id,timestamp,value\na,10,10\na,9,9\na,100,100\n");
    auto series2 = load_series_csv(p2, schema);
    CHECK(series2[0].values == std::vector<double>{9, 10, 100});

    auto p3 = write_file("ts_dup.csv", "id,timestamp,value\na,5,1\na,5,2\n");
    CHECK_THROWS_AS(load_series_csv(p3, schema), DataError);
}

TEST_CASE("series csv round trip") {
    TimeSeries s;
    s.id = "rt";
    s.values = {1.5, -2.25, 0.1};
    auto p = scratch_dir() / "rt.csv";
    write_series_csv(p, std::span<const TimeSeries>(&s, 1));
    auto back = load_series_csv(p);
    REQUIRE(back.size() == 1);
    CHECK(back[0].values == s.values);
}

TEST_CASE("forecast file round trip is bit exact") {
    ForecastWindow w{"srs", 99, 8, 2};
    auto f = QuantileForecast::make(w, QuantileLevels({0.1, 0.5, 0.9}),
                                    {{0.1, 0.2, 0.30000000000000004},
                                     {-1e-17, 1.0 / 3.0, 12345.6789}});
    f.extra["strategy"] = "naive";
    f.extra["n_traj"] = "100";
    auto p = scratch_dir() / "fc.jsonl";
    write_forecasts(p, std::span<const QuantileForecast>(&f, 1));
    auto back = read_forecasts(p);
    REQUIRE(back.size() == 1);
    CHECK(back[0].window.series_id == "srs");
    CHECK(back[0].window.origin == 99);
    REQUIRE(back[0].values.size() == 2);
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(std::memcmp(&back[0].values[t][j], &f.values[t][j], sizeof(double)) == 0);
    // extras are written but not preserved on read
    CHECK(back[0].extra.empty());
}

TEST_CASE("forecast read repairs crossing rows") {
    auto p = write_file("cross.jsonl",
                        R"({"series_id":"a","origin":5,"levels":[0.1,0.5,0.9],"values":[[3,2,1]]})"
                        "\n");
    auto fcx = read_forecasts(p);
    REQUIRE(fcx.size() == 1);
    CHECK(fcx[0].crossing_repaired);
    CHECK(fcx[0].values[0] == std::vector<double>{1, 2, 3});
}

TEST_CASE("forecast read rejects ragged rows") {
    auto p = write_file(
        "ragged.jsonl",
        R"({"series_id":"a","origin":5,"levels":[0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8],"values":[[1,2,3,4,5,6,7,8,9]]})"
        "\n");
    CHECK_THROWS_AS(read_forecasts(p), DataError);
}

TEST_CASE("forecast read ignores unknown fields") {
    auto p = write_file("extra.jsonl",
                        R"({"series_id":"a","origin":5,"levels":[0.5],"values":[[1.0]],"note":"x"})"
                        "\n");
    auto fc = read_forecasts(p);
    REQUIRE(fc.size() == 1);
    CHECK(fc[0].extra.empty());
}

TEST_CASE("forecast round trip property on random grids") {
    RngStream rng(23, "io/roundtrip");
    std::vector<QuantileForecast> fcs;
    for (int rep = 0; rep < 20; ++rep) {
        const int H = 1 + static_cast<int>(rng.next_u64() % 6);
        const int nq = 2 + static_cast<int>(rng.next_u64() % 5);
        std::vector<double> levels(static_cast<std::size_t>(nq));
        for (int j = 0; j < nq; ++j) levels[static_cast<std::size_t>(j)] = (j + 1.0) / (nq + 1.0);
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(H));
        for (auto& row : rows) {
            row.resize(static_cast<std::size_t>(nq));
            for (auto& v : row) v = 100.0 * (rng.next_uniform() - 0.5);
            std::sort(row.begin(), row.end());
        }
        fcs.push_back(QuantileForecast::make(ForecastWindow{"r" + std::to_string(rep), rep, 1, H},
                                             QuantileLevels(levels), rows));
    }
    auto p = scratch_dir() / "prop.jsonl";
    write_forecasts(p, fcs);
    auto back = read_forecasts(p);
    REQUIRE(back.size() == fcs.size());
    for (std::size_t i = 0; i < fcs.size(); ++i) {
        CHECK(back[i].values == fcs[i].values);
        CHECK(back[i].levels == fcs[i].levels);
        CHECK_FALSE(back[i].crossing_repaired);
    }
}
