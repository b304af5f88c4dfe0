#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "kamlab/errors.hpp"
#include "kamlab/lab.hpp"

using namespace kamlab;
using namespace kamlab::lab;

namespace {
Config make(const char* name, nlohmann::ordered_json params = {}, std::uint64_t seed = 1) {
    Config c;
    c.experiment = name;
    c.params = std::move(params);
    c.seed = seed;
    return c;
}
}  // namespace

TEST_CASE("unknown experiment and bad parameters") {
    CHECK_THROWS_AS(run(make("nonsense")), Error);
    CHECK_THROWS_AS(run(make("arith", {{"levels", 0}})), Error);
}

TEST_CASE("arith experiment passes and is deterministic") {
    Config c = make("arith", {{"levels", 5}, {"vmax", 500}});
    RunResult a = run_arith(c);
    CHECK(a.pass);
    CHECK(a.report.at("schema") == "kamlab/1");
    CHECK(a.report.at("pass").get<bool>());
    RunResult b = run_arith(c);
    CHECK(report_bytes(a) == report_bytes(b));
    REQUIRE(a.files.size() == b.files.size());
    for (size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i] == b.files[i]);
    // every report embeds config, git string, precision
    CHECK(a.report.contains("git"));
    CHECK(a.report.at("precision_bits").get<long>() >= 64);
    CHECK(a.report.at("config").at("params").at("levels") == 5);
}

TEST_CASE("arith experiment fails when eps crosses the threshold") {
    // the smallness condition needs eps < a/2
    Config c = make("arith", {{"levels", 5}, {"eps", 1.2}, {"vmax", 100}});
    RunResult r = run_arith(c);
    CHECK(!r.pass);
    bool smallness_failed = false;
    for (auto& ch : r.report.at("checks"))
        if (ch.at("name") == "rotation-smallness" && !ch.at("pass").get<bool>())
            smallness_failed = true;
    CHECK(smallness_failed);
}

TEST_CASE("barrier experiment at a reduced ladder") {
    Config c = make("barrier", {{"Deltas", std::vector<double>{0.2, 0.1}},
                                {"xi_points", 5},
                                {"integrable_span", 2048}});
    RunResult r = run_barrier(c);
    CHECK(r.pass);
    // determinism
    RunResult r2 = run_barrier(c);
    CHECK(report_bytes(r) == report_bytes(r2));
    bool found_scan = false;
    for (auto& [name, contents] : r.files)
        if (name == "barrier_scan.csv") {
            found_scan = true;
            CHECK(contents.find("hyperbolic+bump") != std::string::npos);
        }
    CHECK(found_scan);
}

TEST_CASE("lindstedt experiment") {
    Config c = make("lindstedt", {{"K", 20}});
    RunResult r = run_lindstedt(c);
    CHECK(r.pass);
    RunResult r2 = run_lindstedt(c);
    CHECK(report_bytes(r) == report_bytes(r2));
}

TEST_CASE("trees experiment at a reduced order") {
    Config c = make("trees", {{"kmax", 6}, {"sum_kmax", 4}, {"vmax", 2000}});
    RunResult r = run_trees(c);
    CHECK(r.pass);
    RunResult r2 = run_trees(c);
    CHECK(report_bytes(r) == report_bytes(r2));
}

TEST_CASE("renorm experiment") {
    Config c = make("renorm", {{"kmax", 6}, {"synthetic_samples", 120}}, 7);
    RunResult r = run_renorm(c);
    CHECK(r.pass);
    RunResult r2 = run_renorm(c);
    CHECK(report_bytes(r) == report_bytes(r2));
    // different seed still passes but may differ in bytes
    Config c3 = make("renorm", {{"kmax", 6}, {"synthetic_samples", 120}}, 8);
    CHECK(run_renorm(c3).pass);
}

TEST_CASE("write_outputs produces the report and side files") {
    Config c = make("arith", {{"levels", 4}, {"vmax", 100}});
    RunResult r = run_arith(c);
    std::string dir = "/tmp/kamlab_test_out";
    std::filesystem::remove_all(dir);
    write_outputs(r, dir);
    CHECK(std::filesystem::exists(dir + "/report.json"));
    CHECK(std::filesystem::exists(dir + "/qtable.csv"));
    std::ifstream f(dir + "/report.json");
    nlohmann::ordered_json back = nlohmann::ordered_json::parse(f);
    CHECK(back.at("experiment") == "arith");
}

TEST_CASE("config round trip") {
    Config c = make("trees", {{"kmax", 5}}, 99);
    Config back = Config::from_json(c.to_json());
    CHECK(back.experiment == c.experiment);
    CHECK(back.seed == c.seed);
    CHECK(back.params == c.params);
}
